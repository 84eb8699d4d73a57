from .oracle_scenario import OracleCheckScenario

__all__ = ['OracleCheckScenario']
