from .simulate_scenario import SimulateScenario

__all__ = ['SimulateScenario']
