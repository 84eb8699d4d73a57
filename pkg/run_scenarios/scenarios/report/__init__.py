from .report_scenario import ReportScenario, KINDS

__all__ = ['ReportScenario', 'KINDS']
