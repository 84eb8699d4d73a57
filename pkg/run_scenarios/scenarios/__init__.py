"""
Command Scenarios Module
One scenario per command-line subcommand
"""

from .simulate import SimulateScenario
from .reconstruct import ReconstructScenario
from .report import ReportScenario
from .oracle import OracleCheckScenario

__all__ = [
    'SimulateScenario',
    'ReconstructScenario',
    'ReportScenario',
    'OracleCheckScenario',
]
