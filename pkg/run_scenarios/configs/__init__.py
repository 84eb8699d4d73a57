"""
Run Scenarios Configuration Package
"""

from .simulation_config import SimulationConfig
from .table1_config import Table1Config
from .run_config import RunConfig

__all__ = ['SimulationConfig', 'Table1Config', 'RunConfig']
