"""
Common Scenario Components
Shared components used by every command scenario
"""

from .base_scenario import BaseScenario, ScenarioConfig, ScenarioStatus, ScenarioStep

__all__ = [
    'BaseScenario',
    'ScenarioConfig',
    'ScenarioStatus',
    'ScenarioStep',
]
