"""
Oracle Check Scenario
Runs the closed-form vs state-vector equivalence suite
"""

import os
from typing import Callable, Optional, Sequence

from services.fock_oracle import EquivalenceReport, check_equivalence, default_grid
from services.errors import OracleMismatchError, ValidationError
from services.frame_io import write_json

from ..common.base_scenario import BaseScenario, ScenarioConfig, ScenarioStep
from ...configs.simulation_config import SimulationConfig

# added to every closed form by the harness self-test
INJECTED_BUG_DELTA = 1e-6


class OracleCheckScenario(BaseScenario):
    """Equivalence check on a (|T|, phi, gamma) grid"""

    def __init__(self, grid: Sequence[int] = (10, 10, 4), tolerance: Optional[float] = None,
                 inject_bug: bool = False, output_dir: Optional[str] = None, overwrite: bool = False,
                 log_callback: Callable = None):
        super().__init__(log_callback)
        if len(grid) != 3 or any(int(n) < 1 for n in grid):
            raise ValidationError(f"oracle grid needs three positive axis sizes, got {list(grid)}")
        self.grid = tuple(int(n) for n in grid)
        self.tolerance = SimulationConfig.get_numerics()['oracle_tolerance'] if tolerance is None else tolerance
        self.inject_bug = inject_bug
        self.output_dir = output_dir
        self.overwrite = overwrite
        self.report: Optional[EquivalenceReport] = None
        self.report_dict: dict = {}

    def get_config(self) -> ScenarioConfig:
        steps = [ScenarioStep("equivalence_suite", "run_suite")]
        if self.output_dir:
            steps.insert(0, ScenarioStep("prepare_output", "prepare_output"))
        return ScenarioConfig(
            name="Oracle check",
            description="{}x{}x{} grid, tolerance {:.0e}".format(*self.grid, self.tolerance),
            steps=steps,
        )

    def execute_step(self, step: ScenarioStep) -> bool:
        if step.action == "prepare_output":
            self.begin_output(self.output_dir, self.overwrite)
            return True
        elif step.action == "run_suite":
            return self._step_run_suite()
        self.log_callback(f"Unknown step action: {step.action}", "error")
        return False

    def _step_run_suite(self) -> bool:
        magnitudes, phis, gammas = default_grid(*self.grid)
        perturbation = INJECTED_BUG_DELTA if self.inject_bug else 0.0
        if self.inject_bug:
            self.log_callback("Injected-bug mode: closed forms are perturbed", "warn")
        try:
            self.report = check_equivalence(magnitudes, phis, gammas, self.tolerance,
                                            perturbation, self.log_callback)
        except OracleMismatchError as e:
            self.report_dict = e.report
            for name, delta in sorted(e.report.get('deltas', {}).items()):
                self.log_callback(f"  {name}: max delta {delta:.3e}", "error")
            raise
        self.report_dict = self.report.to_dict()
        if self.staging_dir:
            write_json(os.path.join(self.staging_dir, 'oracle_report.json'), self.report_dict)
        self.log_callback(f"All {len(self.report.deltas)} checks within {self.tolerance:.0e}", "info")
        return True
