"""
Report Scenario
Design-figure, comparison-table and metrology-sweep reports
"""

import math
import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from services.design_analytics import DesignReport, comparison_report, report_from_setup
from services.errors import ValidationError
from services.frame_io import write_json
from services.metrology import metrology_sweep
from services.report_export import ReportExporter, format_text_table

from ..common.base_scenario import BaseScenario, ScenarioConfig, ScenarioStep
from ...configs.simulation_config import SimulationConfig
from ...configs.table1_config import Table1Config

KINDS = ('design', 'metrology', 'table1')

METROLOGY_DEFAULTS = {
    'r_min': 0.0,
    'r_max': 2.0,
    'r_points': 21,
    'beta_values': '0',
}


def _parse_params(pairs: Dict[str, str], defaults: Dict[str, Any]) -> Dict[str, Any]:
    params = dict(defaults)
    for key, value in pairs.items():
        if key not in defaults:
            raise ValidationError(f"unknown report parameter {key!r}; known: {', '.join(sorted(defaults))}")
        params[key] = value
    return params


class ReportScenario(BaseScenario):
    """Emit one report kind as JSON plus text, Excel or CSV companions"""

    def __init__(self, kind: str, params: Optional[Dict[str, str]] = None, output_dir: Optional[str] = None,
                 overwrite: bool = False, log_callback: Callable = None):
        super().__init__(log_callback)
        if kind not in KINDS:
            raise ValidationError(f"unknown report kind {kind!r}; choose from {', '.join(KINDS)}")
        self.kind = kind
        self.params = dict(params or {})
        self.output_dir = output_dir
        self.overwrite = overwrite
        self.exporter = ReportExporter(self.log_callback, SimulationConfig.get_export_config()['sheets'])

        self.reports: List[DesignReport] = []
        self.sweep = None
        self.text = ""
        self.payload: Dict[str, Any] = {}

    def get_config(self) -> ScenarioConfig:
        steps = [ScenarioStep("compute", "compute_" + self.kind)]
        if self.output_dir:
            steps.append(ScenarioStep("write_report", "write_report"))
        return ScenarioConfig(name=f"Report ({self.kind})",
                              description=f"{self.kind} report", steps=steps)

    def execute_step(self, step: ScenarioStep) -> bool:
        if step.action == "compute_design":
            return self._step_compute_design()
        elif step.action == "compute_table1":
            return self._step_compute_table1()
        elif step.action == "compute_metrology":
            return self._step_compute_metrology()
        elif step.action == "write_report":
            return self._step_write_report()
        self.log_callback(f"Unknown step action: {step.action}", "error")
        return False

    # ------------------------------------------------------------------

    def _design_setup(self) -> Dict[str, Any]:
        """Preset (setup=<name>) with per-key overrides; numeric strings become floats"""
        params = dict(self.params)
        preset = params.pop('setup', 'fuenzalida')
        setup = Table1Config.get_setup(preset)
        if not setup:
            raise ValidationError(f"unknown setup {preset!r}; choose from {', '.join(Table1Config.ORDER)}")
        for key, value in params.items():
            if key in ('configuration', 'label'):
                setup[key] = value
                continue
            try:
                setup[key] = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"design parameter {key} must be a number, got {value!r}") from None
        return setup

    def _step_compute_design(self) -> bool:
        report = report_from_setup(self._design_setup())
        self.reports = [report]
        self.text = format_text_table(self.reports)
        self.payload = {'reports': [report.to_dict()], 'units': 'SI'}
        self.log_callback(f"res_FWHM {report.res_fwhm * 1e6:.1f} um, FoV {report.fov * 1e3:.2f} mm, "
                          f"m {report.modes_per_direction:.1f}", "info")
        return True

    def _step_compute_table1(self) -> bool:
        self.reports = comparison_report(Table1Config.get_all_setups())
        self.text = format_text_table(self.reports)
        self.payload = {'reports': [r.to_dict() for r in self.reports], 'units': 'SI'}
        return True

    def _step_compute_metrology(self) -> bool:
        params = _parse_params(self.params, METROLOGY_DEFAULTS)
        try:
            r_min, r_max = float(params['r_min']), float(params['r_max'])
            r_points = int(params['r_points'])
            betas = [float(b) for b in str(params['beta_values']).split(',') if b.strip()]
        except ValueError as e:
            raise ValidationError(f"invalid metrology parameter: {e}") from None
        if r_points < 2 or not (0 <= r_min < r_max) or not betas or min(betas) < 0:
            raise ValidationError("metrology sweep needs 0 <= r_min < r_max, r_points >= 2 "
                                  "and nonnegative beta_values")

        self.sweep = metrology_sweep(np.linspace(r_min, r_max, r_points), betas)
        monotone = all(
            bool(np.all(np.diff(group['delta_phi_min'].to_numpy()) < 0))
            for _, group in self.sweep.groupby('beta')
        )
        self.payload = {
            'kind': 'metrology',
            'r_range': [r_min, r_max],
            'r_points': r_points,
            'beta_values': betas,
            'monotone_decreasing_in_r': monotone,
            'rows': [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
                     for row in self.sweep.to_dict(orient='records')],
        }
        lines = [f"{'r':>8}{'beta':>8}{'delta_phi_min':>16}{'shot_noise':>14}"]
        for row in self.sweep.itertuples(index=False):
            lines.append(f"{row.r:8.3f}{row.beta:8.3f}{row.delta_phi_min:16.6g}{row.shot_noise_reference:14.6g}")
        self.text = '\n'.join(lines) + '\n'
        self.log_callback(f"Metrology sweep: {len(self.sweep)} rows, monotone in r: {monotone}", "info")
        return True

    def _step_write_report(self) -> bool:
        directory = self.begin_output(self.output_dir, self.overwrite)
        write_json(os.path.join(directory, f"{self.kind}_report.json"), self.payload)
        with open(os.path.join(directory, f"{self.kind}_report.txt"), 'w') as f:
            f.write(self.text)
        if self.kind == 'table1':
            self.exporter.export_excel(self.reports, os.path.join(directory, 'table1.xlsx'))
        if self.kind == 'metrology':
            self.exporter.export_sweep_csv(self.sweep, os.path.join(directory, 'metrology_sweep.csv'))
        return True
