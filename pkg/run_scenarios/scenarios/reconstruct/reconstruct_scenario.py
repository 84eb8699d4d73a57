"""
Reconstruct Scenario
Recovers magnitude and phase maps from a simulated frame directory and
scores them against the ground truth stored with the frames
"""

import math
import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from lib.utils import crop_guard, phase_rms, rms, robust_statistics
from services.errors import ValidationError
from services.frame_io import load_frame, read_grid_csv, read_json, verify_entry, write_grid_csv, write_json
from services.imaging_types import CameraFrame
from services.reconstruction import (image_function, off_axis_holography, phase_stepping,
                                     transmittance_from_stepping, visibility_map)

from ..common.base_scenario import BaseScenario, ScenarioConfig, ScenarioStep
from ...configs.simulation_config import SimulationConfig

METHODS = ('visibility', 'image-function', 'phase-stepping', 'off-axis')

# pixels whose true coherence falls below this fraction of the peak carry no usable phase
PHASE_MASK_FRACTION = 0.05


class ReconstructScenario(BaseScenario):
    """Reconstruction of one frame directory with one method"""

    def __init__(self, frames_dir: str, method: str, output_dir: Optional[str] = None,
                 overwrite: bool = False, guard_px: Optional[int] = None, log_callback: Callable = None):
        super().__init__(log_callback)
        if method not in METHODS:
            raise ValidationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
        self.frames_dir = frames_dir
        self.method = method
        self.output_dir = output_dir or os.path.join(frames_dir, 'reconstruction_' + method.replace('-', '_'))
        self.overwrite = overwrite
        numerics = SimulationConfig.get_numerics()
        self.guard_px = numerics['holography_guard_px'] if guard_px is None else int(guard_px)
        self.outlier_method = numerics['outlier_method']

        self.manifest: Dict[str, Any] = {}
        self.frames: List[CameraFrame] = []
        self.offaxis: Optional[CameraFrame] = None
        self.truth: Optional[np.ndarray] = None
        self.magnitude: Optional[np.ndarray] = None
        self.phase: Optional[np.ndarray] = None
        self.summary: Dict[str, Any] = {}

    def get_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            name="Reconstruct",
            description=f"{self.method} reconstruction of {self.frames_dir}",
            steps=[
                ScenarioStep("load_frames", "load_frames"),
                ScenarioStep("reconstruct", "reconstruct", {'method': self.method}),
                ScenarioStep("score", "score"),
                ScenarioStep("write_results", "write_results"),
            ],
        )

    def execute_step(self, step: ScenarioStep) -> bool:
        if step.action == "load_frames":
            return self._step_load_frames()
        elif step.action == "reconstruct":
            return self._step_reconstruct(step.parameters['method'])
        elif step.action == "score":
            return self._step_score()
        elif step.action == "write_results":
            return self._step_write_results()
        self.log_callback(f"Unknown step action: {step.action}", "error")
        return False

    # ------------------------------------------------------------------

    def _load(self, entry: Dict[str, Any]) -> CameraFrame:
        try:
            csv_path = verify_entry(self.frames_dir, entry['csv'], entry['sha256_csv'])
            verify_entry(self.frames_dir, entry['pgm'], entry['sha256_pgm'])
        except KeyError as e:
            raise ValidationError(f"manifest frame entry lacks {e}") from None
        frame = load_frame(csv_path)
        if abs(frame.phase_tag - float(entry.get('phase_rad', frame.phase_tag))) > 1e-12:
            raise ValidationError(f"phase of {entry['csv']} does not match the manifest")
        return frame

    def _step_load_frames(self) -> bool:
        name = SimulationConfig.get_export_config()['manifest_name']
        self.manifest = read_json(os.path.join(self.frames_dir, name))
        entries = self.manifest.get('frames', [])
        if not entries:
            raise ValidationError("manifest lists no frames")
        self.frames = [self._load(entry) for entry in entries]
        if 'offaxis' in self.manifest:
            self.offaxis = self._load(self.manifest['offaxis'])

        truth = self.manifest.get('ground_truth')
        if truth:
            magnitude_path = verify_entry(self.frames_dir, truth['magnitude']['file'], truth['magnitude']['sha256'])
            phase_path = verify_entry(self.frames_dir, truth['phase']['file'], truth['phase']['sha256'])
            magnitude, _ = read_grid_csv(magnitude_path)
            phase, _ = read_grid_csv(phase_path)
            self.truth = magnitude * np.exp(1j * phase)
        self.log_callback(f"Loaded {len(self.frames)} frames"
                          + (" and a tilted frame" if self.offaxis is not None else ""), "info")
        return True

    def _stepping_estimate(self) -> np.ndarray:
        stepped = phase_stepping(self.frames)
        return transmittance_from_stepping(stepped, len(self.frames))

    def _step_reconstruct(self, method: str) -> bool:
        if method == 'visibility':
            self.magnitude = visibility_map(self.frames)
        elif method == 'image-function':
            # R_max - R_min = 2 |K| for frames 1 + |K| cos(...)
            self.magnitude = image_function(self.frames) / 2.0
        elif method == 'phase-stepping':
            estimate = self._stepping_estimate()
            self.magnitude, self.phase = np.abs(estimate), np.angle(estimate)
        else:
            if self.offaxis is None:
                raise ValidationError("off-axis reconstruction needs a tilted frame; set [holography] carrier keys")
            carrier = self.manifest['offaxis'].get('carrier_rad_per_m')
            if not carrier:
                raise ValidationError("manifest lacks the carrier of the tilted frame")
            estimate = off_axis_holography(self.offaxis, carrier)
            self.magnitude, self.phase = np.abs(estimate), np.angle(estimate)
        self.log_callback(f"{method} reconstruction done", "info")
        return True

    def _phase_mask(self) -> Optional[np.ndarray]:
        if self.truth is None:
            return None
        peak = float(np.abs(self.truth).max())
        if peak == 0:
            return np.zeros(self.truth.shape, dtype=bool)
        return np.abs(self.truth) > PHASE_MASK_FRACTION * peak

    def _step_score(self) -> bool:
        guard = self.guard_px if self.method == 'off-axis' else 0
        self.summary = {
            'method': self.method,
            'frames': len(self.frames),
            'guard_px': guard,
            'magnitude_stats': robust_statistics(self.magnitude, remove_outliers=False),
        }
        if self.truth is not None:
            if self.magnitude.shape != self.truth.shape:
                raise ValidationError("ground truth does not match the frame shape")
            mask = self._phase_mask()
            magnitude_error = self.magnitude - np.abs(self.truth)
            self.summary['magnitude_rms'] = rms(magnitude_error, guard)
            # border ringing and masked-out pixels show up as outliers of the per-pixel error
            self.summary['magnitude_error_stats'] = robust_statistics(
                np.abs(crop_guard(magnitude_error, guard)), outlier_method=self.outlier_method)
            if self.phase is not None:
                self.summary['phase_rms_rad'] = phase_rms(self.phase, np.angle(self.truth), guard, mask,
                                                          remove_piston=False)

        if self.method == 'off-axis' and len(self.frames) >= 3 and self.phase is not None:
            try:
                stepping = self._stepping_estimate()
            except ValidationError as e:
                self.log_callback(f"Stepping comparison skipped: {e}", "warn")
            else:
                mask = self._phase_mask()
                self.summary['phase_rms_vs_stepping_rad'] = phase_rms(
                    self.phase, np.angle(stepping), guard, mask, remove_piston=False)

        for key in ('magnitude_rms', 'phase_rms_rad', 'phase_rms_vs_stepping_rad'):
            if key in self.summary:
                value = self.summary[key]
                self.log_callback(f"{key}: {value:.3e}" if math.isfinite(value) else f"{key}: n/a", "info")
        return True

    def _step_write_results(self) -> bool:
        directory = self.begin_output(self.output_dir, self.overwrite)
        pitch = self.frames[0].pitch if self.offaxis is None else self.offaxis.pitch
        meta = {'pitch_m': pitch}
        files = {'magnitude': os.path.basename(
            write_grid_csv(os.path.join(directory, 'magnitude.csv'), self.magnitude, meta))}
        if self.phase is not None:
            files['phase'] = os.path.basename(
                write_grid_csv(os.path.join(directory, 'phase.csv'), self.phase, meta))
        self.summary['files'] = files
        name = SimulationConfig.get_export_config()['summary_name']
        write_json(os.path.join(directory, name), self.summary)
        return True
