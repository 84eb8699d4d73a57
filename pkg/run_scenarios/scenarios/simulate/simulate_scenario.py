"""
Simulate Scenario
Synthesizes a phase-scanned frame stack (and optionally one tilted frame)
for a run configuration and writes frames, ground truth and a manifest
"""

import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from services.frame_io import save_frame, sha256_file, write_grid_csv, write_json
from services.imaging_engine import ImagingEngine, add_shot_noise
from services.imaging_types import CameraFrame, GeometryMC, ObjectMap

from ..common.base_scenario import BaseScenario, ScenarioConfig, ScenarioStep
from ...configs.run_config import RunConfig
from ...configs.simulation_config import SimulationConfig


class SimulateScenario(BaseScenario):
    """Frame synthesis for one run configuration"""

    def __init__(self, run_config: RunConfig, overwrite: bool = False,
                 numerics: Optional[dict] = None, log_callback: Callable = None):
        super().__init__(log_callback)
        self.run_config = run_config
        self.overwrite = overwrite
        self.numerics = SimulationConfig.get_numerics()
        self.numerics.update(numerics or {})
        self.engine = ImagingEngine(self.numerics, self.log_callback)

        self.object: Optional[ObjectMap] = None
        self.frames: List[CameraFrame] = []
        self.offaxis_frame: Optional[CameraFrame] = None
        self.manifest: Dict[str, Any] = {}

    def get_config(self) -> ScenarioConfig:
        steps = [
            ScenarioStep("load_object", "load_object"),
            ScenarioStep("synthesize_frames", "synthesize_frames"),
        ]
        if self.run_config.carrier is not None:
            steps.append(ScenarioStep("synthesize_offaxis", "synthesize_offaxis"))
        steps += [
            ScenarioStep("write_frames", "write_frames"),
            ScenarioStep("write_manifest", "write_manifest"),
        ]
        return ScenarioConfig(
            name="Simulate",
            description=f"{self.run_config.frames_k} frames, {self.run_config.configuration.value} geometry",
            steps=steps,
        )

    def execute_step(self, step: ScenarioStep) -> bool:
        if step.action == "load_object":
            return self._step_load_object()
        elif step.action == "synthesize_frames":
            return self._step_synthesize_frames()
        elif step.action == "synthesize_offaxis":
            return self._step_synthesize_offaxis()
        elif step.action == "write_frames":
            return self._step_write_frames()
        elif step.action == "write_manifest":
            return self._step_write_manifest()
        self.log_callback(f"Unknown step action: {step.action}", "error")
        return False

    # ------------------------------------------------------------------

    def _camera_kwargs(self) -> Dict[str, Any]:
        return {'camera_shape': self.run_config.camera_shape, 'camera_pitch': self.run_config.camera_pitch}

    def _noisy(self, frame: CameraFrame, index: int) -> CameraFrame:
        if self.run_config.mean_counts <= 0:
            return frame
        return add_shot_noise(frame, self.run_config.mean_counts, self.run_config.seed + index)

    def _step_load_object(self) -> bool:
        self.object = self.run_config.build_object()
        ny, nx = self.object.shape
        self.log_callback(f"Object loaded: {ny}x{nx} pixels, pitch {self.object.pitch:.3e} m", "info")
        return True

    def _step_synthesize_frames(self) -> bool:
        frames = self.engine.simulate_stack(self.object, self.run_config.geometry, self.run_config.phases,
                                            **self._camera_kwargs())
        self.frames = [self._noisy(frame, j) for j, frame in enumerate(frames)]
        if self.run_config.mean_counts > 0:
            self.log_callback(f"Shot noise applied: {self.run_config.mean_counts:g} counts/pixel, "
                              f"seed {self.run_config.seed}", "info")
        return True

    def _step_synthesize_offaxis(self) -> bool:
        g = self.run_config.geometry.with_phase(self.run_config.start_rad)
        kwargs = dict(self._camera_kwargs(), carrier=self.run_config.carrier)
        if isinstance(g, GeometryMC):
            frame = self.engine.simulate_frame_mc(self.object, g, **kwargs)
        else:
            frame = self.engine.simulate_frame_pc(self.object, g, **kwargs)
        self.offaxis_frame = self._noisy(frame, len(self.frames))
        self.log_callback(f"Tilted frame synthesized with carrier {self.run_config.carrier}", "info")
        return True

    def _step_write_frames(self) -> bool:
        directory = self.begin_output(self.run_config.output_dir, self.overwrite)
        prefix = self.run_config.prefix
        entries = []
        for j, frame in enumerate(self.frames):
            entries.append(save_frame(frame, os.path.join(directory, f"{prefix}_{j:03d}")))
        self.manifest['frames'] = entries

        if self.offaxis_frame is not None:
            entry = save_frame(self.offaxis_frame, os.path.join(directory, f"{prefix}_offaxis"))
            entry['carrier_rad_per_m'] = list(self.run_config.carrier)
            self.manifest['offaxis'] = entry

        self.manifest['ground_truth'] = self._write_ground_truth(directory)
        self.log_callback(f"{len(entries)} frames written", "info")
        return True

    def _write_ground_truth(self, directory: str) -> Dict[str, Any]:
        """Coherence term encoded by the frames, plus the object resampled on the camera grid"""
        g = self.run_config.geometry
        kwargs = self._camera_kwargs()
        if isinstance(g, GeometryMC):
            coherence, pitch, y_c, x_c = self.engine.coherence_mc(self.object, g, False, **kwargs)
        else:
            coherence, pitch, y_c, x_c = self.engine.coherence_pc(self.object, g, False, **kwargs)
        if coherence is None:
            coherence = np.zeros((len(y_c), len(x_c)), dtype=complex)
        obj = self.engine.ground_truth(self.object, g, **kwargs)

        meta = {'pitch_m': pitch}
        files = {
            'magnitude': write_grid_csv(os.path.join(directory, 'truth_magnitude.csv'), np.abs(coherence), meta),
            'phase': write_grid_csv(os.path.join(directory, 'truth_phase.csv'), np.angle(coherence), meta),
            'object_magnitude': write_grid_csv(os.path.join(directory, 'object_magnitude.csv'), np.abs(obj), meta),
            'object_phase': write_grid_csv(os.path.join(directory, 'object_phase.csv'), np.angle(obj), meta),
        }
        return {key: {'file': os.path.basename(path), 'sha256': sha256_file(path)} for key, path in files.items()}

    def _step_write_manifest(self) -> bool:
        g = self.run_config.geometry
        self.manifest.update(self.run_config.to_manifest())
        self.manifest.update({
            'magnification': g.magnification,
            'object_blur_std_m': g.object_blur_std,
            'camera_pitch_m': self.frames[0].pitch,
            'camera_shape_px': list(self.frames[0].shape),
            'noise': {'mean_counts': self.run_config.mean_counts, 'seed': self.run_config.seed},
            'numerics': {k: self.numerics[k] for k in ('quadrature', 'hermite_nodes', 'min_pixels_per_sigma')},
        })
        name = SimulationConfig.get_export_config()['manifest_name']
        write_json(os.path.join(self.staging_dir, name), self.manifest)
        return True
