#!/usr/bin/env python3
"""
Scenario step lists, progress reporting and run-configuration loading
"""

import math
import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from run_scenarios.configs import RunConfig, SimulationConfig, Table1Config
from run_scenarios.configs.run_config import parse_override
from run_scenarios.scenarios import OracleCheckScenario, ReconstructScenario, ReportScenario, SimulateScenario
from run_scenarios.scenarios.common.base_scenario import ScenarioStatus
from services.errors import ValidationError
from services.frame_io import save_object
from services.imaging_types import Configuration, CorrelationModel, GeometryPC
from services.objects import synthetic_object


def log_callback(msg, level="info"):
    print(f"[{level.upper()}] {msg}")


MC_SECTIONS = {
    'geometry.mc': {'f_idler_m': '0.075', 'lambda_signal_m': '810e-9', 'lambda_idler_m': '1550e-9',
                    'pump_waist_m': '119e-6'},
    'object': {'kind': 'cat', 'shape_px': '32,32', 'pitch_m': '20e-6'},
}


def test_scenario_step_lists():
    run_config = RunConfig.from_sections(MC_SECTIONS)
    simulate = SimulateScenario(run_config, log_callback=log_callback)
    names = [step.action for step in simulate.get_config().steps]
    assert names == ['load_object', 'synthesize_frames', 'write_frames', 'write_manifest']

    tilted = RunConfig.from_sections(MC_SECTIONS, ['holography.carrier_x_rad_per_m=1e5'])
    assert 'synthesize_offaxis' in [s.action for s in SimulateScenario(tilted).get_config().steps]

    reconstruct = ReconstructScenario('frames', 'visibility', log_callback=log_callback)
    assert [s.name for s in reconstruct.get_config().steps] == ['load_frames', 'reconstruct', 'score',
                                                                 'write_results']
    assert reconstruct.output_dir == os.path.join('frames', 'reconstruction_visibility')

    assert len(ReportScenario('table1').get_config().steps) == 1
    assert len(ReportScenario('table1', output_dir='out').get_config().steps) == 2
    assert OracleCheckScenario((2, 2, 1), output_dir='out').get_config().steps[0].action == 'prepare_output'


def test_unknown_names_are_rejected():
    with pytest.raises(ValidationError):
        ReconstructScenario('frames', 'wavelet')
    with pytest.raises(ValidationError):
        ReportScenario('budget')
    with pytest.raises(ValidationError):
        OracleCheckScenario((3, 3))


def test_progress_after_report_run():
    scenario = ReportScenario('design', {'setup': 'position_correlation'}, log_callback=log_callback)
    assert scenario.get_progress()['progress_percent'] == 0
    assert scenario.run()
    progress = scenario.get_progress()
    assert progress['status'] == ScenarioStatus.COMPLETED.value
    assert progress['progress_percent'] == 100
    assert scenario.reports[0].configuration is Configuration.PC


def test_failed_run_records_error():
    scenario = ReportScenario('metrology', {'r_points': '1'}, log_callback=log_callback)
    assert not scenario.run()
    assert scenario.status is ScenarioStatus.FAILED
    assert isinstance(scenario.last_error, ValidationError)


def test_run_config_defaults_and_phases():
    config = RunConfig.from_sections(MC_SECTIONS)
    assert config.configuration is Configuration.MC
    assert config.geometry.f_c == config.geometry.f_I
    assert config.geometry.correlation is CorrelationModel.GAUSSIAN
    assert config.frames_k == 4
    np.testing.assert_allclose(config.phases, [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    manifest = config.to_manifest()
    assert manifest['configuration'] == 'MC'
    assert manifest['sections']['object']['kind'] == 'cat'


def test_overrides_and_validation():
    config = RunConfig.from_sections(MC_SECTIONS, ['scan.frames_k=6', 'scan.start_rad=0.5',
                                                   'geometry.mc.correlation=separable'])
    assert config.frames_k == 6
    assert config.phases[0] == 0.5
    assert config.geometry.correlation is CorrelationModel.SEPARABLE
    assert parse_override('geometry.pc.crystal_length_m = 2e-3') == ('geometry.pc', 'crystal_length_m', '2e-3')

    with pytest.raises(ValidationError, match="frames_k must be >= 3"):
        RunConfig.from_sections(MC_SECTIONS, ['scan.frames_k=2'])
    with pytest.raises(ValidationError, match=">= 8 for scan"):
        RunConfig.from_sections(MC_SECTIONS, ['scan.method=scan', 'scan.frames_k=4'])
    with pytest.raises(ValidationError):
        RunConfig.from_sections(MC_SECTIONS, ['camera.gain=2'])
    with pytest.raises(ValidationError):
        RunConfig.from_sections({'object': MC_SECTIONS['object']})
    with pytest.raises(ValidationError):
        RunConfig.from_sections(MC_SECTIONS, ['noise.mean_counts=-1'])
    with pytest.raises(ValidationError):
        parse_override('frames_k=3')


def test_position_correlation_config(tmp_path):
    obj = synthetic_object('patch', (16, 16), 4e-6, magnitude=0.2)
    save_object(obj, str(tmp_path / 'mag.csv'), str(tmp_path / 'phase.csv'))
    sections = {
        'geometry.pc': {'magnification_signal': '2', 'crystal_length_m': '2e-3', 'lambda_signal_m': '810e-9',
                        'lambda_idler_m': '1550e-9', 'camera_shape_px': '8,12'},
        'object': {'path': 'mag.csv', 'phase_path': 'phase.csv'},
    }
    config = RunConfig.from_sections(sections, base_dir=str(tmp_path))
    assert isinstance(config.geometry, GeometryPC)
    assert config.geometry.magnification == 2.0
    assert config.camera_shape == (8, 12)
    loaded = config.build_object()
    np.testing.assert_allclose(loaded.grid, obj.grid, atol=1e-15)


@pytest.mark.parametrize("name", ["example_mc.ini", "example_pc.ini"])
def test_example_configs_load(name):
    path = os.path.join(project_root, 'run_scenarios', 'configs', name)
    config = RunConfig.from_file(path)
    obj = config.build_object()
    assert obj.shape == (128, 128)
    assert config.output_dir.startswith('results')


def test_static_configs():
    numerics = SimulationConfig.get_numerics()
    numerics['quadrature'] = 'hermite'
    assert SimulationConfig.get_numerics()['quadrature'] == 'convolution'
    assert SimulationConfig.get_export_config()['manifest_name'] == 'manifest.json'
    assert Table1Config.ORDER == ['fuenzalida', 'microscopy', 'position_correlation']
    setup = Table1Config.get_setup('fuenzalida')
    setup['pump_waist_m'] = 1.0
    assert Table1Config.get_setup('fuenzalida')['pump_waist_m'] == 119e-6
    assert Table1Config.get_setup('unknown') == {}


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
