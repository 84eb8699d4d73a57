#!/usr/bin/env python3
"""
End-to-end runs of the qiup-sim command line
"""

import math
import os
import sys
import textwrap

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from main import main
from services.frame_io import load_frame, read_json

MC_GEOMETRY = """
    [geometry.mc]
    f_idler_m = 0.075
    lambda_signal_m = 810e-9
    lambda_idler_m = 1550e-9
    pump_waist_m = 119e-6
"""

MAGNIFICATION = 810e-9 / 1550e-9


def write_config(tmp_path, object_section, scan="frames_k = 4", extra="", name="run.ini"):
    body = MC_GEOMETRY + f"""
    [object]
    {object_section}

    [scan]
    {scan}

    [output]
    directory = {tmp_path / 'frames'}
    """ + extra
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return str(path)


def load_stack(directory):
    manifest = read_json(os.path.join(directory, 'manifest.json'))
    return manifest, [load_frame(os.path.join(directory, entry['csv'])) for entry in manifest['frames']]


CAT = "kind = cat\n    shape_px = 64,64\n    pitch_m = 20e-6"
BUMP = "kind = phase_bump\n    shape_px = 64,64\n    pitch_m = 20e-6\n    width_m = 160e-6"


def test_simulate_cat_writes_complementary_frames(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0

    manifest, frames = load_stack(tmp_path / 'frames')
    assert len(frames) == 4
    assert manifest['configuration'] == 'MC'
    assert manifest['magnification'] == pytest.approx(MAGNIFICATION)
    np.testing.assert_allclose([f.phase_tag for f in frames], [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    np.testing.assert_allclose(frames[0].grid + frames[2].grid, 2.0, atol=1e-12)
    for name in ('frame_000.pgm', 'truth_magnitude.csv', 'object_phase.csv'):
        assert os.path.isfile(tmp_path / 'frames' / name)


def test_simulate_empty_object_gives_uniform_frames(tmp_path):
    config = write_config(tmp_path, "kind = empty\n    shape_px = 32,32\n    pitch_m = 20e-6")
    assert main(['simulate', config]) == 0
    _, frames = load_stack(tmp_path / 'frames')
    for frame in frames:
        assert np.ptp(frame.grid) <= 1e-12


def test_simulate_rejects_too_few_frames(tmp_path):
    config = write_config(tmp_path, CAT, scan="frames_k = 2")
    assert main(['simulate', config]) == 2
    assert not os.path.exists(tmp_path / 'frames')


def test_simulate_config_errors(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config, '--set', 'geometry.mc.focal_length=1']) == 2
    assert main(['simulate', str(tmp_path / 'missing.ini')]) == 2
    assert main(['simulate', config, '--set', 'object.pitch_m=2e-4']) == 3
    assert not os.path.exists(tmp_path / 'frames')


def test_existing_output_needs_overwrite(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0
    assert main(['simulate', config]) == 2
    assert main(['simulate', config, '--overwrite']) == 0
    leftovers = [name for name in os.listdir(tmp_path) if name.startswith('.frames.')]
    assert leftovers == []


def test_noisy_runs_are_byte_identical(tmp_path):
    noise = "\n    [noise]\n    mean_counts = 1000\n    seed = 11\n"
    config = write_config(tmp_path, CAT, extra=noise)
    assert main(['simulate', config]) == 0
    assert main(['simulate', config, '--set', f"output.directory={tmp_path / 'again'}"]) == 0
    first = read_json(str(tmp_path / 'frames' / 'manifest.json'))
    second = read_json(str(tmp_path / 'again' / 'manifest.json'))
    assert [e['sha256_csv'] for e in first['frames']] == [e['sha256_csv'] for e in second['frames']]
    assert [e['sha256_pgm'] for e in first['frames']] == [e['sha256_pgm'] for e in second['frames']]


def test_reconstruct_phase_stepping(tmp_path, capsys):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0
    capsys.readouterr()
    assert main(['reconstruct', str(tmp_path / 'frames')]) == 0
    assert 'phase_rms_rad' in capsys.readouterr().out

    summary = read_json(str(tmp_path / 'frames' / 'reconstruction_phase_stepping' / 'summary.json'))
    assert summary['frames'] == 4
    assert summary['magnitude_rms'] < 1e-9
    assert summary['phase_rms_rad'] < 1e-6


def test_reconstruct_visibility_needs_a_full_scan(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0
    assert main(['reconstruct', str(tmp_path / 'frames'), '--method', 'visibility']) == 2
    assert not os.path.exists(tmp_path / 'frames' / 'reconstruction_visibility')

    scan_config = write_config(tmp_path, CAT, scan="frames_k = 8\n    method = scan", name="scan.ini")
    assert main(['simulate', scan_config, '--overwrite']) == 0
    assert main(['reconstruct', str(tmp_path / 'frames'), '--method', 'visibility']) == 0
    assert main(['reconstruct', str(tmp_path / 'frames'), '--method', 'image-function']) == 0
    summary = read_json(str(tmp_path / 'frames' / 'reconstruction_visibility' / 'summary.json'))
    assert summary['magnitude_rms'] < 1e-9


def test_reconstruct_off_axis_matches_stepping(tmp_path, capsys):
    camera_pitch = 20e-6 * MAGNIFICATION
    carrier = 2 * math.pi * 12 / (64 * camera_pitch)
    holography = f"\n    [holography]\n    carrier_x_rad_per_m = {carrier!r}\n"
    config = write_config(tmp_path, BUMP, extra=holography)
    assert main(['simulate', config]) == 0
    assert read_json(str(tmp_path / 'frames' / 'manifest.json'))['offaxis']['carrier_rad_per_m'][0] == carrier

    capsys.readouterr()
    assert main(['reconstruct', str(tmp_path / 'frames'), '--method', 'off-axis']) == 0
    assert 'phase_rms_vs_stepping_rad' in capsys.readouterr().out
    summary = read_json(str(tmp_path / 'frames' / 'reconstruction_off_axis' / 'summary.json'))
    assert summary['guard_px'] == 8
    assert summary['phase_rms_vs_stepping_rad'] < 5e-3

    stats = summary['magnitude_error_stats']
    assert stats['count'] == (64 - 2 * 8) ** 2
    assert 0 < stats['filtered_count'] <= stats['count']
    assert 0.0 <= stats['median'] <= stats['max']


def test_off_axis_without_tilted_frame_fails(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0
    assert main(['reconstruct', str(tmp_path / 'frames'), '--method', 'off-axis']) == 2


def test_tampered_frame_is_detected(tmp_path):
    config = write_config(tmp_path, CAT)
    assert main(['simulate', config]) == 0
    with open(tmp_path / 'frames' / 'frame_001.csv', 'a') as f:
        f.write('\r\n')
    assert main(['reconstruct', str(tmp_path / 'frames')]) == 2


def test_report_table1(tmp_path, capsys):
    assert main(['report', 'table1', '--output', str(tmp_path / 'report')]) == 0
    out = capsys.readouterr().out
    assert '366 µm' in out
    payload = read_json(str(tmp_path / 'report' / 'table1_report.json'))
    assert len(payload['reports']) == 3
    assert os.path.isfile(tmp_path / 'report' / 'table1_report.txt')
    assert os.path.isfile(tmp_path / 'report' / 'table1.xlsx') or os.path.isfile(tmp_path / 'report' / 'table1.csv')


def test_report_design_and_metrology(tmp_path, capsys):
    assert main(['report', 'design', '--set', 'setup=microscopy']) == 0
    assert '30' in capsys.readouterr().out
    assert main(['report', 'design', '--set', 'pump_waist_m=abc']) == 2

    assert main(['report', 'metrology', '--set', 'r_points=5', '--set', 'metrology.beta_values=0,1',
                 '--output', str(tmp_path / 'metrology')]) == 0
    payload = read_json(str(tmp_path / 'metrology' / 'metrology_report.json'))
    assert payload['monotone_decreasing_in_r'] is True
    assert len(payload['rows']) == 10
    assert payload['rows'][0]['shot_noise_reference'] is None
    assert os.path.isfile(tmp_path / 'metrology' / 'metrology_sweep.csv')
    assert main(['report', 'metrology', '--set', 'gain=3']) == 2


def test_oracle_check(tmp_path, capsys):
    assert main(['oracle-check', '--grid', '4', '4', '2', '--output', str(tmp_path / 'oracle')]) == 0
    assert capsys.readouterr().out.startswith('PASS')
    report = read_json(str(tmp_path / 'oracle' / 'oracle_report.json'))
    assert report['passed'] is True

    assert main(['oracle-check', '--grid', '4', '4', '2', '--inject-bug', '--output', str(tmp_path / 'bug')]) == 1
    assert capsys.readouterr().out.startswith('FAIL')
    assert not os.path.exists(tmp_path / 'bug')
    assert [name for name in os.listdir(tmp_path) if name.startswith('.bug.')] == []

    assert main(['oracle-check', '--grid', '0', '10', '4']) == 2


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
