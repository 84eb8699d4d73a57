#!/usr/bin/env python3
"""
Frame files, object loading and manifest checksums
"""

import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from lib.utils import crop_guard, phase_rms, robust_statistics, rms, wrap_phase
from services.errors import ValidationError
from services.frame_io import (PGM_MAXVAL, load_frame, load_object, read_grid_csv, read_json, read_pgm, save_frame,
                               save_object, sha256_file, verify_entry, write_grid_csv, write_json, write_pgm)
from services.imaging_types import CameraFrame
from services.objects import synthetic_object


def test_csv_grid_keeps_full_precision(tmp_path):
    grid = np.array([[0.1, 1 / 3], [2.0 ** -40, 1.0]])
    path = write_grid_csv(str(tmp_path / "grid.csv"), grid, {'pitch_m': 1.25e-5})
    loaded, meta = read_grid_csv(path)
    np.testing.assert_array_equal(loaded, grid)
    assert meta == {'pitch_m': 1.25e-5}
    with open(path, 'rb') as f:
        assert f.read().count(b'\r\n') == 3


def test_csv_grid_round_trip_is_exact_for_random_values(tmp_path):
    grid = np.random.default_rng(3).normal(size=(100, 100)) * 1e-3
    loaded, _ = read_grid_csv(write_grid_csv(str(tmp_path / "random.csv"), grid))
    assert (loaded != grid).sum() == 0


def test_pgm_is_16_bit_and_scaled(tmp_path):
    grid = np.array([[0.0, 1.0], [2.0, 2.5]])
    path = write_pgm(str(tmp_path / "frame.pgm"), grid, full_scale=2.0, meta={'pitch_m': 1e-5})
    with open(path, 'rb') as f:
        assert f.read(3) == b'P5\n'
    values, meta = read_pgm(path, full_scale=2.0)
    assert meta['pitch_m'] == 1e-5
    np.testing.assert_allclose(values, [[0.0, 1.0], [2.0, 2.0]], atol=2.0 / PGM_MAXVAL)


def test_frame_round_trip_and_checksums(tmp_path):
    frame = CameraFrame(np.linspace(0, 2, 12).reshape(3, 4), 7e-6, 1.5)
    entry = save_frame(frame, str(tmp_path / "frame_000"))
    assert entry['csv'] == 'frame_000.csv'
    assert entry['sha256_csv'] == sha256_file(str(tmp_path / entry['csv']))

    loaded = load_frame(str(tmp_path / entry['csv']))
    np.testing.assert_array_equal(loaded.grid, frame.grid)
    assert loaded.pitch == 7e-6
    assert loaded.phase_tag == 1.5

    assert verify_entry(str(tmp_path), entry['pgm'], entry['sha256_pgm']).endswith('frame_000.pgm')
    with pytest.raises(ValidationError):
        verify_entry(str(tmp_path), entry['pgm'], '0' * 64)
    with pytest.raises(ValidationError):
        verify_entry(str(tmp_path), 'missing.csv', entry['sha256_csv'])


def test_saving_twice_gives_identical_bytes(tmp_path):
    frame = CameraFrame(np.random.default_rng(3).random((8, 8)), 5e-6, 0.25)
    first = save_frame(frame, str(tmp_path / "a"))
    second = save_frame(frame, str(tmp_path / "b"))
    assert first['sha256_csv'] == second['sha256_csv']
    assert first['sha256_pgm'] == second['sha256_pgm']


def test_object_loading(tmp_path):
    obj = synthetic_object('patch', (8, 8), 1e-5, magnitude=0.5, phase_rad=0.4)
    save_object(obj, str(tmp_path / "mag.csv"), str(tmp_path / "phase.csv"))
    loaded = load_object(str(tmp_path / "mag.csv"), str(tmp_path / "phase.csv"))
    np.testing.assert_allclose(loaded.grid, obj.grid, atol=1e-15)
    assert loaded.pitch == 1e-5

    write_pgm(str(tmp_path / "mask.pgm"), obj.magnitude, full_scale=1.0)
    from_pgm = load_object(str(tmp_path / "mask.pgm"), pitch=2e-5)
    np.testing.assert_allclose(from_pgm.magnitude, obj.magnitude, atol=1.0 / PGM_MAXVAL)

    with pytest.raises(ValidationError):
        load_object(str(tmp_path / "mask.pgm"))


def test_bad_inputs(tmp_path):
    with pytest.raises(ValidationError):
        read_grid_csv(str(tmp_path / "nothing.csv"))
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b'P2\n2 2\n255\n0 0 0 0\n')
    with pytest.raises(ValidationError):
        read_pgm(str(bad))
    broken = tmp_path / "broken.json"
    broken.write_text('{"frames": [')
    with pytest.raises(ValidationError):
        read_json(str(broken))


def test_json_is_sorted(tmp_path):
    path = write_json(str(tmp_path / "m.json"), {'b': 1, 'a': [1, 2]})
    assert read_json(path) == {'a': [1, 2], 'b': 1}
    assert open(path).read().index('"a"') < open(path).read().index('"b"')


def test_phase_helpers():
    assert wrap_phase(np.pi) == pytest.approx(np.pi)
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert wrap_phase(3 * np.pi / 2) == pytest.approx(-np.pi / 2)

    truth = np.zeros((10, 10))
    estimate = truth + 0.3
    assert phase_rms(estimate, truth) == pytest.approx(0.0, abs=1e-12)
    assert phase_rms(estimate, truth, remove_piston=False) == pytest.approx(0.3)

    border = np.zeros((10, 10))
    border[0, :] = 1.0
    assert rms(border, guard=1) == 0.0
    assert crop_guard(border, 2).shape == (6, 6)
    with pytest.raises(ValueError):
        crop_guard(border, 5)


def test_robust_statistics():
    values = [1.0] * 20 + [100.0]
    stats = robust_statistics(values)
    assert stats['count'] == 21
    assert stats['filtered_count'] == 20
    assert stats['max'] == 1.0
    raw = robust_statistics(values, remove_outliers=False)
    assert raw['max'] == 100.0
    zscore = robust_statistics(values, outlier_method='zscore')
    assert zscore['filtered_count'] == 20
    assert zscore['avg'] == 1.0
    with pytest.raises(ValueError):
        robust_statistics(values, outlier_method='mad')
    assert robust_statistics([])['count'] == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
