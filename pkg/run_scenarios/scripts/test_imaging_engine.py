#!/usr/bin/env python3
"""
Frame synthesis: edge spread, magnification, null cases and numerics
"""

import math
import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from services.biphoton import CrystalModel, GaussianPumpModel
from services.design_analytics import blur_sigma_mc, esf_mc, fit_edge_spread, resolution_mc, two_point_beta
from services.errors import NumericalPreconditionError, ValidationError
from services.imaging_engine import (ImagingEngine, add_shot_noise, simulate_frame_mc, simulate_frame_mc_ideal,
                                     simulate_frame_pc)
from services.imaging_types import CameraFrame, CorrelationModel, GeometryMC, GeometryPC, ObjectMap
from services.objects import synthetic_object
from services.reconstruction import visibility_map

PITCH = 20e-6
SHAPE = (256, 256)
PUMP = GaussianPumpModel(119e-6)
FUENZALIDA = GeometryMC(75e-3, 75e-3, 810e-9, 1550e-9, PUMP)
EIGHT_PHASES = [2 * math.pi * j / 8 for j in range(8)]


def log_callback(msg, level="info"):
    print(f"[{level.upper()}] {msg}")


@pytest.fixture(scope="module")
def engine():
    return ImagingEngine(log_callback=log_callback)


@pytest.fixture(scope="module")
def knife_edge():
    return synthetic_object('knife_edge', SHAPE, PITCH)


def _edge_profile(engine, obj, g):
    frames = engine.simulate_stack(obj, g, EIGHT_PHASES)
    row = SHAPE[0] // 2
    x_c = frames[0].axes()[1]
    return x_c, visibility_map(frames)[row]


def test_knife_edge_matches_erfc(engine, knife_edge):
    x_c, profile = _edge_profile(engine, knife_edge, FUENZALIDA)
    expected = esf_mc(x_c, 0.0, FUENZALIDA)
    assert np.max(np.abs(profile - expected)) <= 0.01 * (expected.max() - expected.min())

    fit = fit_edge_spread(x_c, profile)
    assert fit.sigma == pytest.approx(blur_sigma_mc(FUENZALIDA), rel=0.02)


@pytest.mark.parametrize("lambda_idler", [1.2e-6, 1.55e-6, 2.0e-6])
def test_resolution_scales_with_idler_wavelength(engine, knife_edge, lambda_idler):
    g = GeometryMC(75e-3, 75e-3, 810e-9, lambda_idler, PUMP)
    x_c, profile = _edge_profile(engine, knife_edge, g)
    sigma_object = fit_edge_spread(x_c, profile).sigma / g.magnification
    assert sigma_object == pytest.approx(resolution_mc(g)[0], rel=0.02)


@pytest.mark.parametrize("waist", [100e-6, 119e-6, 150e-6])
def test_resolution_scales_inversely_with_pump_waist(engine, knife_edge, waist):
    g = GeometryMC(75e-3, 75e-3, 810e-9, 1550e-9, GaussianPumpModel(waist))
    x_c, profile = _edge_profile(engine, knife_edge, g)
    sigma_object = fit_edge_spread(x_c, profile).sigma / g.magnification
    assert sigma_object == pytest.approx(resolution_mc(g)[0], rel=0.02)


def _absorption_centroid(frames, center_x, half_window):
    absorption = 1.0 - visibility_map(frames)
    y, x = frames[0].axes()
    window = (np.abs(x[None, :] - center_x) < half_window) & (np.abs(y[:, None]) < half_window)
    absorption = np.where(window, absorption, 0.0)
    total = absorption.sum()
    return float((absorption * x[None, :]).sum() / total), float((absorption * y[:, None]).sum() / total)


def test_dot_centroid_follows_mc_magnification(engine):
    obj = synthetic_object('dot', SHAPE, PITCH, center_x_m=0.8e-3, radius_m=100e-6)
    g = GeometryMC(100e-3, 150e-3, 810e-9, 1550e-9, PUMP)
    frames = engine.simulate_stack(obj, g, EIGHT_PHASES)
    expected = g.magnification * 0.8e-3
    cx, cy = _absorption_centroid(frames, expected, g.magnification * 1.0e-3)
    assert g.magnification == pytest.approx(0.15 * 810e-9 / (0.1 * 1550e-9))
    assert abs(cx - expected) <= frames[0].pitch
    assert abs(cy) <= frames[0].pitch


def test_dot_centroid_follows_pc_magnification(engine):
    crystal = CrystalModel(2e-3, 1.0, 1.0, 810e-9, 1550e-9)
    g = GeometryPC(2.0, 1.0, crystal)
    obj = synthetic_object('dot', (128, 128), 4e-6, center_x_m=100e-6, radius_m=20e-6)
    frames = engine.simulate_stack(obj, g, EIGHT_PHASES)
    cx, _ = _absorption_centroid(frames, 2.0 * 100e-6, 2.0 * 120e-6)
    assert abs(cx - 2.0 * 100e-6) <= frames[0].pitch


@pytest.mark.parametrize("lambda_signal", [700e-9, 810e-9, 950e-9])
def test_dot_position_follows_wavelength_ratio(engine, lambda_signal):
    obj = synthetic_object('dot', SHAPE, PITCH, center_x_m=0.8e-3, radius_m=100e-6)
    g = GeometryMC(75e-3, 75e-3, lambda_signal, 1550e-9, PUMP)
    camera_pitch = 10e-6
    frames = engine.simulate_stack(obj, g, EIGHT_PHASES, camera_shape=SHAPE, camera_pitch=camera_pitch)
    expected = g.magnification * 0.8e-3
    cx, _ = _absorption_centroid(frames, expected, g.magnification * 1.0e-3)
    assert abs(cx - expected) <= camera_pitch


def test_larger_wavelength_ratio_gives_larger_image(engine):
    obj = synthetic_object('dot', SHAPE, PITCH, center_x_m=0.8e-3, radius_m=100e-6)
    positions = []
    for lambda_signal in (700e-9, 810e-9, 950e-9):
        g = GeometryMC(75e-3, 75e-3, lambda_signal, 1550e-9, PUMP)
        frames = engine.simulate_stack(obj, g, EIGHT_PHASES, camera_shape=SHAPE, camera_pitch=10e-6)
        positions.append(_absorption_centroid(frames, g.magnification * 0.8e-3, g.magnification * 1.0e-3)[0])
    assert positions[0] < positions[1] < positions[2]


def test_two_pinhole_dip_matches_closed_form(engine):
    crystal = CrystalModel(2e-3, 1.0, 1.0, 810e-9, 1550e-9)
    g = GeometryPC(1.0, 1.0, crystal)
    obj = synthetic_object('two_pinholes', (201, 201), 1e-6, separation_m=70e-6)
    row = visibility_map(engine.simulate_stack(obj, g, EIGHT_PHASES))[100]
    beta = row[100] / row.max()
    assert beta == pytest.approx(0.08, abs=0.02)
    assert beta == pytest.approx(two_point_beta(70e-6, g), abs=5e-3)


def _delta_limit_errors(engine, obj, geometries):
    errors = []
    for g in geometries:
        general = engine.simulate_stack(obj, g, [0.0])[0].grid
        ideal = engine.simulate_stack(obj, g, [0.0], ideal=True)[0].grid
        errors.append((np.max(np.abs(general - ideal)), np.mean(np.abs(general - ideal))))
    return np.array(errors)


def test_mc_frames_converge_to_ideal_as_waist_grows(engine):
    obj = synthetic_object('knife_edge', SHAPE, 10e-6)
    geometries = [GeometryMC(75e-3, 75e-3, 810e-9, 1550e-9, GaussianPumpModel(w)) for w in (119e-6, 238e-6, 476e-6)]
    errors = _delta_limit_errors(engine, obj, geometries)
    assert np.all(np.diff(errors[:, 0]) < 0)
    assert np.all(np.diff(errors[:, 1]) < 0)


def test_pc_frames_converge_to_ideal_as_crystal_shortens(engine):
    obj = synthetic_object('knife_edge', (128, 128), 2e-6)
    geometries = [GeometryPC(1.0, 1.0, CrystalModel(length, 1.0, 1.0, 810e-9, 1550e-9))
                  for length in (2e-3, 1e-3, 0.5e-3)]
    errors = _delta_limit_errors(engine, obj, geometries)
    assert np.all(np.diff(errors[:, 0]) < 0)
    assert np.all(np.diff(errors[:, 1]) < 0)


def test_separable_correlation_gives_flat_frames(engine):
    obj = synthetic_object('cat', (64, 64), PITCH)
    g = GeometryMC(75e-3, 75e-3, 810e-9, 1550e-9, PUMP, correlation=CorrelationModel.SEPARABLE)
    frames = engine.simulate_stack(obj, g, EIGHT_PHASES)
    stack = np.stack([f.grid for f in frames])
    assert np.max(stack.max(axis=0) - stack.min(axis=0)) <= 1e-9
    np.testing.assert_allclose(stack, 1.0, atol=1e-12)


def test_complementary_frames_sum_to_two(engine):
    obj = synthetic_object('cat', (96, 96), PITCH)
    for phi in (0.0, 0.7, 2.0):
        a = simulate_frame_mc(obj, FUENZALIDA.with_phase(phi))
        b = simulate_frame_mc(obj, FUENZALIDA.with_phase(phi + math.pi))
        assert np.max(np.abs(a.grid + b.grid - 2.0)) <= 1e-12


def test_opaque_and_empty_objects():
    opaque = synthetic_object('opaque', (32, 32), PITCH)
    frame = simulate_frame_mc(opaque, FUENZALIDA.with_phase(1.3))
    np.testing.assert_array_equal(frame.grid, np.ones((32, 32)))

    empty = synthetic_object('empty', (32, 32), PITCH)
    for phi in (0.0, math.pi / 3):
        frame = simulate_frame_mc(empty, FUENZALIDA.with_phase(phi))
        np.testing.assert_allclose(frame.grid, 1.0 + math.cos(phi), atol=1e-12)


def test_ideal_frame_follows_transmittance():
    obj = synthetic_object('patch', (32, 32), PITCH, magnitude=0.3, phase_rad=0.5)
    frame = simulate_frame_mc_ideal(obj, FUENZALIDA.with_phase(0.5))
    centre = frame.grid[16, 16]
    assert centre == pytest.approx(1.0 + 0.3, abs=1e-12)
    assert frame.grid[0, 0] == pytest.approx(1.0 + math.cos(0.5), abs=1e-12)


def test_coarse_object_violates_sampling():
    obj = synthetic_object('empty', (32, 32), 200e-6)
    with pytest.raises(NumericalPreconditionError):
        simulate_frame_mc(obj, FUENZALIDA)
    crystal = CrystalModel(2e-3, 1.0, 1.0, 810e-9, 1550e-9)
    with pytest.raises(NumericalPreconditionError):
        simulate_frame_pc(obj, GeometryPC(1.0, 1.0, crystal))


def test_hermite_quadrature_agrees_with_convolution():
    obj = synthetic_object('phase_bump', (96, 96), PITCH, amplitude_rad=1.0, width_m=15 * PITCH)
    convolution = ImagingEngine({'quadrature': 'convolution'}).simulate_frame_mc(obj, FUENZALIDA)
    hermite = ImagingEngine({'quadrature': 'hermite'}).simulate_frame_mc(obj, FUENZALIDA)
    inner = (slice(30, 66), slice(30, 66))
    assert np.max(np.abs(convolution.grid[inner] - hermite.grid[inner])) < 1e-2


def test_unknown_quadrature_is_rejected():
    with pytest.raises(ValidationError):
        ImagingEngine({'quadrature': 'simpson'})


def test_pc_phase_maps_enter_the_frame(engine):
    crystal = CrystalModel(2e-3, 1.0, 1.0, 810e-9, 1550e-9)
    obj = synthetic_object('empty', (32, 32), 4e-6)
    flat = GeometryPC(1.0, 1.0, crystal)
    shifted = GeometryPC(1.0, 1.0, crystal, phi_s_map=np.full((32, 32), math.pi))
    a = engine.simulate_frame_pc(obj, flat)
    b = engine.simulate_frame_pc(obj, shifted)
    np.testing.assert_allclose(a.grid + b.grid, 2.0, atol=1e-12)
    with pytest.raises(ValidationError):
        engine.simulate_frame_pc(obj, GeometryPC(1.0, 1.0, crystal, phi_I_map=np.zeros((3, 3))))


def test_shot_noise_is_seeded():
    frame = CameraFrame(np.full((16, 16), 1.5), 1e-5, 0.0)
    a = add_shot_noise(frame, 1e4, seed=7)
    b = add_shot_noise(frame, 1e4, seed=7)
    c = add_shot_noise(frame, 1e4, seed=8)
    np.testing.assert_array_equal(a.grid, b.grid)
    assert not np.array_equal(a.grid, c.grid)
    assert a.grid.mean() == pytest.approx(1.5, rel=0.01)
    with pytest.raises(ValidationError):
        add_shot_noise(frame, 0.0, seed=1)


def test_object_map_validation():
    with pytest.raises(ValidationError):
        ObjectMap(np.full((4, 4), 1.5), 1e-5)
    with pytest.raises(ValidationError):
        synthetic_object('teapot', (4, 4), 1e-5)
    with pytest.raises(ValidationError):
        synthetic_object('two_pinholes', (8, 8), 1e-5)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
