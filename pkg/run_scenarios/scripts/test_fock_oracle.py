#!/usr/bin/env python3
"""
State-vector oracle against the closed-form rates
"""

import math
import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from services.errors import OracleMismatchError, ValidationError
from services.fock_oracle import (HERALD, I1, I2, LOSS, S1, S2, BeamSplitter, Phase, Source, build_state,
                                  check_equivalence, coincidence_rate, default_grid, detector_rate, mz_network,
                                  run_equivalence_suite, su11_network, two_particle_network, zwm_network)
from services.interferometer import Transmittance, zwm_count_rate


def log_callback(msg, level="info"):
    print(f"[{level.upper()}] {msg}")


def test_default_grid_passes():
    report = run_equivalence_suite(*default_grid(), log_callback=log_callback)
    assert report.points == 10 * 10 * 4
    assert report.passed
    assert report.max_delta <= 1e-12
    expected_checks = {'mz_A', 'mz_B', 'zwm_S1', 'zwm_S2', 'su11_signal',
                       'two_particle_singles_S1', 'two_particle_singles_S2',
                       'two_particle_coincidence_11', 'two_particle_coincidence_12',
                       'two_particle_coincidence_21', 'two_particle_coincidence_22'}
    assert set(report.deltas) == expected_checks


def test_perturbed_closed_forms_fail_with_report():
    with pytest.raises(OracleMismatchError) as excinfo:
        check_equivalence(*default_grid(3, 4, 2), perturbation=1e-6)
    report = excinfo.value.report
    assert report['passed'] is False
    assert report['max_delta'] == pytest.approx(1e-6, rel=1e-3)


def test_empty_grid_is_rejected():
    magnitudes, phis, gammas = default_grid()
    with pytest.raises(ValidationError):
        run_equivalence_suite([], phis, gammas)


def test_zwm_state_matches_closed_form_at_examples():
    t = Transmittance(1.0)
    state = zwm_network(t, 0.0)
    assert detector_rate(state, S1) == pytest.approx(1.0, abs=1e-12)
    assert detector_rate(state, S2) == pytest.approx(0.0, abs=1e-12)
    opaque = zwm_network(Transmittance(0.0), 0.4)
    assert detector_rate(opaque, S1) == pytest.approx(0.5, abs=1e-12)
    assert detector_rate(opaque, S1) == pytest.approx(zwm_count_rate(Transmittance(0.0), 0.4), abs=1e-12)


def test_norm_is_conserved():
    t = Transmittance(0.3, 1.0)
    for builder in (mz_network, zwm_network, two_particle_network):
        assert builder(t, 0.9).norm == pytest.approx(1.0, abs=1e-12)


def test_su11_reference_flux():
    state = su11_network(Transmittance(1.0), 0.0)
    assert state.reference_flux == pytest.approx(2.0)
    assert detector_rate(state, S1) == pytest.approx(1.0, abs=1e-12)
    dark = su11_network(Transmittance(1.0), math.pi)
    assert detector_rate(dark, S1) == pytest.approx(0.0, abs=1e-12)


def test_two_particle_coincidences_sum_to_transmitted_flux():
    t = Transmittance(0.5, 0.3)
    state = two_particle_network(t, 1.2)
    total = sum(coincidence_rate(state, s, i) for s in (S1, S2) for i in (I1, I2))
    assert total == pytest.approx((1 + 0.25) / 2, abs=1e-12)


def test_source_weights_must_be_normalized():
    with pytest.raises(ValidationError):
        build_state([Source(S1, I1, 0.5)], (S1,), (I1,))
    with pytest.raises(ValidationError):
        build_state([Source(S1, I1, 1.0)], (S1, S1), (I1,))


def test_beam_splitter_convention():
    state = build_state([Source(S1, HERALD, 1.0), BeamSplitter(S1, S2)], (S1, S2), (HERALD,))
    assert state.amplitude(S1, HERALD) == pytest.approx(1 / math.sqrt(2))
    assert state.amplitude(S2, HERALD) == pytest.approx(1j / math.sqrt(2))
    shifted = build_state([Source(S1, HERALD, 1.0), Phase(S1, math.pi / 2)], (S1,), (HERALD,))
    assert shifted.amplitude(S1, HERALD) == pytest.approx(1j)


def test_loss_mode_collects_absorbed_idler():
    state = zwm_network(Transmittance(0.0), 0.0)
    absorbed = sum(abs(state.amplitude(s, LOSS)) ** 2 for s in (S1, S2))
    assert absorbed == pytest.approx(0.5, abs=1e-12)
    assert np.isclose(state.norm, 1.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
