"""
Fock Oracle
Brute-force state-vector simulator restricted to one signal excitation and one
idler-or-loss excitation. Used to verify every closed-form count rate.

The state is held as an amplitude matrix A[signal_mode, idler_mode]; optical
elements act as 2x2 unitaries on the rows (signal side) or the columns
(idler side). Sources add amplitude coherently into their pair mode.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import OracleMismatchError, QiupError, ValidationError
from .interferometer import (
    MZPort, Transmittance, ZWMPort, mz_count_rate, su11_count_rate,
    two_particle_coincidence_rate, two_particle_rates, zwm_count_rate,
)

ModeIndex = int

# Mode labels used by the network builders. Mode 0 is the idler loss ancilla.
LOSS = 0
S1 = 1
S2 = 2
I1 = 3
I2 = 4
SIGNAL_LOSS = 5
HERALD = 6

_NORM_TOLERANCE = 1e-12

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Source:
    """Pair source emitting into (signal_mode, idler_mode) with a complex weight"""
    signal_mode: ModeIndex
    idler_mode: ModeIndex
    weight: complex


@dataclass(frozen=True)
class BeamSplitter:
    """50:50 beam splitter: a -> (a + i b)/sqrt2, b -> (b + i a)/sqrt2"""
    mode_a: ModeIndex
    mode_b: ModeIndex


@dataclass(frozen=True)
class Phase:
    """Phase shift a -> a e^{i phi}"""
    mode: ModeIndex
    phi: float


@dataclass(frozen=True)
class ObjectElement:
    """Object acting as a beam splitter between a path and its loss ancilla"""
    mode: ModeIndex
    loss_mode: ModeIndex
    t: Transmittance


NetworkElement = Union[Source, BeamSplitter, Phase, ObjectElement]


@dataclass
class PairState:
    """Pair amplitudes over (signal mode, idler mode)"""
    signal_modes: Tuple[ModeIndex, ...]
    idler_modes: Tuple[ModeIndex, ...]
    matrix: np.ndarray
    reference_flux: float = 1.0

    @property
    def amplitudes(self) -> Dict[Tuple[ModeIndex, ModeIndex], complex]:
        return {
            (s, i): complex(self.matrix[a, b])
            for a, s in enumerate(self.signal_modes)
            for b, i in enumerate(self.idler_modes)
            if self.matrix[a, b] != 0
        }

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    def amplitude(self, signal_mode: ModeIndex, idler_mode: ModeIndex) -> complex:
        return complex(self.matrix[self._signal_row(signal_mode), self._idler_col(idler_mode)])

    def _signal_row(self, mode: ModeIndex) -> int:
        try:
            return self.signal_modes.index(mode)
        except ValueError:
            raise ValidationError(f"unknown signal mode {mode}") from None

    def _idler_col(self, mode: ModeIndex) -> int:
        try:
            return self.idler_modes.index(mode)
        except ValueError:
            raise ValidationError(f"unknown idler mode {mode}") from None


def _two_mode_unitary(element) -> Tuple[ModeIndex, ModeIndex, np.ndarray]:
    if isinstance(element, BeamSplitter):
        u = np.array([[1.0, 1j], [1j, 1.0]]) / math.sqrt(2.0)
        return element.mode_a, element.mode_b, u
    t = element.t
    r = math.sqrt(max(0.0, 1.0 - t.magnitude ** 2))
    u = np.array([[t.value, 1j * r], [1j * r, np.conj(t.value)]])
    return element.mode, element.loss_mode, u


def build_state(elements: Sequence[NetworkElement],
                signal_modes: Iterable[ModeIndex],
                idler_modes: Iterable[ModeIndex]) -> PairState:
    """Apply the elements in order to the empty pair state"""
    signal_modes = tuple(signal_modes)
    idler_modes = tuple(idler_modes)
    if len(set(signal_modes) | set(idler_modes)) != len(signal_modes) + len(idler_modes):
        raise ValidationError("mode labels must be unique within a network")

    sources = [e for e in elements if isinstance(e, Source)]
    total_weight = sum(abs(s.weight) ** 2 for s in sources)
    if not sources or abs(total_weight - 1.0) > _NORM_TOLERANCE:
        raise ValidationError(f"source weights must satisfy sum |alpha|^2 = 1, got {total_weight:.15g}")

    state = PairState(signal_modes, idler_modes,
                      np.zeros((len(signal_modes), len(idler_modes)), dtype=complex))

    fed: Dict[Tuple[ModeIndex, ModeIndex], float] = {}
    shared_pair_mode = False
    for element in elements:
        if isinstance(element, Source):
            row = state._signal_row(element.signal_mode)
            col = state._idler_col(element.idler_mode)
            key = (element.signal_mode, element.idler_mode)
            shared_pair_mode = shared_pair_mode or key in fed
            fed[key] = fed.get(key, 0.0) + abs(element.weight)
            state.matrix[row, col] += element.weight
            continue

        before = state.norm
        if isinstance(element, Phase):
            if element.mode in signal_modes:
                state.matrix[state._signal_row(element.mode), :] *= np.exp(1j * element.phi)
            else:
                state.matrix[:, state._idler_col(element.mode)] *= np.exp(1j * element.phi)
        elif isinstance(element, (BeamSplitter, ObjectElement)):
            mode_a, mode_b, u = _two_mode_unitary(element)
            if mode_a in signal_modes and mode_b in signal_modes:
                rows = [state._signal_row(mode_a), state._signal_row(mode_b)]
                state.matrix[rows, :] = u @ state.matrix[rows, :]
            elif mode_a in idler_modes and mode_b in idler_modes:
                cols = [state._idler_col(mode_a), state._idler_col(mode_b)]
                state.matrix[:, cols] = state.matrix[:, cols] @ u.T
            else:
                raise ValidationError(f"element {element} must act on two declared modes of one photon")
        else:
            raise ValidationError(f"unsupported network element {element!r}")

        if abs(state.norm - before) > _NORM_TOLERANCE:
            raise QiupError(f"norm drift {state.norm - before:.3e} at {element}")

    state.reference_flux = float(sum(w * w for w in fed.values()))
    if not shared_pair_mode and abs(state.norm - 1.0) > _NORM_TOLERANCE:
        raise QiupError(f"final state norm {state.norm:.15g} differs from 1")
    return state


def detector_rate(state: PairState, signal_mode: ModeIndex) -> float:
    """Singles rate at a signal detector with all idler modes left undetected"""
    row = state._signal_row(signal_mode)
    return float(np.sum(np.abs(state.matrix[row, :]) ** 2)) / state.reference_flux


def coincidence_rate(state: PairState, signal_mode: ModeIndex, idler_mode: ModeIndex) -> float:
    return abs(state.amplitude(signal_mode, idler_mode)) ** 2 / state.reference_flux


# ----------------------------------------------------------------------
# Network builders. Extra fixed phases compensate the reflection phase of
# the beam splitter so that port labels match the closed forms.
# ----------------------------------------------------------------------

def mz_network(t: Transmittance, phi: float) -> PairState:
    """Single photon (heralded by an idle partner) through a Mach-Zehnder; ports A=S1, B=S2"""
    elements = [
        Source(S1, HERALD, 1.0),
        BeamSplitter(S1, S2),
        Phase(S1, phi + math.pi),
        ObjectElement(S2, SIGNAL_LOSS, t),
        BeamSplitter(S1, S2),
    ]
    return build_state(elements, (S1, S2, SIGNAL_LOSS), (HERALD,))


def zwm_network(t: Transmittance, phi: float) -> PairState:
    """Two sources sharing one idler mode; the object sits between them"""
    amplitude = 1.0 / math.sqrt(2.0)
    elements = [
        Source(S1, I1, amplitude),
        ObjectElement(I1, LOSS, t),
        Source(S2, I1, amplitude),
        Phase(S2, -phi - math.pi / 2.0),
        BeamSplitter(S1, S2),
    ]
    return build_state(elements, (S1, S2), (I1, LOSS))


def su11_network(t: Transmittance, phi: float) -> PairState:
    """Two sources in series; signal and idler of the first seed the second"""
    amplitude = 1.0 / math.sqrt(2.0)
    elements = [
        Source(S1, I1, amplitude),
        Phase(S1, phi),
        ObjectElement(I1, LOSS, t),
        Source(S1, I1, amplitude),
    ]
    return build_state(elements, (S1,), (I1, LOSS))


def two_particle_network(t: Transmittance, phi: float) -> PairState:
    """Two sources with separate idler modes recombined on a second beam splitter"""
    amplitude = 1.0 / math.sqrt(2.0)
    elements = [
        Source(S1, I1, amplitude),
        ObjectElement(I1, LOSS, t),
        Source(S2, I2, amplitude),
        Phase(S2, math.pi - phi),
        BeamSplitter(S1, S2),
        BeamSplitter(I1, I2),
    ]
    return build_state(elements, (S1, S2), (I1, I2, LOSS))


# ----------------------------------------------------------------------
# Equivalence suite
# ----------------------------------------------------------------------

@dataclass
class EquivalenceReport:
    """Max |closed form - oracle| per check"""
    deltas: Dict[str, float] = field(default_factory=dict)
    points: int = 0
    tolerance: float = 1e-12

    @property
    def max_delta(self) -> float:
        return max(self.deltas.values()) if self.deltas else 0.0

    @property
    def passed(self) -> bool:
        return self.points > 0 and self.max_delta <= self.tolerance

    def to_dict(self) -> dict:
        return {
            'points': self.points,
            'tolerance': self.tolerance,
            'max_delta': self.max_delta,
            'passed': self.passed,
            'deltas': dict(self.deltas),
        }


def default_grid(n_magnitude: int = 10, n_phi: int = 10, n_gamma: int = 4):
    """(|T|, phi, gamma) axes of the equivalence grid"""
    return (np.linspace(0.0, 1.0, n_magnitude),
            np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False),
            np.linspace(0.0, 2.0 * math.pi, n_gamma, endpoint=False))


def run_equivalence_suite(magnitudes: Sequence[float], phis: Sequence[float], gammas: Sequence[float],
                          tolerance: float = 1e-12, perturbation: float = 0.0,
                          log_callback: Optional[Callable] = None) -> EquivalenceReport:
    """Compare every closed form against the oracle on the full grid.

    perturbation is added to the closed forms; a nonzero value is a harness
    self-test that must make the suite fail.
    """
    if len(magnitudes) == 0 or len(phis) == 0 or len(gammas) == 0:
        raise ValidationError("equivalence grid axes must not be empty")

    report = EquivalenceReport(tolerance=tolerance)

    def record(name: str, closed: float, oracle: float):
        delta = abs(closed + perturbation - oracle)
        if delta > report.deltas.get(name, -1.0):
            report.deltas[name] = delta

    for magnitude in magnitudes:
        for gamma in gammas:
            t = Transmittance(float(magnitude), float(gamma))
            for phi in phis:
                phi = float(phi)
                state = mz_network(t, phi)
                record('mz_A', mz_count_rate(t, phi, MZPort.A), detector_rate(state, S1))
                record('mz_B', mz_count_rate(t, phi, MZPort.B), detector_rate(state, S2))

                state = zwm_network(t, phi)
                record('zwm_S1', zwm_count_rate(t, phi, ZWMPort.S1), detector_rate(state, S1))
                record('zwm_S2', zwm_count_rate(t, phi, ZWMPort.S2), detector_rate(state, S2))

                state = su11_network(t, phi)
                record('su11_signal', su11_count_rate(t, phi), detector_rate(state, S1))

                state = two_particle_network(t, phi)
                singles, _ = two_particle_rates(t, phi)
                record('two_particle_singles_S1', singles, detector_rate(state, S1))
                record('two_particle_singles_S2', singles, detector_rate(state, S2))
                for s_port, s_mode in ((1, S1), (2, S2)):
                    for i_port, i_mode in ((1, I1), (2, I2)):
                        record(f'two_particle_coincidence_{s_port}{i_port}',
                               two_particle_coincidence_rate(t, phi, s_port, i_port),
                               coincidence_rate(state, s_mode, i_mode))
                report.points += 1

    log = log_callback or (lambda message, level="info": logger.info(message))
    log(f"Oracle suite: {report.points} grid points, max delta {report.max_delta:.3e}", "info")
    return report


def check_equivalence(magnitudes, phis, gammas, tolerance: float = 1e-12,
                      perturbation: float = 0.0, log_callback: Optional[Callable] = None) -> EquivalenceReport:
    """Run the suite and raise OracleMismatchError when any delta exceeds tolerance"""
    report = run_equivalence_suite(magnitudes, phis, gammas, tolerance, perturbation, log_callback)
    if not report.passed:
        worst = max(report.deltas, key=report.deltas.get)
        raise OracleMismatchError(
            f"closed forms disagree with oracle: max delta {report.max_delta:.3e} ({worst})",
            report.to_dict())
    return report
