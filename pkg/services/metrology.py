"""
Metrology
Phase sensitivity of linear-plus-squeezing optical networks.

States are Gaussian and tracked by their moments: the mean field m_i = <a_i>,
the normal matrix N_ij = <da_i^dag da_j> and the anomalous matrix
M_ij = <da_i da_j> (da = a - m). Each element acts as the Bogoliubov map
a -> A a + B a^dag + d, which is applied directly to the moments.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import NumericalPreconditionError, ValidationError

_PHYSICALITY_TOLERANCE = 1e-9

logger = logging.getLogger(__name__)


@dataclass
class MomentState:
    """First and second moments of a set of bosonic modes"""
    mean: np.ndarray
    normal: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=complex)
        self.normal = np.asarray(self.normal, dtype=complex)
        self.anomalous = np.asarray(self.anomalous, dtype=complex)
        n = self.mean.shape[0]
        if self.mean.ndim != 1 or self.normal.shape != (n, n) or self.anomalous.shape != (n, n):
            raise ValidationError("moment arrays must be (n,), (n, n) and (n, n)")

    @property
    def modes(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def vacuum(cls, modes: int) -> "MomentState":
        if modes < 1:
            raise ValidationError("at least one mode is required")
        return cls(np.zeros(modes), np.zeros((modes, modes)), np.zeros((modes, modes)))

    @classmethod
    def coherent(cls, alphas: Sequence[complex]) -> "MomentState":
        n = len(alphas)
        return cls(np.asarray(alphas, dtype=complex), np.zeros((n, n)), np.zeros((n, n)))

    def photon_numbers(self) -> np.ndarray:
        return np.abs(self.mean) ** 2 + np.real(np.diag(self.normal))

    def total_photons(self) -> float:
        return float(np.sum(self.photon_numbers()))

    def validate(self):
        """Raise ValidationError for unphysical second moments"""
        if not np.allclose(self.normal, self.normal.conj().T, atol=_PHYSICALITY_TOLERANCE):
            raise ValidationError("normal moment matrix must be Hermitian")
        if not np.allclose(self.anomalous, self.anomalous.T, atol=_PHYSICALITY_TOLERANCE):
            raise ValidationError("anomalous moment matrix must be symmetric")
        if np.linalg.eigvalsh(self.normal).min() < -_PHYSICALITY_TOLERANCE:
            raise ValidationError("normal moment matrix must be positive semidefinite")
        # full uncertainty relation: [[N^T + 1, M], [M^*, N]] >= 0
        n = self.modes
        block = np.block([[self.normal.T + np.eye(n), self.anomalous],
                          [self.anomalous.conj(), self.normal]])
        if np.linalg.eigvalsh((block + block.conj().T) / 2.0).min() < -_PHYSICALITY_TOLERANCE:
            raise ValidationError("moments violate the uncertainty relation")


# ----------------------------------------------------------------------
# Network elements
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BeamSplitter:
    """a_i -> (a_i + i a_j)/sqrt2, a_j -> (a_j + i a_i)/sqrt2"""
    i: int
    j: int


@dataclass(frozen=True)
class Phase:
    i: int
    phi: float


@dataclass(frozen=True)
class Squeeze:
    """a -> a cosh r - a^dag e^{i theta} sinh r"""
    i: int
    r: float
    theta: float = 0.0


@dataclass(frozen=True)
class TwoModeSqueeze:
    """a -> a cosh r - b^dag e^{i theta} sinh r (and a <-> b)"""
    i: int
    j: int
    r: float
    theta: float = 0.0


@dataclass(frozen=True)
class Displace:
    i: int
    alpha: complex


NetworkOp = Union[BeamSplitter, Phase, Squeeze, TwoModeSqueeze, Displace]


@dataclass(frozen=True)
class Intensity:
    mode: int


@dataclass(frozen=True)
class IntensityDifference:
    """n_a - n_b"""
    mode_a: int
    mode_b: int


@dataclass(frozen=True)
class IntensitySum:
    mode_a: int
    mode_b: int


DetectionScheme = Union[Intensity, IntensityDifference, IntensitySum]


def _check_index(n: int, *indices: int):
    for idx in indices:
        if not 0 <= idx < n:
            raise ValidationError(f"mode index {idx} outside 0..{n - 1}")
    if len(set(indices)) != len(indices):
        raise ValidationError(f"mode indices must be distinct: {indices}")


def _bogoliubov(op: NetworkOp, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.eye(n, dtype=complex)
    b = np.zeros((n, n), dtype=complex)
    d = np.zeros(n, dtype=complex)
    if isinstance(op, BeamSplitter):
        _check_index(n, op.i, op.j)
        s = 1.0 / math.sqrt(2.0)
        a[op.i, op.i] = a[op.j, op.j] = s
        a[op.i, op.j] = a[op.j, op.i] = 1j * s
    elif isinstance(op, Phase):
        _check_index(n, op.i)
        a[op.i, op.i] = np.exp(1j * op.phi)
    elif isinstance(op, Squeeze):
        _check_index(n, op.i)
        if op.r < 0:
            raise ValidationError("squeezing parameter must be nonnegative")
        a[op.i, op.i] = math.cosh(op.r)
        b[op.i, op.i] = -np.exp(1j * op.theta) * math.sinh(op.r)
    elif isinstance(op, TwoModeSqueeze):
        _check_index(n, op.i, op.j)
        if op.r < 0:
            raise ValidationError("squeezing parameter must be nonnegative")
        a[op.i, op.i] = a[op.j, op.j] = math.cosh(op.r)
        b[op.i, op.j] = b[op.j, op.i] = -np.exp(1j * op.theta) * math.sinh(op.r)
    elif isinstance(op, Displace):
        _check_index(n, op.i)
        d[op.i] = op.alpha
    else:
        raise ValidationError(f"unsupported network op {op!r}")
    return a, b, d


def apply_op(state: MomentState, op: NetworkOp) -> MomentState:
    """Transform moments by one element"""
    a, b, d = _bogoliubov(op, state.modes)
    eye = np.eye(state.modes)
    n, m = state.normal, state.anomalous
    mean = a @ state.mean + b @ state.mean.conj() + d
    normal = (a.conj() @ n @ a.T + a.conj() @ m.conj() @ b.T
              + b.conj() @ m @ a.T + b.conj() @ (eye + n.T) @ b.T)
    anomalous = (a @ m @ a.T + a @ (eye + n.T) @ b.T
                 + b @ n @ a.T + b @ m.conj() @ b.T)
    return MomentState(mean, normal, anomalous)


def propagate(state: MomentState, ops: Sequence[NetworkOp]) -> MomentState:
    """Apply the network ops in order"""
    state.validate()
    for op in ops:
        state = apply_op(state, op)
    return state


# ----------------------------------------------------------------------
# Observables
# ----------------------------------------------------------------------

def _coefficients(det: DetectionScheme, n: int) -> np.ndarray:
    c = np.zeros(n)
    if isinstance(det, Intensity):
        _check_index(n, det.mode)
        c[det.mode] = 1.0
    elif isinstance(det, IntensityDifference):
        _check_index(n, det.mode_a, det.mode_b)
        c[det.mode_a], c[det.mode_b] = 1.0, -1.0
    elif isinstance(det, IntensitySum):
        _check_index(n, det.mode_a, det.mode_b)
        c[det.mode_a], c[det.mode_b] = 1.0, 1.0
    else:
        raise ValidationError(f"unsupported detection scheme {det!r}")
    return c


def intensity_covariance(state: MomentState) -> np.ndarray:
    """Cov(n_k, n_l) from Gaussian moment factorization"""
    m, n_mat, a_mat = state.mean, state.normal, state.anomalous
    eye = np.eye(state.modes)
    outer_conj = np.outer(m.conj(), m.conj())
    cov = (np.abs(a_mat) ** 2
           + n_mat * (eye + n_mat.conj())
           + 2.0 * np.real(outer_conj * a_mat)
           + np.outer(m.conj(), m) * (eye + n_mat.conj())
           + np.outer(m, m.conj()) * n_mat)
    return np.real(cov)


def observable_stats(state: MomentState, det: DetectionScheme) -> Tuple[float, float]:
    """(<M>, Delta M) for a linear combination of photon numbers"""
    c = _coefficients(det, state.modes)
    mean = float(c @ state.photon_numbers())
    variance = float(c @ intensity_covariance(state) @ c)
    return mean, math.sqrt(max(variance, 0.0))


# ----------------------------------------------------------------------
# Sensitivity
# ----------------------------------------------------------------------

NetworkBuilder = Callable[[float], Sequence[NetworkOp]]


def _mean_at(builder: NetworkBuilder, state: MomentState, det: DetectionScheme, phi: float) -> float:
    return observable_stats(propagate(state, builder(phi)), det)[0]


def phase_slope(builder: NetworkBuilder, state: MomentState, det: DetectionScheme, phi0: float,
                step: float = 1e-5) -> float:
    """d<M>/dphi by central differences with one Richardson refinement"""
    def central(h):
        return (_mean_at(builder, state, det, phi0 + h) - _mean_at(builder, state, det, phi0 - h)) / (2.0 * h)
    coarse = central(step)
    fine = central(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def min_phase(network_builder: NetworkBuilder, input_state: MomentState, det: DetectionScheme,
              phi0: float, step: float = 1e-5, slope_factor: float = 1e-9) -> float:
    """Minimum detectable phase Delta M / |d<M>/dphi| at phi0"""
    _, spread = observable_stats(propagate(input_state, network_builder(phi0)), det)
    slope = phase_slope(network_builder, input_state, det, phi0, step)
    if abs(slope) < slope_factor * spread or slope == 0.0:
        raise NumericalPreconditionError(
            f"signal slope {slope:.3e} vanishes at phi0={phi0:.6f} (Delta M = {spread:.3e}); "
            f"choose another operating point")
    return spread / abs(slope)


def shot_noise_limit(n_bar: float) -> float:
    if not n_bar > 0:
        raise ValidationError(f"mean photon number must be positive, got {n_bar}")
    return 1.0 / math.sqrt(n_bar)


def heisenberg_limit(n_bar: float) -> float:
    if not n_bar > 0:
        raise ValidationError(f"mean photon number must be positive, got {n_bar}")
    return 1.0 / n_bar


def zwm_boosted_sensitivity(r: float, beta: float) -> float:
    """High, equal gain induced-coherence sensitivity with a coherent seed of amplitude beta"""
    if r < 0:
        raise ValidationError(f"squeezing parameter must be nonnegative, got {r}")
    return math.sqrt(math.exp(-2.0 * r) / (4.0 * (1.0 + beta * beta)))


# ----------------------------------------------------------------------
# Network builders
# ----------------------------------------------------------------------

def mz_network_ops(phi: float) -> List[NetworkOp]:
    """Mach-Zehnder on modes (0, 1) with the phase in mode 0; read out n_1 - n_0"""
    return [BeamSplitter(0, 1), Phase(0, phi), BeamSplitter(0, 1)]


def zwm_network_ops(r: float, r2: Optional[float] = None, seed: complex = 0.0) -> NetworkBuilder:
    """Induced-coherence network on modes (S1=0, I=1, S2=2) with the sample phase in the idler.

    An optional coherent seed is injected into S1 before the first source.
    """
    r2 = r if r2 is None else r2

    def build(phi: float) -> List[NetworkOp]:
        ops: List[NetworkOp] = []
        if seed:
            ops.append(Displace(0, seed))
        ops += [TwoModeSqueeze(0, 1, r), Phase(1, phi), TwoModeSqueeze(2, 1, r2), BeamSplitter(0, 2)]
        return ops

    return build


def sweep_reference_photons(r: float, beta: float) -> float:
    """Photon budget used for the sweep references: seed plus both spontaneous signals"""
    return beta * beta + 2.0 * math.sinh(r) ** 2


def metrology_sweep(r_values: Sequence[float], beta_values: Sequence[float]) -> pd.DataFrame:
    """Sensitivity table over (r, beta) with shot-noise and Heisenberg references"""
    if len(r_values) == 0 or len(beta_values) == 0:
        raise ValidationError("sweep axes must not be empty")
    rows = []
    for r in r_values:
        for beta in beta_values:
            n_bar = sweep_reference_photons(float(r), float(beta))
            rows.append({
                'r': float(r),
                'beta': float(beta),
                'delta_phi_min': zwm_boosted_sensitivity(float(r), float(beta)),
                'shot_noise_reference': shot_noise_limit(n_bar) if n_bar > 0 else np.nan,
                'heisenberg_reference': heisenberg_limit(n_bar) if n_bar > 0 else np.nan,
            })
    return pd.DataFrame(rows, columns=['r', 'beta', 'delta_phi_min',
                                       'shot_noise_reference', 'heisenberg_reference'])
