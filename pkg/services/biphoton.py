"""
Biphoton Correlations
Joint momentum / position densities of the twin photons: analytic Gaussian
models and the generic Fourier-transform route from a sampled joint amplitude.

The Gaussian models factor per transverse dimension, so they are evaluated on
2-D (x, y) problems; only the Fourier route needs a full 4-D grid
ordered (signal x, signal y, idler x, idler y).
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import NumericalPreconditionError, ValidationError

_NORMALIZATION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TransverseMomentum:
    """Transverse wave vector (rad/m)"""
    qx: float
    qy: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.qx) and math.isfinite(self.qy)):
            raise ValidationError("transverse momentum must be finite")

    def __add__(self, other: "TransverseMomentum") -> "TransverseMomentum":
        return TransverseMomentum(self.qx + other.qx, self.qy + other.qy)

    def __neg__(self) -> "TransverseMomentum":
        return TransverseMomentum(-self.qx, -self.qy)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.qx, self.qy)


@dataclass(frozen=True)
class GaussianPumpModel:
    """Gaussian pump of waist w_p (m)"""
    w_p: float

    def __post_init__(self):
        if not (self.w_p > 0 and math.isfinite(self.w_p)):
            raise ValidationError(f"pump waist must be positive, got {self.w_p}")


@dataclass(frozen=True)
class CrystalModel:
    """Nonlinear crystal of length L with refractive indices and vacuum wavelengths"""
    L: float
    n_s: float
    n_I: float
    lambda_s: float
    lambda_I: float

    def __post_init__(self):
        for name in ('L', 'n_s', 'n_I', 'lambda_s', 'lambda_I'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"crystal parameter {name} must be positive, got {value}")

    @property
    def wavelength_sum(self) -> float:
        return self.lambda_s + self.lambda_I

    @property
    def position_exponent(self) -> float:
        """a in exp(-a |rho_s - rho_I|^2)"""
        return 4.0 * math.pi / (self.L * self.wavelength_sum)

    @property
    def correlation_length(self) -> float:
        """Displacement at which the position density falls to 1/e"""
        return math.sqrt(self.L * self.wavelength_sum / (4.0 * math.pi))


@dataclass
class JointMomentumAmplitude:
    """Sampled joint amplitude C on a 4-D grid with equal points per axis"""
    grid: np.ndarray
    dq: Union[float, Tuple[float, float, float, float]]
    normalized: bool = False

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex)
        if self.grid.ndim != 4:
            raise ValidationError("joint amplitude grid must be 4-D (sx, sy, ix, iy)")
        if np.isscalar(self.dq):
            self.dq = (float(self.dq),) * 4
        self.dq = tuple(float(d) for d in self.dq)
        if len(self.dq) != 4 or any(d <= 0 for d in self.dq):
            raise ValidationError("dq must be four positive spacings")
        if self.normalized and abs(self.total_probability() - 1.0) > _NORMALIZATION_TOLERANCE:
            raise ValidationError(f"amplitude flagged normalized but integrates to {self.total_probability():.8f}")

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dq))

    def total_probability(self) -> float:
        return float(np.sum(np.abs(self.grid) ** 2) * self.cell_volume)

    def normalize(self) -> "JointMomentumAmplitude":
        total = self.total_probability()
        if total <= 0:
            raise ValidationError("cannot normalize an all-zero amplitude")
        return JointMomentumAmplitude(self.grid / math.sqrt(total), self.dq, normalized=True)

    def axes(self) -> Sequence[np.ndarray]:
        return [centered_axis(n, d) for n, d in zip(self.grid.shape, self.dq)]


@dataclass
class PositionDensity:
    """Joint position density on the grid conjugate to a momentum grid"""
    grid: np.ndarray
    dx: Tuple[float, float, float, float]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def total_probability(self) -> float:
        return float(np.sum(self.grid) * self.cell_volume)

    def axes(self) -> Sequence[np.ndarray]:
        return [centered_axis(n, d) for n, d in zip(self.grid.shape, self.dx)]


def centered_axis(points: int, spacing: float) -> np.ndarray:
    """Sample positions with index points//2 at the origin (FFT-centred)"""
    return (np.arange(points) - points // 2) * spacing


def momentum_density_gaussian(q_s: TransverseMomentum, q_I: TransverseMomentum,
                              pump: GaussianPumpModel, normalized: bool = True) -> float:
    """Anti-correlated momentum density exp(-|q_s + q_I|^2 w_p^2 / 2).

    With normalized=True the value integrates to 1 over the 2-D sum coordinate.
    """
    u = q_s + q_I
    value = math.exp(-0.5 * (u.qx ** 2 + u.qy ** 2) * pump.w_p ** 2)
    if normalized:
        value *= pump.w_p ** 2 / (2.0 * math.pi)
    return value


def position_density_gaussian(rho_c, rho_o, crystal: CrystalModel, M_s: float, M_I: float,
                              normalized: bool = True) -> Union[float, np.ndarray]:
    """Position-correlated density exp(-a |rho_c/M_s - rho_o/M_I|^2).

    rho_c and rho_o are (x, y) pairs or arrays broadcasting to (..., 2).
    With normalized=True the value integrates to 1 over rho_o/M_I.
    """
    if M_s == 0 or M_I == 0:
        raise ValidationError("magnifications must be nonzero")
    rho_c = np.asarray(rho_c, dtype=float)
    rho_o = np.asarray(rho_o, dtype=float)
    delta = rho_c / M_s - rho_o / M_I
    a = crystal.position_exponent
    value = np.exp(-a * np.sum(delta ** 2, axis=-1))
    if normalized:
        value = value * a / math.pi
    return float(value) if np.ndim(value) == 0 else value


def gaussian_joint_amplitude(pump: GaussianPumpModel, sigma: float, points: int = 32,
                             extent_std: float = 5.0) -> JointMomentumAmplitude:
    """C proportional to exp(-|q_s+q_I|^2 w_p^2/4 - |q_s-q_I|^2 sigma^2), normalized.

    The grid spans extent_std standard deviations of the widest marginal.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    # marginal std of q_s along one axis is of order max(1/w_p, 1/sigma)
    width = max(1.0 / pump.w_p, 1.0 / (2.0 * sigma))
    dq = 2.0 * extent_std * width / points
    axis = centered_axis(points, dq)
    sx, sy, ix, iy = np.meshgrid(axis, axis, axis, axis, indexing='ij')
    plus = (sx + ix) ** 2 + (sy + iy) ** 2
    minus = (sx - ix) ** 2 + (sy - iy) ** 2
    grid = np.exp(-plus * pump.w_p ** 2 / 4.0 - minus * sigma ** 2)
    return JointMomentumAmplitude(grid, dq).normalize()


def separable_joint_amplitude(width_s: float, width_I: float, points: int = 32,
                              extent_std: float = 5.0) -> JointMomentumAmplitude:
    """Product of independent Gaussian amplitudes with 1/e^{1/2} half-widths width_s and width_I"""
    if width_s <= 0 or width_I <= 0:
        raise ValidationError("widths must be positive")
    dq = 2.0 * extent_std * max(width_s, width_I) / points
    axis = centered_axis(points, dq)
    sx, sy, ix, iy = np.meshgrid(axis, axis, axis, axis, indexing='ij')
    grid = (np.exp(-(sx ** 2 + sy ** 2) / (2.0 * width_s ** 2))
            * np.exp(-(ix ** 2 + iy ** 2) / (2.0 * width_I ** 2)))
    return JointMomentumAmplitude(grid, dq).normalize()


def check_boundary_decay(c: JointMomentumAmplitude, ratio: float = 1e-3):
    """Raise when the amplitude on any grid face exceeds ratio * peak"""
    magnitude = np.abs(c.grid)
    peak = float(magnitude.max())
    if peak == 0:
        raise ValidationError("joint amplitude is identically zero")
    edge = 0.0
    for axis in range(4):
        edge = max(edge,
                   float(np.take(magnitude, 0, axis=axis).max()),
                   float(np.take(magnitude, -1, axis=axis).max()))
    if edge >= ratio * peak:
        raise NumericalPreconditionError(
            f"joint amplitude does not decay at the grid boundary ({edge / peak:.2e} of peak); "
            f"widen the momentum grid to avoid aliasing")


def position_density_from_amplitude(c: JointMomentumAmplitude, boundary_ratio: float = 1e-3) -> PositionDensity:
    """|2-D Fourier transform per photon of C|^2 on the conjugate position grid"""
    if not c.normalized:
        raise ValidationError("joint amplitude must be normalized")
    check_boundary_decay(c, boundary_ratio)

    shape = c.grid.shape
    # unitary continuous transform per axis: (2 pi)^-1/2 * dq * sum_k C_k e^{i q_k x}
    spectrum = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(c.grid)))
    scale = 1.0
    for n, d in zip(shape, c.dq):
        scale *= n * d / math.sqrt(2.0 * math.pi)
    psi = spectrum * scale
    dx = tuple(2.0 * math.pi / (n * d) for n, d in zip(shape, c.dq))
    return PositionDensity(np.abs(psi) ** 2, dx)


def _weighted_correlation(density: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    weight = density / density.sum()
    mean_x = np.sum(weight * x)
    mean_y = np.sum(weight * y)
    cov = np.sum(weight * (x - mean_x) * (y - mean_y))
    var_x = np.sum(weight * (x - mean_x) ** 2)
    var_y = np.sum(weight * (y - mean_y) ** 2)
    if var_x <= 0 or var_y <= 0:
        return 0.0
    return float(cov / math.sqrt(var_x * var_y))


def position_correlation(density: PositionDensity) -> float:
    """Largest |correlation coefficient| between a signal and an idler coordinate"""
    sx, sy, ix, iy = np.meshgrid(*density.axes(), indexing='ij')
    pairs = ((sx, ix), (sy, iy), (sx, iy), (sy, ix))
    return max(abs(_weighted_correlation(density.grid, a, b)) for a, b in pairs)


def is_separable(density: PositionDensity, tolerance: float = 1e-6) -> bool:
    return position_correlation(density) <= tolerance


def density_slice(density: PositionDensity, signal_y_index: Optional[int] = None,
                  idler_y_index: Optional[int] = None) -> pd.DataFrame:
    """(rho_s,x , rho_I,x) slice at fixed y coordinates, indexed by position in metres"""
    n = density.grid.shape
    sy = n[1] // 2 if signal_y_index is None else signal_y_index
    iy = n[3] // 2 if idler_y_index is None else idler_y_index
    axes = density.axes()
    values = density.grid[:, sy, :, iy]
    return pd.DataFrame(values, index=pd.Index(axes[0], name='rho_s_x_m'),
                        columns=pd.Index(axes[2], name='rho_I_x_m'))


def dump_density_slice_csv(density: PositionDensity, filename: str, **kwargs) -> str:
    """Write a 2-D density slice for inspection"""
    density_slice(density, **kwargs).to_csv(filename, float_format='%.10g')
    return filename
