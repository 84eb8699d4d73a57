"""
Imaging Types
Object maps, camera frames and the two imaging geometries
(momentum correlation / far field, position correlation / near field)
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .biphoton import CrystalModel, GaussianPumpModel, TransverseMomentum
from .errors import ValidationError

_MAGNITUDE_TOLERANCE = 1e-9


class CorrelationModel(Enum):
    """Joint momentum density used for momentum-correlation frames"""
    GAUSSIAN = "gaussian"
    SEPARABLE = "separable"


class Configuration(Enum):
    MC = "MC"
    PC = "PC"


def pixel_axis(points: int, pitch: float) -> np.ndarray:
    """Pixel-centre coordinates with the origin at the grid centre"""
    return (np.arange(points) - (points - 1) / 2.0) * pitch


@dataclass
class ObjectMap:
    """Sampled complex transmittance T(rho_o); origin at the grid centre"""
    grid: np.ndarray
    pitch: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex)
        if self.grid.ndim != 2 or min(self.grid.shape) < 1:
            raise ValidationError("object map must be a non-empty 2-D grid")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise ValidationError(f"object pitch must be positive, got {self.pitch}")
        if not np.all(np.isfinite(self.grid)):
            raise ValidationError("object map contains non-finite values")
        peak = float(np.abs(self.grid).max())
        if peak > 1.0 + _MAGNITUDE_TOLERANCE:
            raise ValidationError(f"|T| must not exceed 1 (found {peak:.6f})")

    @classmethod
    def from_polar(cls, magnitude: np.ndarray, phase: Optional[np.ndarray], pitch: float) -> "ObjectMap":
        magnitude = np.asarray(magnitude, dtype=float)
        if phase is None:
            phase = np.zeros_like(magnitude)
        phase = np.asarray(phase, dtype=float)
        if phase.shape != magnitude.shape:
            raise ValidationError("magnitude and phase grids must have the same shape")
        return cls(magnitude * np.exp(1j * phase), pitch)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.grid)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.grid)

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """(y, x) pixel-centre coordinates in metres"""
        ny, nx = self.shape
        return pixel_axis(ny, self.pitch), pixel_axis(nx, self.pitch)


@dataclass
class CameraFrame:
    """Camera intensity grid recorded at one interferometric phase"""
    grid: np.ndarray
    pitch: float
    phase_tag: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 2:
            raise ValidationError("camera frame must be a 2-D grid")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise ValidationError(f"camera pitch must be positive, got {self.pitch}")
        if np.any(self.grid < 0):
            # round-off of 1 + cos(pi)
            if float(self.grid.min()) < -1e-12:
                raise ValidationError("camera frame values must be nonnegative")
            self.grid = np.clip(self.grid, 0.0, None)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        ny, nx = self.shape
        return pixel_axis(ny, self.pitch), pixel_axis(nx, self.pitch)


@dataclass(frozen=True)
class GeometryMC:
    """Momentum-correlation (far-field) imaging geometry"""
    f_I: float
    f_c: float
    lambda_s: float
    lambda_I: float
    pump: GaussianPumpModel
    phi_in: float = 0.0
    correlation: CorrelationModel = CorrelationModel.GAUSSIAN

    def __post_init__(self):
        for name in ('f_I', 'f_c', 'lambda_s', 'lambda_I'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive, got {value}")
        if not math.isfinite(self.phi_in):
            raise ValidationError("phi_in must be finite")

    @property
    def magnification(self) -> float:
        """|rho_c| / |rho_o| = f_c lambda_s / (f_I lambda_I); erect image assumed"""
        return self.f_c * self.lambda_s / (self.f_I * self.lambda_I)

    @property
    def object_blur_std(self) -> float:
        """Std of the Gaussian point-spread in object coordinates"""
        return self.lambda_I * self.f_I / (2.0 * math.pi * self.pump.w_p)

    def with_phase(self, phi_in: float) -> "GeometryMC":
        return GeometryMC(self.f_I, self.f_c, self.lambda_s, self.lambda_I, self.pump, phi_in, self.correlation)


@dataclass(frozen=True)
class GeometryPC:
    """Position-correlation (near-field) imaging geometry.

    Phase maps are optional: phi_s_map on the camera grid, phi_I_map and
    phi_I_prime_map on the object grid.
    """
    M_s: float
    M_I: float
    crystal: CrystalModel
    phi_in: float = 0.0
    phi_s_map: Optional[np.ndarray] = field(default=None, compare=False)
    phi_I_map: Optional[np.ndarray] = field(default=None, compare=False)
    phi_I_prime_map: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.M_s == 0 or self.M_I == 0 or not (math.isfinite(self.M_s) and math.isfinite(self.M_I)):
            raise ValidationError("magnifications must be finite and nonzero")
        if not math.isfinite(self.phi_in):
            raise ValidationError("phi_in must be finite")

    @property
    def magnification(self) -> float:
        return self.M_s / self.M_I

    @property
    def object_blur_std(self) -> float:
        """Std of the position-correlation kernel in object coordinates"""
        return abs(self.M_I) / math.sqrt(2.0 * self.crystal.position_exponent)

    def with_phase(self, phi_in: float) -> "GeometryPC":
        return GeometryPC(self.M_s, self.M_I, self.crystal, phi_in,
                          self.phi_s_map, self.phi_I_map, self.phi_I_prime_map)


def map_coordinates_mc(q: TransverseMomentum, g: GeometryMC, which: str = "object") -> Tuple[float, float]:
    """Position lambda f q / (2 pi) on the object (idler) or camera (signal) plane"""
    which = str(getattr(which, 'value', which)).lower()
    if which == "object":
        scale = g.lambda_I * g.f_I / (2.0 * math.pi)
    elif which == "camera":
        scale = g.lambda_s * g.f_c / (2.0 * math.pi)
    else:
        raise ValidationError(f"which must be 'object' or 'camera', got {which!r}")
    return scale * q.qx, scale * q.qy
