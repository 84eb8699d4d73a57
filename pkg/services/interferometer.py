"""
Interferometer Core
Closed-form count rates and visibilities of the single-mode interferometers:
Mach-Zehnder, induced coherence (ZWM), two-particle and SU(1,1).

All rates are normalized to probability-like units in [0, 1].
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi
_MAGNITUDE_TOLERANCE = 1e-12


class MZPort(Enum):
    """Mach-Zehnder output ports"""
    A = "A"
    B = "B"


class ZWMPort(Enum):
    """Induced-coherence signal output ports"""
    S1 = "S1"
    S2 = "S2"


@dataclass(frozen=True)
class Transmittance:
    """Complex amplitude transmittance T = |T| e^{i gamma} of an object"""
    magnitude: float
    phase_gamma: float = 0.0

    def __post_init__(self):
        magnitude = float(self.magnitude)
        if not math.isfinite(magnitude) or magnitude < -_MAGNITUDE_TOLERANCE or magnitude > 1.0 + _MAGNITUDE_TOLERANCE:
            raise ValidationError(f"|T| must lie in [0, 1], got {self.magnitude}")
        if not math.isfinite(self.phase_gamma):
            raise ValidationError(f"phase_gamma must be finite, got {self.phase_gamma}")
        object.__setattr__(self, 'magnitude', min(max(magnitude, 0.0), 1.0))
        object.__setattr__(self, 'phase_gamma', float(self.phase_gamma) % TWO_PI)

    @classmethod
    def from_complex(cls, value: complex) -> "Transmittance":
        return cls(abs(value), float(np.angle(value)))

    @property
    def value(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase_gamma), math.sin(self.phase_gamma))


@dataclass(frozen=True)
class PhaseSetting:
    """Tunable interferometric phase phi (radians)"""
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValidationError(f"phi must be finite, got {self.phi}")

    @property
    def reduced(self) -> float:
        return float(self.phi) % TWO_PI


@dataclass
class RateCurve:
    """A scan of count rates against the interferometric phase"""
    phases: List[float] = field(default_factory=list)
    rates: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.phases = [_phi(p) for p in self.phases]
        self.rates = [float(r) for r in self.rates]
        if len(self.phases) != len(self.rates):
            raise ValidationError("phases and rates must have the same length")
        if any(r < 0 for r in self.rates):
            raise ValidationError("rates must be nonnegative")


PhaseLike = Union[float, PhaseSetting]


def _phi(phi: PhaseLike) -> float:
    if isinstance(phi, PhaseSetting):
        return phi.reduced
    value = float(phi)
    if not math.isfinite(value):
        raise ValidationError(f"phi must be finite, got {phi}")
    return value % TWO_PI


def _port(port, enum_type):
    if isinstance(port, enum_type):
        return port
    try:
        return enum_type(str(port))
    except ValueError:
        raise ValidationError(f"unknown port {port!r} for {enum_type.__name__}") from None


def mz_count_rate(t: Transmittance, phi: PhaseLike, port=MZPort.A) -> float:
    """Single-photon Mach-Zehnder rate with the object in one arm"""
    port = _port(port, MZPort)
    sign = 1.0 if port is MZPort.A else -1.0
    m = t.magnitude
    return (1.0 + m * m + sign * 2.0 * m * math.cos(_phi(phi) - t.phase_gamma)) / 4.0


def mz_visibility(t: Transmittance) -> float:
    m = t.magnitude
    return 2.0 * m / (1.0 + m * m)


def zwm_count_rate(t: Transmittance, phi: PhaseLike, port=ZWMPort.S1) -> float:
    """Signal singles rate of the induced-coherence interferometer"""
    port = _port(port, ZWMPort)
    sign = 1.0 if port is ZWMPort.S1 else -1.0
    return (1.0 + sign * t.magnitude * math.cos(_phi(phi) + t.phase_gamma)) / 2.0


def zwm_visibility(t: Transmittance) -> float:
    return t.magnitude


def su11_count_rate(t: Transmittance, phi: PhaseLike) -> float:
    """Singles rate on either output of the SU(1,1) interferometer.

    Both outputs oscillate in phase, so the same value is returned for the
    signal and the idler path. For double-pass geometries pass T' = T**2
    explicitly (see double_pass).
    """
    return (1.0 + t.magnitude * math.cos(_phi(phi) + t.phase_gamma)) / 2.0


def double_pass(t: Transmittance) -> Transmittance:
    """Transmittance seen by light going twice through the same sample"""
    return Transmittance(t.magnitude ** 2, 2.0 * t.phase_gamma)


def two_particle_rates(t: Transmittance, phi: PhaseLike) -> Tuple[float, float]:
    """(singles, coincidence visibility) of the two-particle interferometer"""
    _phi(phi)
    m = t.magnitude
    return 0.5, 2.0 * m / (m * m + 1.0)


def two_particle_coincidence_rate(t: Transmittance, phi: PhaseLike,
                                  signal_port: int = 1, idler_port: int = 1) -> float:
    """Coincidence rate between signal output signal_port and idler output idler_port (1 or 2)"""
    if signal_port not in (1, 2) or idler_port not in (1, 2):
        raise ValidationError("ports must be 1 or 2")
    sign = 1.0 if signal_port == idler_port else -1.0
    m = t.magnitude
    return (1.0 + m * m + sign * 2.0 * m * math.cos(_phi(phi) + t.phase_gamma)) / 8.0


def scan(rate_fn, phases: Sequence[float]) -> RateCurve:
    """Evaluate rate_fn(phi) over the given phases"""
    return RateCurve(list(phases), [rate_fn(p) for p in phases])


def uniform_phases(samples: int, start: float = 0.0) -> List[float]:
    """Equally spaced phases covering one full period"""
    if samples < 1:
        raise ValidationError("samples must be positive")
    return [start + TWO_PI * k / samples for k in range(samples)]


def visibility_from_scan(curve: RateCurve) -> float:
    """(R_max - R_min)/(R_max + R_min) over the sampled rates"""
    if not curve.rates:
        raise ValidationError("empty rate curve")
    if len(curve.rates) < 8:
        raise ValidationError(f"at least 8 samples per period are required, got {len(curve.rates)}")

    # unwrap so that scans crossing 2π keep their span
    phases = np.unwrap(np.asarray([float(p) for p in curve.phases]))
    ordered = np.sort(phases)
    step = float(np.mean(np.diff(ordered))) if len(ordered) > 1 else 0.0
    span = float(ordered[-1] - ordered[0]) + step
    if span < TWO_PI - 1e-9:
        raise ValidationError(f"scan span {span:.6f} rad is shorter than a full period")
    periods = span / TWO_PI
    if len(curve.rates) / periods < 8:
        raise ValidationError("scan has fewer than 8 samples per period")

    r_max = max(curve.rates)
    r_min = min(curve.rates)
    if r_max + r_min == 0.0:
        return 0.0
    return (r_max - r_min) / (r_max + r_min)
