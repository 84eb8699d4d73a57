"""
Image Reconstruction
Visibility and image-function maps from phase scans, phase-stepping and
off-axis Fourier holography.

Frames follow 1 + |T| cos(phi_in - arg T); the complex estimates returned here
carry arg T with that sign convention.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import NumericalPreconditionError, ValidationError
from .imaging_types import CameraFrame

TWO_PI = 2.0 * math.pi
_PHASE_TOLERANCE = 1e-9


def _stack(frames: Sequence[CameraFrame]) -> np.ndarray:
    if not frames:
        raise ValidationError("no frames given")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise ValidationError("all frames must share the same shape")
    return np.stack([f.grid for f in frames])


def _check_full_scan(frames: Sequence[CameraFrame], minimum: int = 8):
    if len(frames) < minimum:
        raise ValidationError(f"a full phase scan needs at least {minimum} frames, got {len(frames)}")
    phases = np.sort(np.mod([f.phase_tag for f in frames], TWO_PI))
    gaps = np.diff(np.concatenate([phases, [phases[0] + TWO_PI]]))
    # the scan spans 2 pi when no gap exceeds a quarter period
    if gaps.max() > math.pi / 2.0 + _PHASE_TOLERANCE:
        raise ValidationError(f"phase scan leaves a gap of {gaps.max():.3f} rad; it must span 2 pi")


def visibility_map(frames: Sequence[CameraFrame]) -> np.ndarray:
    """Per-pixel (max - min)/(max + min) over the scan; 0 where both vanish"""
    _check_full_scan(frames)
    stack = _stack(frames)
    r_max = stack.max(axis=0)
    r_min = stack.min(axis=0)
    total = r_max + r_min
    out = np.zeros_like(total)
    np.divide(r_max - r_min, total, out=out, where=total > 0)
    return out


def image_function(frames: Sequence[CameraFrame]) -> np.ndarray:
    """Per-pixel R_max - R_min over the scan"""
    _check_full_scan(frames)
    stack = _stack(frames)
    return stack.max(axis=0) - stack.min(axis=0)


def image_function_two_frame(frame_a: CameraFrame, frame_b: CameraFrame) -> np.ndarray:
    """|R(phi) - R(phi + pi)|: the subtraction image of two complementary frames"""
    delta = abs(((frame_b.phase_tag - frame_a.phase_tag) % TWO_PI) - math.pi)
    if delta > 1e-6:
        raise ValidationError("two-frame image needs frames separated by pi")
    if frame_a.shape != frame_b.shape:
        raise ValidationError("frames must share the same shape")
    return np.abs(frame_a.grid - frame_b.grid)


def frame_sum(frame_a: CameraFrame, frame_b: CameraFrame) -> np.ndarray:
    """Sum of two frames; for complementary outputs the object disappears"""
    if frame_a.shape != frame_b.shape:
        raise ValidationError("frames must share the same shape")
    return frame_a.grid + frame_b.grid


def phase_stepping(frames: Sequence[CameraFrame], offset: Optional[float] = None) -> np.ndarray:
    """Sum_j frame_j e^{+i 2 pi j / K} for K >= 3 equally spaced frames.

    The result equals (K/2)|T| e^{i arg T}; frames may start at any offset,
    which is removed from the returned phase.
    """
    k = len(frames)
    if k < 3:
        raise ValidationError(f"phase stepping needs K >= 3 frames, got {k}")
    phases = np.array([f.phase_tag for f in frames], dtype=float)
    start = phases[0] if offset is None else float(offset)
    expected = start + TWO_PI * np.arange(k) / k
    mismatch = np.angle(np.exp(1j * (phases - expected)))
    if np.max(np.abs(mismatch)) > _PHASE_TOLERANCE:
        raise ValidationError("phase-stepping frames must be equally spaced by 2 pi / K")
    stack = _stack(frames)
    weights = np.exp(1j * TWO_PI * np.arange(k) / k)
    return np.tensordot(weights, stack, axes=1) * np.exp(1j * start)


def transmittance_from_stepping(stepped: np.ndarray, k: int) -> np.ndarray:
    """Scale a phase-stepping sum to the transmittance estimate |T| e^{i arg T}"""
    return 2.0 * stepped / k


def _frequency_axes(shape: Tuple[int, int], pitch: float):
    ky = TWO_PI * np.fft.fftfreq(shape[0], d=pitch)
    kx = TWO_PI * np.fft.fftfreq(shape[1], d=pitch)
    return ky[:, None], kx[None, :]


def estimate_sideband_bandwidth(frame: CameraFrame, carrier: Sequence[float],
                                energy_fraction: float = 0.95) -> float:
    """Radius in rad/m around -k_c that holds the given share of the sideband power.

    Only the half of the spectrum on the -k_c side counts; the constant
    background of the frame is removed first. A frame without modulation gives 0.
    """
    if not 0.0 < energy_fraction <= 1.0:
        raise ValidationError(f"energy_fraction must lie in (0, 1], got {energy_fraction}")
    kx_c, ky_c = float(carrier[0]), float(carrier[1])
    power = np.abs(np.fft.fft2(frame.grid - frame.grid.mean())) ** 2
    ky, kx = _frequency_axes(frame.shape, frame.pitch)
    half = (kx * kx_c + ky * ky_c) < 0.0
    radius = np.hypot(kx + kx_c, ky + ky_c)[half]
    weights = power[half]
    total = weights.sum()
    if total <= 0.0:
        return 0.0
    order = np.argsort(radius)
    cumulative = np.cumsum(weights[order])
    index = min(int(np.searchsorted(cumulative, energy_fraction * total)), cumulative.size - 1)
    return float(radius[order][index])


def off_axis_holography(frame: CameraFrame, carrier: Sequence[float],
                        object_bandwidth: Optional[float] = None,
                        reference_phase: Optional[np.ndarray] = None) -> np.ndarray:
    """Complex transmittance estimate from a single frame with a tilted reference.

    The frame is 1 + |T| cos(k_c . rho + phi_in - arg T). The sideband at -k_c
    holds (|T|/2) e^{i(arg T - phi_in)} e^{-i k_c . rho}; it is cut out with a
    circular mask of radius |k_c|/2, transformed back and demodulated. Without
    an explicit object_bandwidth the sideband width is estimated from the frame.
    """
    kx_c, ky_c = float(carrier[0]), float(carrier[1])
    k_c = math.hypot(kx_c, ky_c)
    ny, nx = frame.shape
    nyquist = math.pi / frame.pitch
    bin_width = TWO_PI / (max(ny, nx) * frame.pitch)
    if k_c >= nyquist / 2.0:
        raise NumericalPreconditionError(
            f"carrier {k_c:.4g} rad/m must stay below half the Nyquist frequency ({nyquist / 2.0:.4g} rad/m)")
    if k_c < 4.0 * bin_width:
        raise NumericalPreconditionError("carrier is too close to zero frequency to separate the sideband")
    if object_bandwidth is None:
        object_bandwidth = estimate_sideband_bandwidth(frame, carrier)
    if k_c <= 2.0 * object_bandwidth:
        raise NumericalPreconditionError(
            f"carrier {k_c:.4g} rad/m must exceed twice the object bandwidth ({2.0 * object_bandwidth:.4g} rad/m)")

    spectrum = np.fft.fft2(frame.grid)
    ky, kx = _frequency_axes(frame.shape, frame.pitch)
    mask = (kx + kx_c) ** 2 + (ky + ky_c) ** 2 < (k_c / 2.0) ** 2
    sideband = np.fft.ifft2(spectrum * mask)

    y = (np.arange(ny) - (ny - 1) / 2.0) * frame.pitch
    x = (np.arange(nx) - (nx - 1) / 2.0) * frame.pitch
    linear_phase = kx_c * x[None, :] + ky_c * y[:, None] + frame.phase_tag
    estimate = 2.0 * sideband * np.exp(1j * linear_phase)
    if reference_phase is not None:
        estimate = estimate * np.exp(-1j * np.asarray(reference_phase, dtype=float))
    return estimate
