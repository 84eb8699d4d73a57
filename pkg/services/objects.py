"""
Synthetic Objects
Built-in transmittance maps for simulations and tests
"""

import math
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import ValidationError
from .imaging_types import ObjectMap, pixel_axis


def _coords(shape: Tuple[int, int], pitch: float):
    y = pixel_axis(shape[0], pitch)[:, None]
    x = pixel_axis(shape[1], pitch)[None, :]
    return y, x


def empty(shape, pitch, **_) -> ObjectMap:
    return ObjectMap(np.ones(shape, dtype=complex), pitch)


def opaque(shape, pitch, **_) -> ObjectMap:
    return ObjectMap(np.zeros(shape, dtype=complex), pitch)


def knife_edge(shape, pitch, edge_x_m: float = 0.0, **_) -> ObjectMap:
    """Opaque for x < edge, clear for x > edge"""
    y, x = _coords(shape, pitch)
    grid = np.where(x + 0 * y > edge_x_m, 1.0, 0.0)
    return ObjectMap(grid.astype(complex), pitch)


def dot(shape, pitch, center_x_m: float = 0.0, center_y_m: float = 0.0,
        radius_m: float = None, **_) -> ObjectMap:
    """Absorptive disk on a clear background"""
    y, x = _coords(shape, pitch)
    radius = radius_m if radius_m is not None else 2.0 * pitch
    inside = (x - center_x_m) ** 2 + (y - center_y_m) ** 2 <= radius ** 2
    return ObjectMap(np.where(inside, 0.0, 1.0).astype(complex), pitch)


def two_pinholes(shape, pitch, separation_m: float = 70e-6, **_) -> ObjectMap:
    """Two single-pixel apertures on the x axis, symmetric about the centre"""
    grid = np.zeros(shape, dtype=complex)
    ny, nx = shape
    offset = separation_m / (2.0 * pitch)
    if abs(offset - round(offset)) > 1e-6 or nx % 2 == 0 or ny % 2 == 0:
        raise ValidationError("pinholes need an odd grid and a separation of an even number of pixels")
    cy, cx = ny // 2, nx // 2
    k = int(round(offset))
    if cx - k < 0 or cx + k >= nx:
        raise ValidationError("pinhole separation exceeds the object grid")
    grid[cy, cx - k] = 1.0
    grid[cy, cx + k] = 1.0
    return ObjectMap(grid, pitch)


def phase_bump(shape, pitch, amplitude_rad: float = 1.0, width_m: float = None, **_) -> ObjectMap:
    """Pure phase object with a Gaussian phase profile"""
    y, x = _coords(shape, pitch)
    width = width_m if width_m is not None else 0.15 * min(shape) * pitch
    phase = amplitude_rad * np.exp(-(x ** 2 + y ** 2) / (2.0 * width ** 2))
    return ObjectMap(np.exp(1j * phase), pitch)


def patch(shape, pitch, magnitude: float = 0.3, phase_rad: float = 0.0, half_width_m: float = None, **_) -> ObjectMap:
    """Clear object with a square patch of the given transmittance"""
    y, x = _coords(shape, pitch)
    half = half_width_m if half_width_m is not None else 0.25 * min(shape) * pitch
    inside = (np.abs(x) <= half) & (np.abs(y) <= half)
    grid = np.where(inside, magnitude * np.exp(1j * phase_rad), 1.0 + 0j)
    return ObjectMap(grid, pitch)


def cat(shape, pitch, **_) -> ObjectMap:
    """Clear cat silhouette (head and two ears) on an opaque background"""
    y, x = _coords(shape, pitch)
    size = min(shape) * pitch
    r = 0.25 * size
    head = x ** 2 + (y - 0.08 * size) ** 2 <= r ** 2
    ears = np.zeros(shape, dtype=bool)
    for side in (-1.0, 1.0):
        # triangle with apex above the head
        apex_x, apex_y = side * 0.17 * size, -0.36 * size
        base_y = -0.08 * size
        height = base_y - apex_y
        half_base = 0.11 * size
        within = (y >= apex_y) & (y <= base_y)
        spread = half_base * (y - apex_y) / height
        ears |= within & (np.abs(x - apex_x) <= spread)
    return ObjectMap(np.where(head | ears, 1.0, 0.0).astype(complex), pitch)


OBJECTS: Dict[str, Callable[..., ObjectMap]] = {
    'empty': empty,
    'opaque': opaque,
    'knife_edge': knife_edge,
    'dot': dot,
    'two_pinholes': two_pinholes,
    'phase_bump': phase_bump,
    'patch': patch,
    'cat': cat,
}


def synthetic_object(kind: str, shape: Tuple[int, int], pitch: float, **params) -> ObjectMap:
    try:
        builder = OBJECTS[kind]
    except KeyError:
        raise ValidationError(f"unknown object kind {kind!r}; choose from {sorted(OBJECTS)}") from None
    if len(shape) != 2 or min(shape) < 1:
        raise ValidationError(f"invalid object shape {shape}")
    if not (pitch > 0 and math.isfinite(pitch)):
        raise ValidationError(f"object pitch must be positive, got {pitch}")
    return builder(tuple(int(s) for s in shape), float(pitch), **params)
