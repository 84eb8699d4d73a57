"""
Imaging Engine
Forward synthesis of camera frames for momentum-correlation and
position-correlation imaging with undetected photons.

Every frame has the form 1 + Re(e^{i phi(rho_c)} conj(K(rho_c))) where K is the
object field (transmittance times idler-side phases) averaged over the
correlation kernel and sampled at rho_o = rho_c / M. Both kernels are
Gaussian, so K is a Gaussian blur of the object map; the blur is applied once
and reused for every phase setting of a scan.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import NumericalPreconditionError, ValidationError
from .imaging_types import (
    CameraFrame, CorrelationModel, GeometryMC, GeometryPC, ObjectMap, pixel_axis,
)

Geometry = Union[GeometryMC, GeometryPC]

DEFAULT_NUMERICS = {
    'hermite_nodes': 32,
    'min_pixels_per_sigma': 4.0,
    'outside_transmittance': 0.0,
    'quadrature': 'convolution',   # or 'hermite'
    'max_workers': 4,
}

_SNAP_TOLERANCE = 1e-9


class ImagingEngine:
    """Frame synthesis service"""

    def __init__(self, numerics: Optional[dict] = None, log_callback: Callable = None):
        self.numerics = DEFAULT_NUMERICS.copy()
        if numerics:
            self.numerics.update({k: v for k, v in numerics.items() if k in DEFAULT_NUMERICS})
        if self.numerics['quadrature'] not in ('convolution', 'hermite'):
            raise ValidationError(f"unknown quadrature {self.numerics['quadrature']!r}")
        self.logger = logging.getLogger(__name__)
        self.log_callback = log_callback or self._default_log

    def _default_log(self, message: str, level: str = "info"):
        """Default logging function"""
        if level == "error":
            self.logger.error(message)
        elif level == "warn":
            self.logger.warning(message)
        elif level == "debug":
            self.logger.debug(message)
        else:
            self.logger.info(message)

    # ------------------------------------------------------------------
    # Camera grid and sampling helpers
    # ------------------------------------------------------------------

    def _camera_grid(self, obj: ObjectMap, magnification: float,
                     camera_shape: Optional[Tuple[int, int]], camera_pitch: Optional[float]):
        shape = tuple(camera_shape) if camera_shape is not None else obj.shape
        pitch = float(camera_pitch) if camera_pitch is not None else obj.pitch * abs(magnification)
        if len(shape) != 2 or min(shape) < 1:
            raise ValidationError(f"invalid camera shape {camera_shape}")
        if not pitch > 0:
            raise ValidationError(f"camera pitch must be positive, got {camera_pitch}")
        y_c = pixel_axis(shape[0], pitch)
        x_c = pixel_axis(shape[1], pitch)
        return shape, pitch, y_c, x_c

    def _check_sampling(self, obj: ObjectMap, blur_std: float, label: str):
        """Blur width (Erfc convention, sqrt2 * std) must span enough object pixels"""
        sigma = math.sqrt(2.0) * blur_std
        required = self.numerics['min_pixels_per_sigma']
        if sigma < required * obj.pitch:
            raise NumericalPreconditionError(
                f"{label}: blur sigma {sigma:.3e} m covers {sigma / obj.pitch:.2f} object pixels, "
                f"need at least {required:g}; resample the object finer")

    def _sample(self, field: np.ndarray, obj: ObjectMap, y_o: np.ndarray, x_o: np.ndarray) -> np.ndarray:
        """Bilinear samples of a complex object-grid field at object coordinates"""
        ny, nx = obj.shape
        rows = y_o / obj.pitch + (ny - 1) / 2.0
        cols = x_o / obj.pitch + (nx - 1) / 2.0
        coords = np.array([rows, cols])
        # grid-aligned samples must not drift past the edge pixels
        snapped = np.round(coords)
        coords = np.where(np.abs(coords - snapped) < _SNAP_TOLERANCE, snapped, coords)
        cval = self.numerics['outside_transmittance']
        real = ndimage.map_coordinates(field.real, coords, order=1, mode='constant', cval=cval)
        imag = ndimage.map_coordinates(field.imag, coords, order=1, mode='constant', cval=0.0)
        return real + 1j * imag

    def _blurred_field(self, field: np.ndarray, obj: ObjectMap, blur_std: float,
                       y_o: np.ndarray, x_o: np.ndarray) -> np.ndarray:
        """Gaussian average of field around each sample point"""
        if self.numerics['quadrature'] == 'hermite':
            return self._hermite_average(field, obj, blur_std, y_o, x_o)
        sigma_px = blur_std / obj.pitch
        blurred = (ndimage.gaussian_filter(field.real, sigma_px, mode='nearest')
                   + 1j * ndimage.gaussian_filter(field.imag, sigma_px, mode='nearest'))
        return self._sample(blurred, obj, y_o, x_o)

    def _hermite_average(self, field: np.ndarray, obj: ObjectMap, blur_std: float,
                         y_o: np.ndarray, x_o: np.ndarray) -> np.ndarray:
        """Gauss-Hermite quadrature of the Gaussian average over the sum momentum"""
        nodes, weights = np.polynomial.hermite.hermgauss(int(self.numerics['hermite_nodes']))
        offsets = math.sqrt(2.0) * blur_std * nodes
        total = np.zeros(np.broadcast(y_o, x_o).shape, dtype=complex)
        for dy, wy in zip(offsets, weights):
            for dx, wx in zip(offsets, weights):
                total += wy * wx * self._sample(field, obj, y_o + dy, x_o + dx)
        return total / math.pi

    @staticmethod
    def _phase_map(phi_in: float, y_c: np.ndarray, x_c: np.ndarray,
                   carrier: Optional[Sequence[float]], extra: Optional[np.ndarray] = None) -> np.ndarray:
        phase = np.full((len(y_c), len(x_c)), float(phi_in))
        if carrier is not None:
            kx, ky = float(carrier[0]), float(carrier[1])
            phase = phase + kx * x_c[None, :] + ky * y_c[:, None]
        if extra is not None:
            if extra.shape != phase.shape:
                raise ValidationError("signal phase map must match the camera grid")
            phase = phase + extra
        return phase

    @staticmethod
    def _frame(coherence: Optional[np.ndarray], phase: np.ndarray, pitch: float, phi_in: float) -> CameraFrame:
        if coherence is None:
            return CameraFrame(np.ones_like(phase), pitch, phi_in)
        return CameraFrame(1.0 + np.real(np.exp(1j * phase) * np.conj(coherence)), pitch, phi_in)

    # ------------------------------------------------------------------
    # Coherence terms
    # ------------------------------------------------------------------

    def coherence_mc(self, obj: ObjectMap, g: GeometryMC, ideal: bool = False,
                     camera_shape=None, camera_pitch=None):
        """(coherence map or None, camera pitch, y_c, x_c) for a momentum-correlation setup"""
        shape, pitch, y_c, x_c = self._camera_grid(obj, g.magnification, camera_shape, camera_pitch)
        if g.correlation is CorrelationModel.SEPARABLE and not ideal:
            # without momentum correlation the signal carries no which-source phase
            return None, pitch, y_c, x_c
        y_o = y_c[:, None] / g.magnification + np.zeros((1, shape[1]))
        x_o = x_c[None, :] / g.magnification + np.zeros((shape[0], 1))
        if ideal:
            return self._sample(obj.grid, obj, y_o, x_o), pitch, y_c, x_c
        self._check_sampling(obj, g.object_blur_std, "momentum-correlation frame")
        return self._blurred_field(obj.grid, obj, g.object_blur_std, y_o, x_o), pitch, y_c, x_c

    def coherence_pc(self, obj: ObjectMap, g: GeometryPC, ideal: bool = False,
                     camera_shape=None, camera_pitch=None):
        """(coherence map, camera pitch, y_c, x_c) for a position-correlation setup"""
        shape, pitch, y_c, x_c = self._camera_grid(obj, g.magnification, camera_shape, camera_pitch)
        field = obj.grid
        idler_phase = np.zeros(obj.shape)
        for phase_map in (g.phi_I_map, g.phi_I_prime_map):
            if phase_map is not None:
                phase_map = np.asarray(phase_map, dtype=float)
                if phase_map.shape != obj.shape:
                    raise ValidationError("idler phase maps must match the object grid")
                idler_phase = idler_phase + phase_map
        field = field * np.exp(1j * idler_phase)

        y_o = y_c[:, None] / g.magnification + np.zeros((1, shape[1]))
        x_o = x_c[None, :] / g.magnification + np.zeros((shape[0], 1))
        if ideal:
            return self._sample(field, obj, y_o, x_o), pitch, y_c, x_c
        self._check_sampling(obj, g.object_blur_std, "position-correlation frame")
        return self._blurred_field(field, obj, g.object_blur_std, y_o, x_o), pitch, y_c, x_c

    # ------------------------------------------------------------------
    # Frames
    # ------------------------------------------------------------------

    def simulate_frame_mc(self, obj: ObjectMap, g: GeometryMC, camera_shape=None, camera_pitch=None,
                          carrier=None) -> CameraFrame:
        coherence, pitch, y_c, x_c = self.coherence_mc(obj, g, False, camera_shape, camera_pitch)
        return self._frame(coherence, self._phase_map(g.phi_in, y_c, x_c, carrier), pitch, g.phi_in)

    def simulate_frame_mc_ideal(self, obj: ObjectMap, g: GeometryMC, camera_shape=None, camera_pitch=None,
                                carrier=None) -> CameraFrame:
        coherence, pitch, y_c, x_c = self.coherence_mc(obj, g, True, camera_shape, camera_pitch)
        return self._frame(coherence, self._phase_map(g.phi_in, y_c, x_c, carrier), pitch, g.phi_in)

    def simulate_frame_pc(self, obj: ObjectMap, g: GeometryPC, ideal: bool = False,
                          camera_shape=None, camera_pitch=None, carrier=None) -> CameraFrame:
        coherence, pitch, y_c, x_c = self.coherence_pc(obj, g, ideal, camera_shape, camera_pitch)
        signal_phase = None if g.phi_s_map is None else np.asarray(g.phi_s_map, dtype=float)
        phase = self._phase_map(g.phi_in, y_c, x_c, carrier, signal_phase)
        return self._frame(coherence, phase, pitch, g.phi_in)

    def simulate_stack(self, obj: ObjectMap, g: Geometry, phases: Sequence[float], ideal: bool = False,
                       camera_shape=None, camera_pitch=None, carrier=None) -> List[CameraFrame]:
        """Frames for every phase of a scan; the coherence map is computed once"""
        if len(phases) == 0:
            raise ValidationError("phase scan is empty")
        signal_phase = None
        if isinstance(g, GeometryMC):
            coherence, pitch, y_c, x_c = self.coherence_mc(obj, g, ideal, camera_shape, camera_pitch)
        elif isinstance(g, GeometryPC):
            coherence, pitch, y_c, x_c = self.coherence_pc(obj, g, ideal, camera_shape, camera_pitch)
            if g.phi_s_map is not None:
                signal_phase = np.asarray(g.phi_s_map, dtype=float)
        else:
            raise ValidationError(f"unsupported geometry {type(g).__name__}")

        self.log_callback(f"Synthesizing {len(phases)} frames on a {len(y_c)}x{len(x_c)} camera grid", "info")

        def build(phi_in: float) -> CameraFrame:
            phase = self._phase_map(phi_in, y_c, x_c, carrier, signal_phase)
            return self._frame(coherence, phase, pitch, float(phi_in))

        workers = max(1, int(self.numerics['max_workers']))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(build, phases))

    def ground_truth(self, obj: ObjectMap, g: Geometry, camera_shape=None, camera_pitch=None) -> np.ndarray:
        """Object transmittance resampled at rho_c / M on the camera grid"""
        shape, _, y_c, x_c = self._camera_grid(obj, g.magnification, camera_shape, camera_pitch)
        y_o = y_c[:, None] / g.magnification + np.zeros((1, shape[1]))
        x_o = x_c[None, :] / g.magnification + np.zeros((shape[0], 1))
        return self._sample(obj.grid, obj, y_o, x_o)


def add_shot_noise(frame: CameraFrame, mean_counts_per_pixel: float, seed: int) -> CameraFrame:
    """Poisson counts with the given mean per pixel, rescaled back to frame units"""
    if not (mean_counts_per_pixel > 0 and math.isfinite(mean_counts_per_pixel)):
        raise ValidationError(f"mean counts must be positive, got {mean_counts_per_pixel}")
    frame_scale = float(frame.grid.mean())
    if frame_scale <= 0:
        return CameraFrame(np.zeros_like(frame.grid), frame.pitch, frame.phase_tag)
    counts_per_unit = mean_counts_per_pixel / frame_scale
    rng = np.random.default_rng(seed)
    counts = rng.poisson(frame.grid * counts_per_unit)
    return CameraFrame(counts / counts_per_unit, frame.pitch, frame.phase_tag)


_default_engine = ImagingEngine()


def simulate_frame_mc(obj: ObjectMap, g: GeometryMC, **kwargs) -> CameraFrame:
    return _default_engine.simulate_frame_mc(obj, g, **kwargs)


def simulate_frame_mc_ideal(obj: ObjectMap, g: GeometryMC, **kwargs) -> CameraFrame:
    return _default_engine.simulate_frame_mc_ideal(obj, g, **kwargs)


def simulate_frame_pc(obj: ObjectMap, g: GeometryPC, ideal: bool = False, **kwargs) -> CameraFrame:
    return _default_engine.simulate_frame_pc(obj, g, ideal, **kwargs)
