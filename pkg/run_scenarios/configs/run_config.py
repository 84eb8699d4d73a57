"""
Run Configuration
INI run files for the simulate command, with command-line overrides
"""

import configparser
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from services.biphoton import CrystalModel, GaussianPumpModel
from services.errors import ValidationError
from services.frame_io import load_object
from services.imaging_types import Configuration, CorrelationModel, GeometryMC, GeometryPC, ObjectMap
from services.objects import synthetic_object

TWO_PI = 2.0 * math.pi

# Allowed keys per section; None means free-form numeric parameters
SECTION_KEYS = {
    'geometry.mc': {'f_idler_m', 'f_camera_m', 'lambda_signal_m', 'lambda_idler_m', 'pump_waist_m',
                    'correlation', 'camera_pitch_m', 'camera_shape_px'},
    'geometry.pc': {'magnification_signal', 'magnification_idler', 'crystal_length_m', 'n_signal',
                    'n_idler', 'lambda_signal_m', 'lambda_idler_m', 'camera_pitch_m', 'camera_shape_px'},
    'object': None,
    'scan': {'frames_k', 'start_rad', 'method'},
    'noise': {'mean_counts', 'seed'},
    'holography': {'carrier_x_rad_per_m', 'carrier_y_rad_per_m'},
    'output': {'directory', 'prefix'},
}

SCAN_METHODS = {'stepping': 3, 'scan': 8}


def parse_override(text: str) -> Tuple[str, str, str]:
    """'section.key=value' -> (section, key, value); the section may itself contain dots"""
    if '=' not in text:
        raise ValidationError(f"override {text!r} must look like section.key=value")
    target, value = text.split('=', 1)
    if '.' not in target:
        raise ValidationError(f"override {text!r} must name a section and a key")
    section, key = target.strip().rsplit('.', 1)
    return section, key, value.strip()


def _shape(value: str, name: str) -> Tuple[int, int]:
    try:
        parts = [int(p) for p in value.replace('x', ',').split(',') if p.strip()]
    except ValueError:
        raise ValidationError(f"{name} must be 'rows,cols', got {value!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 1:
        raise ValidationError(f"{name} must be two positive integers, got {value!r}")
    return parts[0], parts[1]


@dataclass
class RunConfig:
    """Validated run description"""
    configuration: Configuration
    geometry: Union[GeometryMC, GeometryPC]
    object_spec: Dict[str, Any]
    frames_k: int = 4
    start_rad: float = 0.0
    method: str = 'stepping'
    mean_counts: float = 0.0
    seed: int = 0
    carrier: Optional[Tuple[float, float]] = None
    output_dir: str = 'results'
    prefix: str = 'frame'
    camera_shape: Optional[Tuple[int, int]] = None
    camera_pitch: Optional[float] = None
    base_dir: str = '.'
    sections: Dict[str, Dict[str, str]] = field(default_factory=dict)

    @property
    def phases(self) -> List[float]:
        return [self.start_rad + TWO_PI * j / self.frames_k for j in range(self.frames_k)]

    def build_object(self) -> ObjectMap:
        spec = dict(self.object_spec)
        path = spec.pop('path', None)
        if path:
            path = path if os.path.isabs(path) else os.path.join(self.base_dir, path)
            phase_path = spec.pop('phase_path', None)
            if phase_path and not os.path.isabs(phase_path):
                phase_path = os.path.join(self.base_dir, phase_path)
            pitch = float(spec['pitch_m']) if 'pitch_m' in spec else None
            return load_object(path, phase_path, pitch)

        kind = spec.pop('kind', None)
        if not kind:
            raise ValidationError("[object] needs either path or kind")
        shape = _shape(spec.pop('shape_px', '128,128'), 'object.shape_px')
        if 'pitch_m' not in spec:
            raise ValidationError("[object] pitch_m is required for synthetic objects")
        pitch = self._float(spec.pop('pitch_m'), 'object.pitch_m')
        params = {k: self._float(v, f'object.{k}') for k, v in spec.items()}
        return synthetic_object(kind, shape, pitch, **params)

    def to_manifest(self) -> Dict[str, Any]:
        return {
            'configuration': self.configuration.value,
            'sections': {name: dict(values) for name, values in self.sections.items()},
            'phases_rad': self.phases,
            'frames_k': self.frames_k,
            'method': self.method,
        }

    @staticmethod
    def _float(value: Any, name: str) -> float:
        try:
            result = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{name} must be a number, got {value!r}") from None
        if not math.isfinite(result):
            raise ValidationError(f"{name} must be finite, got {value!r}")
        return result

    # ------------------------------------------------------------------
    # Loading
    # ------------------------------------------------------------------

    @classmethod
    def from_file(cls, path: str, overrides: Sequence[str] = ()) -> "RunConfig":
        if not os.path.isfile(path):
            raise ValidationError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'), interpolation=None)
        try:
            parser.read(path)
        except configparser.Error as e:
            raise ValidationError(f"cannot parse config {path}: {e}") from e
        sections = {name: dict(parser[name]) for name in parser.sections()}
        return cls.from_sections(sections, overrides, os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_sections(cls, sections: Dict[str, Dict[str, str]], overrides: Sequence[str] = (),
                      base_dir: str = '.') -> "RunConfig":
        sections = {name: dict(values) for name, values in sections.items()}
        for text in overrides:
            section, key, value = parse_override(text)
            sections.setdefault(section, {})[key] = value
        cls._check_keys(sections)

        geometry_sections = [name for name in ('geometry.mc', 'geometry.pc') if name in sections]
        if len(geometry_sections) != 1:
            raise ValidationError(
                f"exactly one of [geometry.mc] or [geometry.pc] is required, found {len(geometry_sections)}")
        if 'object' not in sections:
            raise ValidationError("[object] section is required")

        geometry_name = geometry_sections[0]
        values = sections[geometry_name]
        configuration, geometry = cls._geometry(geometry_name, values)

        scan = sections.get('scan', {})
        method = scan.get('method', 'stepping').strip().lower()
        if method not in SCAN_METHODS:
            raise ValidationError(f"scan.method must be one of {sorted(SCAN_METHODS)}, got {method!r}")
        try:
            frames_k = int(scan.get('frames_k', '4'))
        except ValueError:
            raise ValidationError(f"scan.frames_k must be an integer, got {scan.get('frames_k')!r}") from None
        minimum = SCAN_METHODS[method]
        if frames_k < minimum:
            raise ValidationError(f"scan.frames_k must be >= {minimum} for {method} (got {frames_k})")

        noise = sections.get('noise', {})
        mean_counts = cls._float(noise.get('mean_counts', '0'), 'noise.mean_counts')
        if mean_counts < 0:
            raise ValidationError("noise.mean_counts must be nonnegative")
        try:
            seed = int(noise.get('seed', '0'))
        except ValueError:
            raise ValidationError(f"noise.seed must be an integer, got {noise.get('seed')!r}") from None

        carrier = None
        holography = sections.get('holography', {})
        if holography:
            kx = cls._float(holography.get('carrier_x_rad_per_m', '0'), 'holography.carrier_x_rad_per_m')
            ky = cls._float(holography.get('carrier_y_rad_per_m', '0'), 'holography.carrier_y_rad_per_m')
            if kx or ky:
                carrier = (kx, ky)

        output = sections.get('output', {})
        camera_shape = _shape(values['camera_shape_px'], f'{geometry_name}.camera_shape_px') \
            if 'camera_shape_px' in values else None
        camera_pitch = cls._float(values['camera_pitch_m'], f'{geometry_name}.camera_pitch_m') \
            if 'camera_pitch_m' in values else None
        if camera_pitch is not None and camera_pitch <= 0:
            raise ValidationError(f"{geometry_name}.camera_pitch_m must be positive")

        return cls(
            configuration=configuration,
            geometry=geometry,
            object_spec=dict(sections['object']),
            frames_k=frames_k,
            start_rad=cls._float(scan.get('start_rad', '0'), 'scan.start_rad'),
            method=method,
            mean_counts=mean_counts,
            seed=seed,
            carrier=carrier,
            output_dir=output.get('directory', 'results'),
            prefix=output.get('prefix', 'frame'),
            camera_shape=camera_shape,
            camera_pitch=camera_pitch,
            base_dir=base_dir,
            sections=sections,
        )

    @staticmethod
    def _check_keys(sections: Dict[str, Dict[str, str]]):
        for name, values in sections.items():
            if name not in SECTION_KEYS:
                raise ValidationError(f"unknown config section [{name}]")
            allowed = SECTION_KEYS[name]
            if allowed is None:
                continue
            unknown = set(values) - allowed
            if unknown:
                raise ValidationError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")

    @classmethod
    def _geometry(cls, name: str, values: Dict[str, str]):
        def number(key: str, default: Optional[str] = None) -> float:
            if key not in values and default is None:
                raise ValidationError(f"[{name}] is missing {key}")
            return cls._float(values.get(key, default), f'{name}.{key}')

        if name == 'geometry.mc':
            correlation = values.get('correlation', 'gaussian').strip().lower()
            try:
                correlation_model = CorrelationModel(correlation)
            except ValueError:
                raise ValidationError(f"{name}.correlation must be gaussian or separable") from None
            f_idler = number('f_idler_m')
            geometry = GeometryMC(
                f_I=f_idler,
                f_c=number('f_camera_m', str(f_idler)),
                lambda_s=number('lambda_signal_m'),
                lambda_I=number('lambda_idler_m'),
                pump=GaussianPumpModel(number('pump_waist_m')),
                correlation=correlation_model,
            )
            return Configuration.MC, geometry

        crystal = CrystalModel(number('crystal_length_m'), number('n_signal', '1.0'), number('n_idler', '1.0'),
                               number('lambda_signal_m'), number('lambda_idler_m'))
        geometry = GeometryPC(number('magnification_signal', '1.0'), number('magnification_idler', '1.0'), crystal)
        return Configuration.PC, geometry
