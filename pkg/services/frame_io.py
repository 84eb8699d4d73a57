"""
Frame I/O
16-bit portable graymaps, CSV grids with a pitch header line, and JSON
manifests with SHA-256 checksums
"""

import hashlib
import io
import json
import os
import re
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import ValidationError
from .imaging_types import CameraFrame, ObjectMap

PGM_MAXVAL = 65535
FRAME_FULL_SCALE = 2.0
CSV_LINE_TERMINATOR = '\r\n'
_HEADER_PATTERN = re.compile(r'#\s*(.*)')


def _format_header(meta: Dict[str, float]) -> str:
    return '# ' + ','.join(f'{k}={v!r}' for k, v in meta.items())


def _parse_header(line: str) -> Dict[str, float]:
    match = _HEADER_PATTERN.match(line.strip())
    if not match:
        return {}
    meta = {}
    for item in match.group(1).split(','):
        if '=' in item:
            key, value = item.split('=', 1)
            try:
                meta[key.strip()] = float(value)
            except ValueError:
                raise ValidationError(f"invalid header value {item!r}") from None
    return meta


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


# ----------------------------------------------------------------------
# CSV grids
# ----------------------------------------------------------------------

def write_grid_csv(path: str, grid: np.ndarray, meta: Optional[Dict[str, float]] = None) -> str:
    """Write a real 2-D grid with a '# key=value' header line"""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValidationError("CSV grids must be 2-D")
    buffer = io.StringIO()
    buffer.write(_format_header(meta or {}) + CSV_LINE_TERMINATOR)
    pd.DataFrame(grid).to_csv(buffer, header=False, index=False, float_format='%.17g',
                              lineterminator=CSV_LINE_TERMINATOR)
    with open(path, 'w', newline='') as f:
        f.write(buffer.getvalue())
    return path


def read_grid_csv(path: str) -> Tuple[np.ndarray, Dict[str, float]]:
    if not os.path.isfile(path):
        raise ValidationError(f"grid file not found: {path}")
    with open(path, 'r', newline='') as f:
        first = f.readline()
    meta = _parse_header(first)
    try:
        frame = pd.read_csv(path, header=None, comment='#', dtype=float, float_precision='round_trip')
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ValidationError(f"cannot parse grid file {path}: {e}") from e
    return frame.to_numpy(), meta


# ----------------------------------------------------------------------
# PGM
# ----------------------------------------------------------------------

def write_pgm(path: str, grid: np.ndarray, full_scale: float = FRAME_FULL_SCALE,
              meta: Optional[Dict[str, float]] = None) -> str:
    """Binary 16-bit big-endian PGM, linear scale with full_scale mapped to 65535"""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValidationError("PGM images must be 2-D")
    scaled = np.clip(np.rint(grid / full_scale * PGM_MAXVAL), 0, PGM_MAXVAL).astype('>u2')
    height, width = grid.shape
    header = 'P5\n'
    if meta:
        header += _format_header(meta) + '\n'
    header += f'{width} {height}\n{PGM_MAXVAL}\n'
    with open(path, 'wb') as f:
        f.write(header.encode('ascii'))
        f.write(scaled.tobytes())
    return path


def read_pgm(path: str, full_scale: float = 1.0) -> Tuple[np.ndarray, Dict[str, float]]:
    """Read a binary PGM; values are scaled so maxval maps to full_scale"""
    if not os.path.isfile(path):
        raise ValidationError(f"PGM file not found: {path}")
    with open(path, 'rb') as f:
        data = f.read()

    tokens = []
    meta: Dict[str, float] = {}
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b'#':
            end = data.index(b'\n', pos)
            meta.update(_parse_header(data[pos:end].decode('ascii', errors='replace')))
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValidationError(f"truncated PGM header in {path}")
        tokens.append(data[start:pos].decode('ascii'))
    pos += 1  # single whitespace before the raster

    if tokens[0] != 'P5':
        raise ValidationError(f"{path} is not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    dtype = '>u2' if maxval > 255 else 'u1'
    count = width * height
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    if raster.size != count:
        raise ValidationError(f"PGM raster in {path} is truncated")
    return raster.reshape(height, width).astype(float) * full_scale / maxval, meta


# ----------------------------------------------------------------------
# Objects and frames
# ----------------------------------------------------------------------

def load_object(magnitude_path: str, phase_path: Optional[str] = None,
                pitch: Optional[float] = None) -> ObjectMap:
    """ObjectMap from a PGM (magnitude only) or a CSV magnitude/phase pair"""
    if magnitude_path.lower().endswith('.pgm'):
        magnitude, meta = read_pgm(magnitude_path)
        phase = None
    else:
        magnitude, meta = read_grid_csv(magnitude_path)
        phase = None
        if phase_path:
            phase, phase_meta = read_grid_csv(phase_path)
            meta = {**phase_meta, **meta}
    pitch = pitch if pitch is not None else meta.get('pitch_m')
    if pitch is None:
        raise ValidationError(f"object pitch missing: add a '# pitch_m=...' header line to {magnitude_path}")
    return ObjectMap.from_polar(magnitude, phase, pitch)


def save_object(obj: ObjectMap, magnitude_path: str, phase_path: str):
    write_grid_csv(magnitude_path, obj.magnitude, {'pitch_m': obj.pitch})
    write_grid_csv(phase_path, obj.phase, {'pitch_m': obj.pitch})


def save_frame(frame: CameraFrame, stem: str) -> Dict[str, str]:
    """Write <stem>.csv and <stem>.pgm; returns file names and checksums"""
    meta = {'pitch_m': frame.pitch, 'phase_rad': frame.phase_tag}
    csv_path = write_grid_csv(stem + '.csv', frame.grid, meta)
    pgm_path = write_pgm(stem + '.pgm', frame.grid, FRAME_FULL_SCALE, meta)
    return {
        'csv': os.path.basename(csv_path),
        'pgm': os.path.basename(pgm_path),
        'sha256_csv': sha256_file(csv_path),
        'sha256_pgm': sha256_file(pgm_path),
        'phase_rad': frame.phase_tag,
    }


def load_frame(path: str) -> CameraFrame:
    grid, meta = read_grid_csv(path)
    if 'pitch_m' not in meta:
        raise ValidationError(f"frame {path} lacks a pitch header")
    return CameraFrame(grid, meta['pitch_m'], meta.get('phase_rad', 0.0))


# ----------------------------------------------------------------------
# Manifests
# ----------------------------------------------------------------------

def write_json(path: str, payload: Dict[str, Any]) -> str:
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_json(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise ValidationError(f"file not found: {path}")
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON in {path}: {e}") from e


def verify_entry(directory: str, name: str, checksum: str) -> str:
    """Path of a manifest entry after checking that it exists and matches its checksum"""
    path = os.path.join(directory, name)
    if not os.path.isfile(path):
        raise ValidationError(f"missing file listed in manifest: {name}")
    if sha256_file(path) != checksum:
        raise ValidationError(f"checksum mismatch for {name}")
    return path
