"""
Numeric helpers shared by reconstruction scenarios and tests
"""
import logging
from typing import Any, Dict, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def wrap_phase(phase) -> np.ndarray:
    """Wrap to (-π, π]"""
    wrapped = np.angle(np.exp(1j * np.asarray(phase, dtype=float)))
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def crop_guard(grid: np.ndarray, guard: int = 0) -> np.ndarray:
    """Drop a border of `guard` pixels on every side"""
    grid = np.asarray(grid)
    if guard <= 0:
        return grid
    if 2 * guard >= min(grid.shape):
        raise ValueError(f"guard band {guard} leaves no pixels in a {grid.shape} grid")
    return grid[guard:-guard, guard:-guard]


def rms(values, guard: int = 0, mask: Optional[np.ndarray] = None) -> float:
    values = crop_guard(np.asarray(values, dtype=float), guard)
    if mask is not None:
        values = values[crop_guard(np.asarray(mask, dtype=bool), guard)]
    if values.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(values ** 2)))


def phase_rms(estimate, truth, guard: int = 0, mask: Optional[np.ndarray] = None,
              remove_piston: bool = True) -> float:
    """RMS of the wrapped phase difference; optionally ignores a global offset"""
    delta = wrap_phase(np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float))
    if remove_piston:
        region = crop_guard(delta, guard)
        weights = crop_guard(np.asarray(mask, dtype=bool), guard) if mask is not None else None
        selected = region[weights] if weights is not None else region
        if selected.size:
            piston = np.angle(np.mean(np.exp(1j * selected)))
            delta = wrap_phase(delta - piston)
    return rms(delta, guard, mask)


def robust_statistics(values: Sequence[float],
                      remove_outliers: bool = True,
                      outlier_method: str = 'iqr') -> Dict[str, Any]:
    """
    Calculate robust statistics with optional outlier removal

    Args:
        values: values to analyze (any shape, flattened)
        remove_outliers: whether to remove outliers
        outlier_method: 'iqr' or 'zscore'

    Returns:
        Dictionary with statistics: avg, median, min, max, std, count, filtered_count
    """
    values_array = np.asarray(values, dtype=float).ravel()
    values_array = values_array[np.isfinite(values_array)]
    if values_array.size == 0:
        return {
            'avg': 0.0, 'median': 0.0, 'min': 0.0, 'max': 0.0,
            'std': 0.0, 'count': 0, 'filtered_count': 0
        }

    filtered_values = values_array
    if remove_outliers and values_array.size > 10:
        if outlier_method == 'iqr':
            q1, q3 = np.percentile(values_array, [25, 75])
            iqr = q3 - q1
            lower_bound = q1 - 1.5 * iqr
            upper_bound = q3 + 1.5 * iqr
            filtered_values = values_array[(values_array >= lower_bound) & (values_array <= upper_bound)]
        elif outlier_method == 'zscore':
            std = np.std(values_array)
            if std > 0:
                z_scores = np.abs((values_array - np.mean(values_array)) / std)
                filtered_values = values_array[z_scores <= 3]
        else:
            raise ValueError(f"unknown outlier method {outlier_method!r}")

        removed = values_array.size - filtered_values.size
        if removed > 0:
            logger.debug(f"Removed {removed} outliers using {outlier_method} method")

    if filtered_values.size == 0:
        filtered_values = values_array

    return {
        'avg': float(np.mean(filtered_values)),
        'median': float(np.median(filtered_values)),
        'min': float(np.min(filtered_values)),
        'max': float(np.max(filtered_values)),
        'std': float(np.std(filtered_values)),
        'count': int(values_array.size),
        'filtered_count': int(filtered_values.size),
    }
