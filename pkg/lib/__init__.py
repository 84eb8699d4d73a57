# lib package
from .utils import crop_guard, phase_rms, rms, robust_statistics, wrap_phase

__all__ = ['crop_guard', 'phase_rms', 'rms', 'robust_statistics', 'wrap_phase']
