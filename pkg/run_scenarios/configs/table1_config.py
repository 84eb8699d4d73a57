"""
Design Comparison Configuration
Parameter sets of the three reference setups, with measured values as metadata
"""

import copy
from typing import Dict, Any, List


class Table1Config:
    """Reference setups for the design comparison table"""

    SETUPS = {
        'fuenzalida': {
            'label': 'fuenzalida',
            'configuration': 'MC',
            'crystal_length_m': 2e-3,
            'n_signal': 1.4,
            'n_idler': 1.4,
            'lambda_signal_m': 810e-9,
            'lambda_idler_m': 1550e-9,
            'pump_waist_m': 119e-6,
            'f_idler_m': 75e-3,
            'f_camera_m': 75e-3,
            'experiment': {'res_fwhm_m': 220e-6},
        },
        'microscopy': {
            'label': 'microscopy',
            'configuration': 'MC',
            'crystal_length_m': 2e-3,
            'n_signal': 1.8,
            'n_idler': 1.8,
            'lambda_signal_m': 0.8e-6,
            'lambda_idler_m': 3.8e-6,
            'pump_waist_m': 430e-6,
            'f_idler_m': 100e-3,
            'f_camera_m': 100e-3,
            'experiment': {'res_fwhm_m': 320e-6, 'fov_m': 9e-3, 'modes_per_direction': 28},
        },
        'position_correlation': {
            'label': 'position_correlation',
            'configuration': 'PC',
            'crystal_length_m': 2e-3,
            'n_signal': 1.8,
            'n_idler': 1.8,
            'lambda_signal_m': 0.8e-6,
            'lambda_idler_m': 3.8e-6,
            'pump_waist_m': 430e-6,
            'magnification_signal': 1.0,
            'magnification_idler': 0.25,
            'experiment': {'res_fwhm_m': 9e-6, 'fov_m': 160e-6, 'modes_per_direction': 18},
        },
    }

    # Column order of the comparison table
    ORDER = ['fuenzalida', 'microscopy', 'position_correlation']

    @classmethod
    def get_setup(cls, key: str) -> Dict[str, Any]:
        """Get one setup by key (deep copy)"""
        return copy.deepcopy(cls.SETUPS.get(key, {}))

    @classmethod
    def get_all_setups(cls) -> List[Dict[str, Any]]:
        """Get all setups in table order"""
        return [cls.get_setup(key) for key in cls.ORDER]
