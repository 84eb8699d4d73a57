"""
Simulation Configuration Settings
Global numerics, logging and export settings for every run
"""

from typing import Dict, Any


class SimulationConfig:
    """Global simulation configuration"""

    # Numerical settings
    NUMERICS = {
        'hermite_nodes': 32,
        'min_pixels_per_sigma': 4.0,
        'quadrature': 'convolution',
        'holography_guard_px': 8,
        'oracle_tolerance': 1e-12,
        'outlier_method': 'iqr',
        'max_workers': 4,
    }

    # Logging configuration
    LOGGING = {
        'level': 'INFO',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    }

    # Report export settings
    EXPORT = {
        'manifest_name': 'manifest.json',
        'summary_name': 'summary.json',
        'sheets': {
            'comparison': 'Comparison',
            'inputs': 'Inputs',
        }
    }

    @classmethod
    def get_numerics(cls) -> Dict[str, Any]:
        """Get numerical settings"""
        return cls.NUMERICS.copy()

    @classmethod
    def get_logging_config(cls) -> Dict[str, Any]:
        """Get logging configuration"""
        return cls.LOGGING.copy()

    @classmethod
    def get_export_config(cls) -> Dict[str, Any]:
        """Get export configuration"""
        return cls.EXPORT.copy()
