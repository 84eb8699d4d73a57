"""
Design Analytics
Closed-form design figures for undetected-photon imaging: edge spread, blur and
resolution, field of view, spatial-mode counts, two-point resolution, OCT axial
resolution, and the three-column comparison report.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import constants, optimize, special

from .biphoton import CrystalModel, GaussianPumpModel
from .errors import NumericalPreconditionError, ValidationError
from .imaging_types import Configuration, GeometryMC, GeometryPC

SQRT_2LN2 = math.sqrt(2.0 * math.log(2.0))
MODES_MC_PREFACTOR = 5.0
MODES_PC_PREFACTOR = 2.7
D_MIN_PREFACTOR = 0.53
PC_FWHM_PREFACTOR = 0.44
OCT_PREFACTOR = 0.44
DEFAULT_BETA_MAX = 0.81


# ----------------------------------------------------------------------
# Momentum-correlation figures
# ----------------------------------------------------------------------

def blur_sigma_mc(g: GeometryMC) -> float:
    """Camera-plane blur sigma = f_c lambda_s / (sqrt2 pi w_p); independent of lambda_I"""
    return g.f_c * g.lambda_s / (math.sqrt(2.0) * math.pi * g.pump.w_p)


def magnification_mc(g: GeometryMC) -> float:
    return g.magnification


def esf_mc(x_c, edge_x0: float, g: GeometryMC):
    """Knife-edge response in [0, 1], rising towards +x_c"""
    k = 1.0 / blur_sigma_mc(g)
    return 0.5 * special.erfc(-k * (np.asarray(x_c, dtype=float) - g.magnification * edge_x0))


def resolution_mc(g: GeometryMC) -> Tuple[float, float]:
    """(res, res_fwhm) in object coordinates"""
    res = g.f_I * g.lambda_I / (math.sqrt(2.0) * math.pi * g.pump.w_p)
    return res, 2.0 * math.sqrt(math.log(2.0)) * res


def idler_divergence(crystal: CrystalModel) -> float:
    """Half-width at half-maximum idler emission angle"""
    c = crystal
    return c.lambda_I * math.sqrt(2.78 * c.n_s * c.n_I
                                  / (math.pi * c.L * (c.n_s * c.lambda_I + c.n_I * c.lambda_s)))


def fov_mc(f_I: float, theta_I: float) -> float:
    if f_I <= 0 or theta_I < 0:
        raise ValidationError("f_I must be positive and theta_I nonnegative")
    return 2.0 * f_I * theta_I


def modes_mc(crystal: CrystalModel, pump: GaussianPumpModel, f_I: Optional[float] = None) -> float:
    """Spatial modes per direction; f_I cancels between FoV and resolution"""
    return MODES_MC_PREFACTOR * pump.w_p * math.sqrt(crystal.n_s / (crystal.L * crystal.wavelength_sum))


# ----------------------------------------------------------------------
# Position-correlation figures
# ----------------------------------------------------------------------

def two_point_image(d: float, g: GeometryPC, x_c, y_c=0.0):
    """Image function of two points at (+-d/2, 0) on the object plane"""
    a = g.crystal.position_exponent
    x = np.asarray(x_c, dtype=float) / g.M_s
    y = np.asarray(y_c, dtype=float) / g.M_s
    half = d / (2.0 * g.M_I)
    value = np.exp(-a * ((x - half) ** 2 + y ** 2)) + np.exp(-a * ((x + half) ** 2 + y ** 2))
    return float(value) if np.ndim(value) == 0 else value


def two_point_beta(d: float, g: GeometryPC) -> float:
    """Dip-to-peak ratio of the two-point image along the separation axis"""
    if d <= 0:
        raise ValidationError("separation must be positive")
    upper = abs(g.M_s) * d / abs(g.M_I)
    search = optimize.minimize_scalar(lambda x: -two_point_image(d, g, x), bounds=(0.0, upper),
                                      method='bounded', options={'xatol': upper * 1e-10})
    dip = two_point_image(d, g, 0.0)
    peak = max(-float(search.fun), dip)
    return dip / peak


def d_min_root(g: GeometryPC, beta_max: float = DEFAULT_BETA_MAX) -> float:
    """Separation at which the dip-to-peak ratio equals beta_max (root solve)"""
    if not 0.0 < beta_max < 1.0:
        raise ValidationError(f"beta_max must lie in (0, 1), got {beta_max}")
    scale = abs(g.M_I) * math.sqrt(g.crystal.L * g.crystal.wavelength_sum)
    lo, hi = 0.05 * scale, 10.0 * scale
    f_lo = two_point_beta(lo, g) - beta_max
    f_hi = two_point_beta(hi, g) - beta_max
    if f_lo * f_hi > 0:
        raise NumericalPreconditionError(f"d_min root not bracketed in [{lo:.3e}, {hi:.3e}] m")
    return optimize.brentq(lambda d: two_point_beta(d, g) - beta_max, lo, hi, xtol=scale * 1e-12)


def d_min(g: GeometryPC, beta_max: float = DEFAULT_BETA_MAX) -> float:
    """Minimum resolvable two-point separation"""
    if not 0.0 < beta_max < 1.0:
        raise ValidationError(f"beta_max must lie in (0, 1), got {beta_max}")
    if math.isclose(beta_max, DEFAULT_BETA_MAX):
        return D_MIN_PREFACTOR * abs(g.M_I) * math.sqrt(g.crystal.L * g.crystal.wavelength_sum)
    return d_min_root(g, beta_max)


def resolution_pc_fwhm(g: GeometryPC) -> float:
    c = g.crystal
    return PC_FWHM_PREFACTOR * abs(g.M_I) * math.sqrt(c.L * c.wavelength_sum / c.n_s)


def fov_pc(pump: GaussianPumpModel, M_I: float) -> float:
    return SQRT_2LN2 * abs(M_I) * pump.w_p


def modes_pc(crystal: CrystalModel, pump: GaussianPumpModel) -> float:
    return MODES_PC_PREFACTOR * pump.w_p * math.sqrt(crystal.n_s / (crystal.L * crystal.wavelength_sum))


# ----------------------------------------------------------------------
# OCT
# ----------------------------------------------------------------------

def oct_axial_resolution(lambda_I: float, delta_lambda: float) -> float:
    if lambda_I <= 0 or delta_lambda <= 0:
        raise ValidationError("wavelength and bandwidth must be positive")
    return OCT_PREFACTOR * lambda_I ** 2 / delta_lambda


def bandwidth_to_delta_lambda(lambda_c: float, delta_nu: float) -> float:
    """Convert a frequency bandwidth (Hz) to a wavelength bandwidth at lambda_c"""
    if lambda_c <= 0 or delta_nu <= 0:
        raise ValidationError("wavelength and bandwidth must be positive")
    return lambda_c ** 2 * delta_nu / constants.c


# ----------------------------------------------------------------------
# Edge fitting
# ----------------------------------------------------------------------

@dataclass
class EdgeFit:
    sigma: float
    center: float
    amplitude: float
    offset: float

    def model(self, x):
        return self.offset + self.amplitude * 0.5 * special.erfc(-(np.asarray(x) - self.center) / self.sigma)


def fit_edge_spread(x: Sequence[float], values: Sequence[float]) -> EdgeFit:
    """Least-squares fit of offset + amplitude * erfc(-(x - x0)/sigma)/2"""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.shape != values.shape or x.size < 5:
        raise ValidationError("edge profile needs at least 5 matching samples")

    def model(xv, sigma, center, amplitude, offset):
        return offset + amplitude * 0.5 * special.erfc(-(xv - center) / sigma)

    low, high = float(values.min()), float(values.max())
    crossing = x[int(np.argmin(np.abs(values - 0.5 * (low + high))))]
    guess = [0.1 * (x.max() - x.min()), crossing, high - low, low]
    try:
        params, _ = optimize.curve_fit(model, x, values, p0=guess, maxfev=20000)
    except RuntimeError as e:
        raise NumericalPreconditionError(f"edge fit did not converge: {e}") from e
    sigma, center, amplitude, offset = (float(p) for p in params)
    return EdgeFit(abs(sigma), center, amplitude, offset)


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------

@dataclass
class DesignReport:
    """One column of the design comparison"""
    configuration: Configuration
    res_fwhm: float
    fov: float
    modes_per_direction: float
    inputs: Dict[str, Any] = field(default_factory=dict)
    label: str = ""
    extras: Dict[str, float] = field(default_factory=dict)
    experiment: Dict[str, Any] = field(default_factory=dict)
    footnotes: List[str] = field(default_factory=list)

    def __post_init__(self):
        for name in ('res_fwhm', 'fov', 'modes_per_direction'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"design figure {name} must be positive, got {value}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['configuration'] = self.configuration.value
        return data


INDEX_FOOTNOTE = ("d_min carries no refractive index while the position-correlation res_fwhm "
                  "divides by n; both are evaluated exactly as derived.")


def design_report_mc(g: GeometryMC, crystal: CrystalModel, label: str = "",
                     experiment: Optional[Dict[str, Any]] = None) -> DesignReport:
    res, res_fwhm = resolution_mc(g)
    theta = idler_divergence(crystal)
    return DesignReport(
        configuration=Configuration.MC,
        res_fwhm=res_fwhm,
        fov=fov_mc(g.f_I, theta),
        modes_per_direction=modes_mc(crystal, g.pump, g.f_I),
        inputs={
            'f_I_m': g.f_I, 'f_c_m': g.f_c, 'lambda_s_m': g.lambda_s, 'lambda_I_m': g.lambda_I,
            'w_p_m': g.pump.w_p, 'L_m': crystal.L, 'n_s': crystal.n_s, 'n_I': crystal.n_I,
        },
        label=label,
        extras={
            'res_m': res,
            'theta_I_rad': theta,
            'blur_sigma_m': blur_sigma_mc(g),
            'magnification': g.magnification,
        },
        experiment=dict(experiment or {}),
    )


def design_report_pc(g: GeometryPC, pump: GaussianPumpModel, label: str = "",
                     experiment: Optional[Dict[str, Any]] = None) -> DesignReport:
    c = g.crystal
    return DesignReport(
        configuration=Configuration.PC,
        res_fwhm=resolution_pc_fwhm(g),
        fov=fov_pc(pump, g.M_I),
        modes_per_direction=modes_pc(c, pump),
        inputs={
            'M_s': g.M_s, 'M_I': g.M_I, 'lambda_s_m': c.lambda_s, 'lambda_I_m': c.lambda_I,
            'w_p_m': pump.w_p, 'L_m': c.L, 'n_s': c.n_s, 'n_I': c.n_I,
        },
        label=label,
        extras={
            'd_min_m': d_min(g),
            'magnification': g.magnification,
        },
        experiment=dict(experiment or {}),
        footnotes=[INDEX_FOOTNOTE],
    )


def report_from_setup(setup: Dict[str, Any]) -> DesignReport:
    """Build a report from a flat parameter dictionary (SI keys with unit suffixes)"""
    try:
        crystal = CrystalModel(setup['crystal_length_m'], setup['n_signal'], setup['n_idler'],
                               setup['lambda_signal_m'], setup['lambda_idler_m'])
        pump = GaussianPumpModel(setup['pump_waist_m'])
        try:
            configuration = Configuration(str(setup['configuration']).upper())
        except ValueError:
            raise ValidationError(f"configuration must be MC or PC, got {setup['configuration']!r}") from None
        if configuration is Configuration.MC:
            g = GeometryMC(setup['f_idler_m'], setup.get('f_camera_m', setup['f_idler_m']),
                           crystal.lambda_s, crystal.lambda_I, pump)
            return design_report_mc(g, crystal, setup.get('label', ''), setup.get('experiment'))
        g = GeometryPC(setup.get('magnification_signal', 1.0), setup['magnification_idler'], crystal)
        return design_report_pc(g, pump, setup.get('label', ''), setup.get('experiment'))
    except KeyError as e:
        raise ValidationError(f"design setup is missing parameter {e}") from None


def comparison_report(setups: Sequence[Dict[str, Any]]) -> List[DesignReport]:
    """Design figures for every column of a comparison table"""
    if not setups:
        raise ValidationError("comparison report needs at least one setup")
    return [report_from_setup(setup) for setup in setups]
