"""Two-sided estimates of optimal constants in weighted Hardy-type inequalities."""

from .bounds import (
    BOUNDARIES,
    BoundsReport,
    HardySetup,
    SetupError,
    b_minus,
    b_plus,
    b_star,
    b_substar,
    balanced_theta,
    kappa,
    kappa0,
    split_bounds,
    two_sided,
)
from .catalog import CATALOG, catalog_setup
from .exact import (
    DEFAULT_READING,
    ImprovementChain,
    exact_A,
    improvement_chain,
    prop_A_star,
    prop_B,
    prop_delta1,
    prop_delta1_bar,
)
from .measure import (
    EllipticCoefficients,
    Interval,
    MeasureError,
    WeightedMeasure,
    cumulative,
    dual_measure,
    measures_from_elliptic,
)
from .oracle import OracleError, OracleResult, oracle_ergodic_nonlinear, oracle_linear, oracle_nonlinear
from .special import Exponents, conjugate, k_factor

__version__ = "0.1.0"

__all__ = [
    "BOUNDARIES",
    "BoundsReport",
    "CATALOG",
    "DEFAULT_READING",
    "EllipticCoefficients",
    "Exponents",
    "HardySetup",
    "ImprovementChain",
    "Interval",
    "MeasureError",
    "OracleError",
    "OracleResult",
    "SetupError",
    "WeightedMeasure",
    "b_minus",
    "b_plus",
    "b_star",
    "b_substar",
    "balanced_theta",
    "catalog_setup",
    "conjugate",
    "cumulative",
    "dual_measure",
    "exact_A",
    "improvement_chain",
    "k_factor",
    "kappa",
    "kappa0",
    "measures_from_elliptic",
    "oracle_ergodic_nonlinear",
    "oracle_linear",
    "oracle_nonlinear",
    "prop_A_star",
    "prop_B",
    "prop_delta1",
    "prop_delta1_bar",
    "split_bounds",
    "two_sided",
]
