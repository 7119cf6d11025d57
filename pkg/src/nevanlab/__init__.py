"""Numerical and exact laboratory for Nevanlinna theory of holomorphic curves in P^n."""

from .config import get_precision, precision, set_precision
from .errors import HypothesisViolation, NevanlabError, NumericFailure
from .jets import SATURATED, JetSeries, series_arith, vanishing_order
from .curve import HoloCurve, curve_jet_at, curve_norm_log, parse_expr
from .divisor import UNDEFINED, Arrangement, Hypersurface, LineBundleO, gamma, general_position, pullback
from .jetdiff import (
    GGJetDifferential,
    JetTerm,
    jetdiff_eval,
    metric_norm_eval,
    pole_order,
    truncation_order,
    wronskian_eval,
)
from .radial import (
    RadialProfile,
    ZeroSet,
    characteristic_T,
    circle_integral,
    counting_N,
    fmt_residual,
    logderiv_bound_check,
    main_lemma_check,
    proximity_m,
    zero_set,
)
from .smt import (
    CartanWronskian,
    DefectEstimate,
    GeneralJetDiff,
    SMTReport,
    defect_consistency,
    defect_estimate,
    defect_lower_bound,
    defect_relation_margin,
    error_term_S,
    smt_margin,
)
from .brotbek import alpha_threshold, decompose, degree_bound, params, verify_chain

__version__ = "0.1.0"
