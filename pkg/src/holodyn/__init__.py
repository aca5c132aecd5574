"""Desk-scale laboratory for convolution operators on spaces of entire functions."""
__version__ = "0.1.0"

from .taylor import (
    HomogeneousPart,
    MultiIndex,
    TaylorPoly,
    add,
    directional_derivative,
    evaluate,
    exp_of_linear,
    monomial,
    partial_derivative,
    scale,
    taylor_shift,
)
from .norms import (
    BOMBIERI,
    COEFF_L1,
    Flavor,
    NormBackend,
    NormKind,
    SeminormFamily,
    c_eps,
    c_kl_bound,
    c_kl_relaxed,
    check_holomorphy_type,
    hom_norm,
    limsup_type,
    seminorm,
)
from .convolution import (
    OperatorSymbol,
    SymbolKind,
    alpha_estimate,
    apply,
    borel_eval,
    check_commutation,
    fit_exponential_slice,
    functional_of,
    verify_exp_restriction,
)
from .spectral import (
    EigenCurve,
    RandomSeriesSpec,
    Taper,
    X0Element,
    build_curve,
    check_fhc_criterion,
    circle_vector,
    sample_candidate,
    shift_u,
)
from .dynamics import (
    FrechetMetric,
    UnitCircleArcs,
    growth_fit,
    run_orbit,
    span_density_residual,
)
