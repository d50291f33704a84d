"""Oscillatory integrals with rough symbols.

Resolved quadrature for e^{i lam phi(lam, x, y)} a(lam, x, y) dx, the
stationary-phase extraction of b(lam, y), nondegeneracy checks on phase
families, and log-log fitting of measured decay against theoretical bounds.
"""

from .analysis import (
    BoundCheck,
    DecayFit,
    annulus_bound,
    annulus_exponent,
    check_bound,
    fit_decay,
    mu_scaling_fit,
    theorem_bound,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    DimensionUnsupported,
    NoConvergence,
    OscBoundError,
    OutOfRegime,
    RadiusExceedsDomain,
    SingularHessian,
    StencilOutOfDomain,
    TooFewPoints,
    ZeroBound,
)
from .oscquad import Cutoff, QuadResult, QuadSpec, RadialCutoff, integrate, integrate_weighted
from .phases import (
    CallablePhase,
    CriticalPoint,
    CubicPhase,
    PhaseModel,
    PsiPerturbedPhase,
    QuadraticPhase,
    SeparablePhase,
    find_critical_point,
    make_nonexample_cubic,
    make_nonexample_psi,
    make_perturbed_phase,
    make_schrodinger_phase,
)
from .stationary import (
    BDerivative,
    BSample,
    QuadratureNoiseWarning,
    SplitResult,
    b_derivative,
    b_derivative_sample,
    extract_b,
    leading_order,
    local_form_residual,
    vdc_split,
)
from .symbols import (
    ChirpSymbol,
    GaussianSymbol,
    RegularityReport,
    ShrinkingBump,
    SmoothBump,
    SymbolModel,
    ZeroSymbol,
    check_symbol_regularity,
    make_chirp_symbol,
    make_gaussian_symbol,
    make_shrinking_bump,
    make_smooth_bump,
    symbol_derivative_sup,
)
from .validator import Thresholds, ValidationReport, validate_phase

__version__ = "0.1.0"
