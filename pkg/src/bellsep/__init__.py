"""Checks of Bell-type bounds for separable states and Mermin-Klyshko operators."""

__version__ = "0.1.0"

from .bell_operators import (
    MeasurementSettings,
    MKCoefficients,
    chen_operator,
    check_spectrum_identity,
    mk_coefficients,
    mk_operator,
    variance,
    vn_decomposition_check,
)
from .errors import (
    BellsepError,
    CapacityError,
    IdentityViolationError,
    InfeasibleError,
    InvalidInputError,
    ParseError,
)
from .lhv_models import (
    DeterministicStrategy,
    LHVModel,
    chen_claimed_bound,
    lhv_correlation,
    lhv_max,
    mk_value_lhv,
    monte_carlo_correlation,
    spectrum_matching_lhv,
    synthesize_lhv,
)
from .ncpoly import (
    Mode,
    NCPolynomial,
    canonicalize,
    classical_max,
    lhv_counterpart,
    mk_polynomial,
    multiply,
    parse_polynomial,
    serialize,
    to_matrix,
)
from .settings_opt import operator_norm, optimize_mk, optimize_separable_v
from .tensor_core import (
    SeparableState,
    densify,
    expectation,
    ghz_state,
    kron,
    observable_from_bloch,
    random_separable,
)
