"""Classical simulation of Chebyshev-series LCU for functions of sparse Hermitian matrices."""

from .amplify import AmplificationRun, amplify, amplify_explicit, optimal_rounds, reflections
from .chebyshev import (
    ChebyshevSeries,
    TaylorSpec,
    eval_series,
    eval_T,
    eval_U,
    monomial_cheb_coeffs,
    rescaled_cheb_coeffs,
    taylor_to_cheb,
    truncation_order,
)
from .errors import (
    BoundViolationError,
    CapabilityError,
    CheblcuError,
    DegenerateOutcomeError,
    DomainError,
    NumericalError,
)
from .functions import FunctionSpec, builtin, exp_repeated, homogeneous_rescale, parse_function
from .hermitian import SparseHermitian, exact_matrix_function, load_matrix, spectral_stats
from .lcu import LcuOutcome, LcuPlan, normalized_error_bound, run_lcu_full, run_lcu_operator, two_unitary_lcu
from .walk import WalkBlock, build_walk, chebyshev_states, walk_block

__version__ = "0.1.0"

__all__ = [
    "AmplificationRun",
    "BoundViolationError",
    "CapabilityError",
    "CheblcuError",
    "ChebyshevSeries",
    "DegenerateOutcomeError",
    "DomainError",
    "FunctionSpec",
    "LcuOutcome",
    "LcuPlan",
    "NumericalError",
    "SparseHermitian",
    "TaylorSpec",
    "WalkBlock",
    "amplify",
    "amplify_explicit",
    "build_walk",
    "builtin",
    "chebyshev_states",
    "eval_T",
    "eval_U",
    "eval_series",
    "exact_matrix_function",
    "exp_repeated",
    "homogeneous_rescale",
    "load_matrix",
    "monomial_cheb_coeffs",
    "normalized_error_bound",
    "optimal_rounds",
    "parse_function",
    "reflections",
    "rescaled_cheb_coeffs",
    "run_lcu_full",
    "run_lcu_operator",
    "spectral_stats",
    "taylor_to_cheb",
    "truncation_order",
    "two_unitary_lcu",
    "walk_block",
]
