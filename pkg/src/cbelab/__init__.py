"""Solver laboratory for the nonlinear collision-induced breakage equation.

One finite-volume scheme and two homotopy-series schemes share a common grid
and case registry; the CLI reproduces the benchmark tables and figure data as
deterministic CSV files.
"""

from .cases import (
    CaseSpec,
    ConstantKernel,
    CustomIC,
    CustomKernel,
    DiscreteFragmentsBreakage,
    ExactReference,
    ExponentialIC,
    MassUniformBreakage,
    ProductKernel,
    WeightedExponentialIC,
    breakage_mass_residual,
    case_ids,
    exact_concentration,
    exact_moment,
    fragment_count,
    kernel_eval,
    registry_case,
    with_overrides,
)
from .errors import (
    CbelabError,
    DivergenceError,
    DomainError,
    GridMismatchError,
    NoExactReferenceError,
    NoOracleError,
    NumericalError,
    StiffnessError,
    UnknownCaseError,
)
from .fvm import (
    FragWeights,
    FvmSolution,
    StepperConfig,
    fvm_rhs,
    integrate,
    precompute_weights,
)
from .grid import (
    Grid,
    GridFunction,
    build_grid,
    interp_eval,
    l1_distance,
    l1_norm,
    project_initial,
    quad_moment,
    weighted_norm,
)
from .metrics import (
    EocReport,
    MomentTable,
    abs_error_grid,
    consecutive_term_norm,
    eoc,
    geometric_error_bound,
    ham_contraction,
    moments_over_time,
    number_error,
)
from .series import (
    AlphaResult,
    CollocationSpec,
    SeriesSolution,
    TimePoly,
    ahpm_terms,
    averaged_residual,
    birth_apply,
    death_apply,
    default_collocation,
    ham_terms,
    optimize_alpha,
    oracle_table,
    oracle_terms,
    poly_antiderivative,
    poly_mul,
    residual,
    taylor_term,
    truncated_sum,
)

__version__ = "0.1.0"
