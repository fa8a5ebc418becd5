"""Gradient bounds for positive heat-equation solutions under a Ricci lower bound.

The package builds evaluable bound pairs (beta(t), psi(t)) for the pointwise
inequality ``beta |grad log u|^2 - d/dt log u <= psi``, generates new pairs
from coefficient functions by endpoint-safe quadrature, audits the
hypothesis suites the constructions require, and verifies the inequality
against exact and numeric log-heat-kernel data on model spaces.
"""

from .context import BoundSample, EstimateContext
from .coefficients import (
    b5_residual,
    beta_from_b,
    bound_from_b,
    coefficient_preset,
    lixu_sinh_b,
    logderiv_identity_residual,
    ode_psi_solve,
    psi_from_b,
    qian_to_b,
    quadratic_a,
    sinh_sq_a,
    theta_power_a,
    theta_power_b,
)
from .conditions import (
    ConditionID,
    ConditionReport,
    ConditionVerdict,
    check_suite,
    integrability_at_zero,
    limit_at_zero,
)
from .errors import (
    BracketError,
    ConditionCheckError,
    DomainError,
    GradestError,
    HypothesisMismatchError,
    InvalidParameterError,
    QuadratureNonConvergenceError,
    SolverError,
    TableFormatError,
)
from .families import (
    GradientBound,
    bound_from_json,
    convert_form,
    convert_form_inverse,
    family_catalog,
    improvement_threshold,
    make_family,
)
from .manifolds import (
    LogHeatData,
    RadialSolverConfig,
    euclidean_gaussian,
    heat_residual,
    hyperbolic3_kernel,
    load_solution_csv,
    radial_heat_solve,
    refine,
    save_solution_csv,
)
from .quadrature import CumulativeIntegral, QuadratureSpec, integrate_from_zero
from .timefunc import TimeFunction, differentiate, differentiate_info, table_function
from .verifier import (
    AsymptoticResult,
    ComparisonTable,
    VerificationReport,
    asymptotic_limits,
    compare_bounds,
    find_crossover,
    improved_equals_qian_at_theta0,
    sharpness_limit,
    sharpness_ratio,
    verify_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
