"""Robust-to-dynamics linear programming.

Minimize c^T x over the points of a polytope P = {x : Ax <= b} whose entire
trajectory under x_{k+1} = G x_k (or any switching sequence over a finite
family of matrices) remains in P.  The feasible set is approximated from
the outside by finitely many linear constraints and from the inside by
ellipsoidal invariant sets, giving certified lower and upper bounds that
meet when either hierarchy becomes exact.
"""

from .core import (
    BoundLedger,
    BoundStatus,
    BracketFailure,
    DEFAULT_TOL,
    DimensionMismatch,
    DimensionNotPlottable,
    Dynamics,
    EigenFailure,
    Ellipsoid,
    EmptyPolytope,
    EmptyPolytopeRow,
    ExcludedAt,
    InfeasibleLevel,
    InsideUpTo,
    InvalidInvariantSet,
    LedgerOrderError,
    LedgerRow,
    MultiEllipsoid,
    NonConvexQuadratic,
    NonFiniteEntry,
    OriginNotInterior,
    ParseError,
    Polytope,
    ProductCapExceeded,
    RdoError,
    RdoInstance,
    RhoStarViolated,
    SingularSystem,
    Tolerances,
    UnboundedPolytope,
    UnstableDynamics,
    ValidationError,
    membership_by_simulation,
    normalize_rhs,
    validate_instance,
)
from .numlin import (
    PRODUCT_CAP,
    ProductWord,
    enumerate_products,
    gershgorin_lambda_max,
    joint_norm_bound,
    products_up_to,
    solve_discrete_lyapunov,
    spectral_radius,
)
from .solverapi import SolverConfig, DEFAULT_CONFIG, SolveStatus
from .outer import (
    OuterLevel,
    StepBound,
    check_bounded,
    check_origin_interior,
    convergence_bound,
    convergence_bound_fixed_rho,
    fixed_point_reached,
    inscribed_level,
    lower_bound,
    solve_outer,
    stack_constraints,
)
from .inner import (
    InnerLevel,
    default_invariant_ellipsoid,
    inner_bound_qp,
    inner_sdp,
    pd_inverse,
    schur_polar_equivalence_check,
    validate_invariant_ellipsoid,
)
from .switched import (
    JsrBounds,
    PathCompleteCertificate,
    jsr_lower_bound,
    jsr_upper_bound,
    multi_ellipsoid_invariant_set,
    path_complete_feasible,
    switched_fixed_point,
    switched_inner_qp,
    switched_inner_sdp,
    switched_lower_bound,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundLedger",
    "BoundStatus",
    "BracketFailure",
    "DEFAULT_TOL",
    "DEFAULT_CONFIG",
    "DimensionMismatch",
    "DimensionNotPlottable",
    "Dynamics",
    "EigenFailure",
    "Ellipsoid",
    "EmptyPolytope",
    "EmptyPolytopeRow",
    "ExcludedAt",
    "InfeasibleLevel",
    "InnerLevel",
    "InsideUpTo",
    "InvalidInvariantSet",
    "JsrBounds",
    "LedgerOrderError",
    "LedgerRow",
    "MultiEllipsoid",
    "NonConvexQuadratic",
    "NonFiniteEntry",
    "OriginNotInterior",
    "OuterLevel",
    "PRODUCT_CAP",
    "ParseError",
    "PathCompleteCertificate",
    "Polytope",
    "ProductCapExceeded",
    "ProductWord",
    "RdoError",
    "RdoInstance",
    "RhoStarViolated",
    "SingularSystem",
    "SolveStatus",
    "SolverConfig",
    "StepBound",
    "Tolerances",
    "UnboundedPolytope",
    "UnstableDynamics",
    "ValidationError",
    "check_bounded",
    "check_origin_interior",
    "convergence_bound",
    "convergence_bound_fixed_rho",
    "default_invariant_ellipsoid",
    "enumerate_products",
    "fixed_point_reached",
    "gershgorin_lambda_max",
    "inner_bound_qp",
    "inner_sdp",
    "pd_inverse",
    "schur_polar_equivalence_check",
    "inscribed_level",
    "joint_norm_bound",
    "jsr_lower_bound",
    "jsr_upper_bound",
    "lower_bound",
    "membership_by_simulation",
    "multi_ellipsoid_invariant_set",
    "normalize_rhs",
    "path_complete_feasible",
    "products_up_to",
    "solve_discrete_lyapunov",
    "solve_outer",
    "spectral_radius",
    "stack_constraints",
    "switched_fixed_point",
    "switched_inner_qp",
    "switched_inner_sdp",
    "switched_lower_bound",
    "validate_instance",
    "validate_invariant_ellipsoid",
    "verify_certificate",
]
