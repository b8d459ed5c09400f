"""Inner approximations: feasible points of S from invariant ellipsoids.

If E is invariant under the dynamics (G E subseteq E) and contained in P,
then any x whose first r - 1 iterates stay in P and whose r-th iterate lands
in E has its entire orbit in P.  These sets

    I_r(E) = S_{r-1}  intersect  {x : G^r x in E}

grow with r, squeeze between S_r and S, and their optima give certified
upper bounds on the optimal value, each with a feasible witness.

Two ways to pick the ellipsoid are provided: a fixed one from the Lyapunov
equation (quadratic programs, one per level), and one optimized jointly with
x by a semidefinite program per level.  The SDP is stated over the inverse
shape Q = H^{-1}: containment of E = {z : z^T H z <= 1} in the unit-rhs
polytope is the polar condition a_i^T Q a_i <= 1, invariance becomes
G Q G^T <= Q, and the membership of G^r x in E becomes a Schur-complement
block.  Equivalence of the two parameterizations is checkable numerically
with schur_polar_equivalence_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    Ellipsoid,
    InfeasibleLevel,
    InvalidInvariantSet,
    MultiEllipsoid,
    RdoInstance,
    Tolerances,
    UnstableDynamics,
    _frozen,
    normalize_rhs,
)
from .numlin import solve_discrete_lyapunov, spectral_radius
from .outer import check_bounded, inscribed_level
from .solverapi import (
    BorderTerm,
    ConicProblem,
    LinearConstraint,
    MatrixTerm,
    QuadConstraint,
    SemidefConstraint,
    SolveStatus,
    SolverConfig,
    DEFAULT_CONFIG,
    solve_qcqp,
    solve_sdp,
)

__all__ = [
    "InnerLevel",
    "default_invariant_ellipsoid",
    "validate_invariant_ellipsoid",
    "inner_bound_qp",
    "inner_sdp",
    "schur_polar_equivalence_check",
    "pd_inverse",
]


@dataclass(frozen=True, eq=False)
class InnerLevel:
    """One level of an inner hierarchy: upper bound value, the witness that
    attains it, and the invariant set that certifies it."""

    r: int
    value: float
    witness: np.ndarray | None
    ellipsoid: Ellipsoid | MultiEllipsoid | None

    def __post_init__(self):
        if self.witness is not None:
            object.__setattr__(self, "witness", _frozen(self.witness))


def pd_inverse(Q: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Symmetric inverse with an eigenvalue floor.

    Near-singular shape matrices coming out of an SDP are inverted through
    their eigendecomposition with eigenvalues clipped from below at
    eps_psd * trace(Q) / n, so the result is always symmetric positive
    definite.
    """
    Q = 0.5 * (Q + Q.T)
    w, V = np.linalg.eigh(Q)
    n = Q.shape[0]
    floor = max(tol.eps_psd * float(np.trace(Q)) / n, np.finfo(float).tiny)
    w = np.maximum(w, floor)
    return (V / w) @ V.T


def default_invariant_ellipsoid(
    inst: RdoInstance, tol: Tolerances = DEFAULT_TOL
) -> Ellipsoid:
    """The Lyapunov sublevel set {x : x^T M x <= alpha} with M solving
    G^T M G - M = -I and alpha the largest level still inside P."""
    if inst.dynamics.s != 1:
        raise ValueError("the default ellipsoid is defined for a single matrix")
    M = solve_discrete_lyapunov(inst.dynamics.matrices[0], tol)
    alpha = inscribed_level(inst.polytope, M)
    if not (0.0 < alpha < math.inf):
        raise InvalidInvariantSet(
            f"no positive sublevel set of the Lyapunov form fits inside P (alpha={alpha})"
        )
    return Ellipsoid(M, alpha)


def validate_invariant_ellipsoid(
    inst: RdoInstance, ell: Ellipsoid, tol: Tolerances = DEFAULT_TOL
) -> None:
    """Raise InvalidInvariantSet unless G E subseteq E and E subseteq P."""
    G = inst.dynamics.matrices[0]
    M = ell.M
    slack = np.linalg.eigvalsh(M - G.T @ M @ G)[0]
    if slack < -tol.eps_psd * max(1.0, float(np.trace(M))):
        raise InvalidInvariantSet(
            f"ellipsoid is not invariant: min eig of M - G^T M G is {slack:.3e}"
        )
    for a, b in zip(inst.polytope.A, inst.polytope.b):
        if not np.any(a):
            continue
        sup = ell.support(a)
        if sup > b + tol.eps_feas * (1.0 + abs(b)):
            raise InvalidInvariantSet(
                f"ellipsoid leaves P: support {sup:.6g} exceeds bound {b:.6g}"
            )


def inner_bound_qp(
    inst: RdoInstance,
    ell: Ellipsoid,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
) -> InnerLevel:
    """min c^T x over I_r(E) for a fixed invariant ellipsoid E.

    One convex quadratic constraint pins G^r x inside E; the first r orbit
    points satisfy the polytope rows directly.
    """
    validate_invariant_ellipsoid(inst, ell, tol)
    G = inst.dynamics.matrices[0]
    A, b = inst.polytope.A, inst.polytope.b
    n = inst.n
    W = np.linalg.matrix_power(G, r)
    quad = QuadConstraint("x", W.T @ ell.M @ W, ell.alpha)
    lin_rows = []
    lin_rhs = []
    Gk = np.eye(n)
    for _ in range(r):
        lin_rows.append(A @ Gk)
        lin_rhs.append(b)
        Gk = Gk @ G
    linear = ()
    if lin_rows:
        linear = (LinearConstraint({"x": np.vstack(lin_rows)}, np.concatenate(lin_rhs)),)
    prob = ConicProblem(
        vector_vars={"x": n},
        objective={"x": inst.c},
        linear=linear,
        quadratic=(quad,),
    )
    res = solve_qcqp(prob, config, tol)
    if res.status is SolveStatus.OPTIMAL:
        return InnerLevel(r, res.value, res.assignment["x"], ell)
    if res.status is SolveStatus.UNBOUNDED:
        return InnerLevel(r, -math.inf, None, ell)
    if res.status is SolveStatus.INFEASIBLE:
        raise InfeasibleLevel(f"inner quadratic program infeasible at r={r}")
    raise RuntimeError(f"QP solver failed at level {r}: {res.status}")


def inner_sdp(
    inst: RdoInstance,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
) -> InnerLevel:
    """Level-r inner bound with the ellipsoid optimized per level.

    Decision variables are x and the inverse shape Q of an invariant
    ellipsoid E_r contained in P; the program is

        min  c^T x
        s.t. Q >= eps_strict * I,        G Q G^T <= Q,
             a_i^T Q a_i <= 1            for every row of the unit-rhs P,
             [[Q, G^r x], [(G^r x)^T, 1]] >= 0,
             A G^k x <= 1                for k < r.

    The instance is rescaled to a unit right-hand side first, which needs
    the origin strictly inside P; the dynamics must be stable and P bounded.
    """
    if inst.dynamics.s != 1:
        raise ValueError("inner_sdp is defined for a single matrix")
    G = inst.dynamics.matrices[0]
    rho = spectral_radius(G)
    if rho >= 1.0 - tol.rho_margin:
        raise UnstableDynamics(f"rho(G) = {rho} not below 1")
    norm = normalize_rhs(inst)
    check_bounded(norm.polytope)
    A = norm.polytope.A
    n = norm.n
    W = np.linalg.matrix_power(G, r)

    semidef = [
        SemidefConstraint(
            dim=n,
            terms=(MatrixTerm(1.0, "Q"),),
            const=-tol.eps_strict * np.eye(n),
            label="Q-definite",
        ),
        SemidefConstraint(
            dim=n,
            terms=(MatrixTerm(1.0, "Q"), MatrixTerm(-1.0, "Q", G)),
            label="invariance",
        ),
        SemidefConstraint(
            dim=n,
            terms=(MatrixTerm(1.0, "Q"),),
            border=BorderTerm("x", W, 1.0),
            label="membership",
        ),
    ]
    contain = np.einsum("ij,ik->ijk", A, A)
    linear = [LinearConstraint({"Q": contain}, np.ones(A.shape[0]))]
    if r > 0:
        rows = []
        Gk = np.eye(n)
        for _ in range(r):
            rows.append(A @ Gk)
            Gk = Gk @ G
        linear.append(LinearConstraint({"x": np.vstack(rows)}, np.ones(r * A.shape[0])))

    prob = ConicProblem(
        vector_vars={"x": n},
        matrix_vars={"Q": n},
        objective={"x": norm.c},
        linear=tuple(linear),
        semidef=tuple(semidef),
    )
    res = solve_sdp(prob, config, tol)
    if res.status is SolveStatus.INFEASIBLE:
        raise InfeasibleLevel(f"inner semidefinite program infeasible at r={r}")
    if res.status is not SolveStatus.OPTIMAL:
        raise RuntimeError(f"SDP solver failed at level {r}: {res.status}")
    H = pd_inverse(res.assignment["Q"], tol)
    return InnerLevel(r, res.value, res.assignment["x"], Ellipsoid(H, 1.0))


def _orbit_rows_ok(A: np.ndarray, G: np.ndarray, x: np.ndarray, r: int, eps: float) -> bool:
    xk = x
    for _ in range(r):
        if np.max(A @ xk) > 1.0 + eps:
            return False
        xk = G @ xk
    return True


def schur_polar_equivalence_check(
    x: np.ndarray,
    H: np.ndarray,
    inst: RdoInstance,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
) -> bool:
    """Evaluate the same candidate (x, H) in both parameterizations and
    report whether the two feasibility verdicts agree.

    The ellipsoidal form asks: H positive definite, G^T H G <= H,
    E = {z : z^T H z <= 1} inside the unit-rhs polytope, (G^r x)^T H G^r x
    <= 1, and the first r orbit points inside P.  The polar form asks the
    same of Q = H^{-1}: G Q G^T <= Q, a_i^T Q a_i <= 1, and the bordered
    Schur block [[Q, G^r x], [(G^r x)^T, 1]] >= 0.  The two are equivalent,
    so the verdicts must match away from tolerance-sized boundary cases.
    """
    norm = normalize_rhs(inst)
    G = norm.dynamics.matrices[0]
    A = norm.polytope.A
    H = 0.5 * (np.asarray(H, dtype=float) + np.asarray(H, dtype=float).T)
    x = np.asarray(x, dtype=float)
    W = np.linalg.matrix_power(G, r)
    v = W @ x
    eps = tol.eps_feas

    wH = np.linalg.eigvalsh(H)
    if wH[0] <= 0:
        return True  # not a definite shape: both sides reject it
    Q = pd_inverse(H, tol)

    def psd(Mat: np.ndarray) -> bool:
        lam = np.linalg.eigvalsh(Mat)[0]
        return lam >= -tol.eps_psd * max(1.0, abs(float(np.trace(Mat))))

    lin_ok = _orbit_rows_ok(A, G, x, r, eps)
    contain = np.einsum("ij,jk,ik->i", A, Q, A)
    contain_ok = bool(np.max(contain) <= 1.0 + eps)

    feas_ell = (
        psd(H - G.T @ H @ G)
        and contain_ok
        and float(v @ H @ v) <= 1.0 + eps
        and lin_ok
    )

    block = np.empty((norm.n + 1, norm.n + 1))
    block[: norm.n, : norm.n] = Q
    block[: norm.n, -1] = v
    block[-1, : norm.n] = v
    block[-1, -1] = 1.0
    feas_polar = (
        psd(Q - G @ Q @ G.T)
        and contain_ok
        and psd(block)
        and lin_ok
    )
    return feas_ell == feas_polar
