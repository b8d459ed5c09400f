"""Outer polyhedral approximations of the robust feasible set.

The feasible set S collects the initial conditions whose whole forward orbit
stays in P.  Truncating the orbit at depth r gives the polyhedron

    S_r = { x : A G_w x <= b  for every word w of length <= r },

a nested outer approximation (S_0 = P, S_{r+1} subseteq S_r) whose linear
programs give nondecreasing lower bounds on the optimal value.

Math
----
Two exactness tools are implemented.  First, a finite fixed-point test:
S_r = S_{r+1} holds iff for every row a_i, b_i of P and every word w of
length r + 1,

    max { a_i^T G_w x : x in S_r } <= b_i,

and S_r = S_{r+1} already implies S_r = S.  Second, for a single stable
matrix an a-priori step bound: with M solving G^T M G - M = -I, the largest
sublevel set {x^T M x <= alpha_1} inside P, an upper bound alpha_2 on
x^T M x over P, and a contraction factor gamma < 1 for the M-weighted
quadratic along the flow, the fixed point is reached at

    r_bar = ceil( (alpha_2 / alpha_1 - 1) / (1 - gamma) ).

A sharper variant assumes a known bound rho(G) <= rho_star < 1, rescales
G by rho_hat = (1 + rho_star) / 2, and uses gamma_hat = rho_hat^2 in the
logarithmic form ceil( log(alpha_2 / alpha_1) / log(1 / gamma_hat) ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    BoundLedger,
    BoundStatus,
    EmptyPolytope,
    LedgerRow,
    OriginNotInterior,
    Polytope,
    ProductCapExceeded,
    RdoInstance,
    RhoStarViolated,
    Tolerances,
    UnboundedPolytope,
    _frozen,
)
from .numlin import (
    PRODUCT_CAP,
    enumerate_products,
    gershgorin_lambda_max,
    solve_discrete_lyapunov,
    spectral_radius,
)
from .solverapi import ConicProblem, LinearConstraint, SolveStatus, solve_lp

__all__ = [
    "OuterLevel",
    "StepBound",
    "stack_constraints",
    "inscribed_level",
    "check_bounded",
    "check_origin_interior",
    "lower_bound",
    "fixed_point_reached",
    "solve_outer",
    "convergence_bound",
    "convergence_bound_fixed_rho",
]


@dataclass(frozen=True, eq=False)
class OuterLevel:
    """One level of the hierarchy: the stacked constraints of S_r and the
    LP value min c^T x over it.  lower is -inf when the LP is unbounded and
    +inf when S_r is empty."""

    r: int
    rows: np.ndarray
    rhs: np.ndarray
    lower: float
    witness: np.ndarray | None

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(self.rows))
        object.__setattr__(self, "rhs", _frozen(self.rhs))
        if self.witness is not None:
            object.__setattr__(self, "witness", _frozen(self.witness))


@dataclass(frozen=True, eq=False)
class StepBound:
    """Certified depth r_bar at which S_r stops shrinking, plus the
    quantities that produced it."""

    M: np.ndarray
    alpha1: float
    alpha2: float
    gamma: float
    r_bar: int

    def __post_init__(self):
        object.__setattr__(self, "M", _frozen(self.M))


def stack_constraints(
    inst: RdoInstance, r: int, cap: int = PRODUCT_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """Rows (A G_w, b) over all words of length <= r, level by level."""
    A, b = inst.polytope.A, inst.polytope.b
    rows = []
    rhs = []
    for k in range(r + 1):
        for w in enumerate_products(inst.dynamics, k, cap):
            rows.append(A @ w.matrix)
            rhs.append(b)
    return np.vstack(rows), np.concatenate(rhs)


def _lp_min(c: np.ndarray, rows: np.ndarray, rhs: np.ndarray):
    prob = ConicProblem(
        vector_vars={"x": rows.shape[1]},
        objective={"x": c},
        linear=(LinearConstraint({"x": rows}, rhs),),
    )
    return solve_lp(prob)


def check_bounded(polytope: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate bounds of P from 2n support LPs.

    Returns (lo, hi) with lo_i = min x_i, hi_i = max x_i over P.  Raises
    UnboundedPolytope or EmptyPolytope when P has no box bounds.
    """
    n = polytope.n
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for sign, out in ((1.0, lo), (-1.0, hi)):
            res = _lp_min(sign * e, polytope.A, polytope.b)
            if res.status is SolveStatus.INFEASIBLE:
                raise EmptyPolytope("polytope has no points")
            if res.status is not SolveStatus.OPTIMAL:
                raise UnboundedPolytope(f"polytope is unbounded in coordinate {i}")
            out[i] = sign * res.value
    return lo, hi


def check_origin_interior(polytope: Polytope) -> bool:
    """True when every b_i is strictly positive, which places the origin in
    the interior of P (rows with a_i = 0 aside)."""
    return bool(np.all(polytope.b > 0))


def lower_bound(
    inst: RdoInstance, r: int, cap: int = PRODUCT_CAP
) -> OuterLevel:
    """min c^T x over S_r; a lower bound on the optimal value since
    S_r contains S."""
    rows, rhs = stack_constraints(inst, r, cap)
    res = _lp_min(inst.c, rows, rhs)
    if res.status is SolveStatus.OPTIMAL:
        return OuterLevel(r, rows, rhs, res.value, res.assignment["x"])
    if res.status is SolveStatus.UNBOUNDED:
        return OuterLevel(r, rows, rhs, -math.inf, None)
    if res.status is SolveStatus.INFEASIBLE:
        return OuterLevel(r, rows, rhs, math.inf, None)
    raise RuntimeError(f"LP solver failed at level {r}: {res.status}")


def fixed_point_reached(
    inst: RdoInstance,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    cap: int = PRODUCT_CAP,
) -> bool:
    """Exactness test: S_r = S_{r+1} (hence S_r = S).

    Solves one support LP per polytope row and per word of length r + 1 and
    compares against b_i with relative slack eps_fp * (1 + |b_i|).  An
    unbounded support LP refutes the fixed point; an infeasible one means
    S_r is empty, which is trivially fixed.
    """
    A, b = inst.polytope.A, inst.polytope.b
    rows, rhs = stack_constraints(inst, r, cap)
    for w in enumerate_products(inst.dynamics, r + 1, cap):
        AW = A @ w.matrix
        for i in range(A.shape[0]):
            res = _lp_min(-AW[i], rows, rhs)
            if res.status is SolveStatus.INFEASIBLE:
                return True
            if res.status is not SolveStatus.OPTIMAL:
                return False
            if -res.value > b[i] + tol.eps_fp * (1.0 + abs(b[i])):
                return False
    return True


def solve_outer(
    inst: RdoInstance,
    r_max: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
    cap: int = PRODUCT_CAP,
) -> BoundLedger:
    """Run the hierarchy until the fixed point certifies exactness, the
    level LP becomes infeasible, or r_max levels are exhausted."""
    if r_max is None:
        r_max = 64 if inst.dynamics.s == 1 else 12
    rows: list[LedgerRow] = []
    capped = False
    for r in range(r_max + 1):
        try:
            level = lower_bound(inst, r, cap)
        except ProductCapExceeded:
            capped = True
            break
        if level.lower == math.inf:
            rows.append(LedgerRow(r, None, None, None, BoundStatus.INFEASIBLE))
            break
        try:
            fixed = fixed_point_reached(inst, r, tol, cap)
        except ProductCapExceeded:
            fixed = False
        if fixed:
            rows.append(
                LedgerRow(r, level.lower, None, level.witness, BoundStatus.FIXED_POINT)
            )
            break
        rows.append(LedgerRow(r, level.lower, None, level.witness, BoundStatus.OPEN))
    else:
        capped = True
    if capped and rows:
        last = rows[-1]
        rows[-1] = LedgerRow(
            last.r, last.lower, last.upper, last.witness, BoundStatus.LEVEL_CAP_REACHED
        )
    return BoundLedger(tuple(rows))


def inscribed_level(polytope: Polytope, M: np.ndarray) -> float:
    """Largest alpha with {x : x^T M x <= alpha} inside P: the tightest of
    b_i^2 / (a_i^T M^{-1} a_i) over the nonvacuous rows.  Requires every
    b_i > 0; rows with a_i = 0 impose nothing and are skipped."""
    Minv_at = np.linalg.solve(M, polytope.A.T)
    vals = np.einsum("ij,ji->i", polytope.A, Minv_at)
    alpha = math.inf
    for bi, vi in zip(polytope.b, vals):
        if vi <= 0:
            continue
        alpha = min(alpha, bi * bi / vi)
    return alpha


def _alpha2(M: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """Upper bound on x^T M x over the box [lo, hi] containing P, summing the
    worst corner product for every entry of M."""
    w = np.maximum(np.abs(lo), np.abs(hi))
    return float(w @ np.abs(M) @ w)


def _single_matrix(inst: RdoInstance) -> np.ndarray:
    if inst.dynamics.s != 1:
        raise ValueError("step bounds are defined for single-matrix dynamics only")
    return inst.dynamics.matrices[0]


def convergence_bound(inst: RdoInstance, tol: Tolerances = DEFAULT_TOL) -> StepBound:
    """A-priori depth that certifies S_r = S, for a stable single matrix and
    a bounded polytope with the origin interior."""
    G = _single_matrix(inst)
    M = solve_discrete_lyapunov(G, tol)
    if not check_origin_interior(inst.polytope):
        raise OriginNotInterior("the step bound needs every b_i > 0")
    lo, hi = check_bounded(inst.polytope)
    a1 = inscribed_level(inst.polytope, M)
    a2 = _alpha2(M, lo, hi)
    gamma = 1.0 - 1.0 / gershgorin_lambda_max(M)
    r_bar = math.ceil((a2 / a1 - 1.0) / (1.0 - gamma))
    return StepBound(M, a1, a2, gamma, max(0, r_bar))


def convergence_bound_fixed_rho(
    inst: RdoInstance, rho_star: float, tol: Tolerances = DEFAULT_TOL
) -> StepBound:
    """Step bound under a known spectral radius bound rho(G) <= rho_star < 1.

    Rescaling by rho_hat = (1 + rho_star) / 2 makes the quadratic decay rate
    gamma_hat = rho_hat^2 explicit, which usually tightens the depth to

        ceil( log(alpha_2 / alpha_1) / log(1 / gamma_hat) )

    computed for the rescaled matrix.
    """
    G = _single_matrix(inst)
    if not (0.0 < rho_star < 1.0):
        raise ValueError(f"rho_star must lie in (0, 1), got {rho_star}")
    rho = spectral_radius(G)
    if rho > rho_star:
        raise RhoStarViolated(f"rho(G) = {rho} exceeds the declared bound {rho_star}")
    rho_hat = 0.5 * (1.0 + rho_star)
    M = solve_discrete_lyapunov(G / rho_hat, tol)
    if not check_origin_interior(inst.polytope):
        raise OriginNotInterior("the step bound needs every b_i > 0")
    lo, hi = check_bounded(inst.polytope)
    a1 = inscribed_level(inst.polytope, M)
    a2 = _alpha2(M, lo, hi)
    gamma = rho_hat * rho_hat
    r_bar = math.ceil(math.log(a2 / a1) / math.log(1.0 / gamma))
    return StepBound(M, a1, a2, gamma, max(0, r_bar))
