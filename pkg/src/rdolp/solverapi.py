"""Thin declarative layer over the LP / QCQP / SDP solvers.

Problems are plain data (variables, linear rows, quadratic forms, affine
semidefinite blocks) so that any returned assignment can be re-checked
numerically without going through a solver.  Linear programs are dispatched
to HiGHS via scipy; quadratically constrained and semidefinite programs are
compiled through cvxpy against a configurable conic backend.

Strict definiteness never reaches a solver directly: callers encode
H > 0 as H >= eps_strict * I, and pure feasibility questions are posed as
max-margin problems (maximize t such that every flagged block dominates
t * I) whose optimum reports how strictly feasible the system is.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from .core import DEFAULT_TOL, NonConvexQuadratic, Tolerances

__all__ = [
    "SolveStatus",
    "SolverConfig",
    "DEFAULT_CONFIG",
    "LinearConstraint",
    "QuadConstraint",
    "MatrixTerm",
    "BorderTerm",
    "SemidefConstraint",
    "ConicProblem",
    "SolveResult",
    "solve_lp",
    "solve_qcqp",
    "solve_sdp",
    "check_assignment",
]


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_ERROR = "numerical-error"


@dataclass(frozen=True)
class SolverConfig:
    """Conic backend selection; the cvxpy solver name (CLARABEL, SCS, ...)."""

    backend: str = "CLARABEL"


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """sum_v coeffs[v] . v <= rhs, rowwise.

    For a vector variable the coefficient block has shape (k, len); for a
    symmetric matrix variable it has shape (k, n, n) and row i contributes
    <coeffs[v][i], V> = sum_jk coeffs[v][i, j, k] V[j, k].
    """

    coeffs: Mapping[str, np.ndarray]
    rhs: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", {k: np.asarray(v, dtype=float) for k, v in self.coeffs.items()}
        )
        object.__setattr__(self, "rhs", np.atleast_1d(np.asarray(self.rhs, dtype=float)))


@dataclass(frozen=True, eq=False)
class QuadConstraint:
    """v^T Q v <= rhs with Q symmetric positive semidefinite."""

    var: str
    Q: np.ndarray
    rhs: float

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True, eq=False)
class MatrixTerm:
    """coeff * L V L^T (congruence keeps the expression symmetric);
    L = None means coeff * V."""

    coeff: float
    var: str
    left: np.ndarray | None = None

    def __post_init__(self):
        if self.left is not None:
            object.__setattr__(self, "left", np.asarray(self.left, dtype=float))


@dataclass(frozen=True, eq=False)
class BorderTerm:
    """Appends one bordering row/column: [[core, B v], [(B v)^T, corner]]."""

    var: str
    B: np.ndarray
    corner: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))


@dataclass(frozen=True, eq=False)
class SemidefConstraint:
    """An affine symmetric matrix expression required positive semidefinite:

        const + sum_k coeff_k L_k V_k L_k^T   (optionally bordered)  >= 0.

    ``margin`` marks the block as participating in max-margin feasibility
    solves, where >= 0 is strengthened to >= t I and t is maximized.
    """

    dim: int
    terms: tuple[MatrixTerm, ...] = ()
    const: np.ndarray | None = None
    border: BorderTerm | None = None
    margin: bool = False
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.const is not None:
            C = np.asarray(self.const, dtype=float)
            object.__setattr__(self, "const", 0.5 * (C + C.T))

    @property
    def total_dim(self) -> int:
        return self.dim + (1 if self.border is not None else 0)

    def evaluate(self, assignment: Mapping[str, np.ndarray]) -> np.ndarray:
        core = np.zeros((self.dim, self.dim))
        if self.const is not None:
            core = core + self.const
        for t in self.terms:
            V = np.asarray(assignment[t.var], dtype=float)
            core = core + t.coeff * (V if t.left is None else t.left @ V @ t.left.T)
        if self.border is None:
            return 0.5 * (core + core.T)
        v = self.border.B @ np.asarray(assignment[self.border.var], dtype=float)
        out = np.zeros((self.dim + 1, self.dim + 1))
        out[: self.dim, : self.dim] = core
        out[: self.dim, -1] = v
        out[-1, : self.dim] = v
        out[-1, -1] = self.border.corner
        return 0.5 * (out + out.T)


@dataclass(frozen=True, eq=False)
class ConicProblem:
    """minimize sum_v objective[v] . v subject to the listed constraints.

    An empty objective makes the problem a feasibility question; if any
    semidefinite block carries the margin flag the solve maximizes the
    common slack t instead.
    """

    vector_vars: Mapping[str, int] = field(default_factory=dict)
    matrix_vars: Mapping[str, int] = field(default_factory=dict)
    objective: Mapping[str, np.ndarray] = field(default_factory=dict)
    linear: tuple[LinearConstraint, ...] = ()
    quadratic: tuple[QuadConstraint, ...] = ()
    semidef: tuple[SemidefConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vector_vars", dict(self.vector_vars))
        object.__setattr__(self, "matrix_vars", dict(self.matrix_vars))
        object.__setattr__(
            self,
            "objective",
            {k: np.asarray(v, dtype=float) for k, v in self.objective.items()},
        )
        object.__setattr__(self, "linear", tuple(self.linear))
        object.__setattr__(self, "quadratic", tuple(self.quadratic))
        object.__setattr__(self, "semidef", tuple(self.semidef))


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: SolveStatus
    value: float | None
    assignment: dict[str, np.ndarray]
    margin: float | None = None


# ---------------------------------------------------------------------------
# LP path (HiGHS through scipy)


def solve_lp(problem: ConicProblem, config: SolverConfig = DEFAULT_CONFIG) -> SolveResult:
    """Solve a pure linear program.  Matrix variables and nonlinear
    constraints are a contract violation here."""
    if problem.matrix_vars or problem.quadratic or problem.semidef:
        raise ValueError("solve_lp accepts linear constraints over vector variables only")

    names = list(problem.vector_vars)
    sizes = [problem.vector_vars[v] for v in names]
    offsets = dict(zip(names, np.concatenate(([0], np.cumsum(sizes)))[: len(names)].astype(int)))
    total = int(sum(sizes))

    c = np.zeros(total)
    for v, coef in problem.objective.items():
        c[offsets[v] : offsets[v] + problem.vector_vars[v]] = coef

    rows = []
    rhs = []
    for con in problem.linear:
        k = con.rhs.shape[0]
        block = np.zeros((k, total))
        for v, coef in con.coeffs.items():
            block[:, offsets[v] : offsets[v] + problem.vector_vars[v]] = coef
        rows.append(block)
        rhs.append(con.rhs)
    A_ub = np.vstack(rows) if rows else None
    b_ub = np.concatenate(rhs) if rhs else None

    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * total, method="highs")
    if res.status == 0:
        x = np.asarray(res.x)
        assignment = {
            v: x[offsets[v] : offsets[v] + problem.vector_vars[v]] for v in names
        }
        return SolveResult(SolveStatus.OPTIMAL, float(res.fun), assignment)
    if res.status == 2:
        return SolveResult(SolveStatus.INFEASIBLE, None, {})
    if res.status == 3:
        return SolveResult(SolveStatus.UNBOUNDED, -np.inf, {})
    return SolveResult(SolveStatus.NUMERICAL_ERROR, None, {})


# ---------------------------------------------------------------------------
# conic path (cvxpy)


def _validate_quadratics(problem: ConicProblem, tol: Tolerances):
    for q in problem.quadratic:
        w = np.linalg.eigvalsh(q.Q)
        scale = max(1.0, float(np.max(np.abs(w))))
        if w[0] < -tol.eps_psd * scale:
            raise NonConvexQuadratic(
                f"quadratic form on '{q.var}' has eigenvalue {w[0]:.3e} < 0"
            )


def _solve_cvxpy(
    problem: ConicProblem, config: SolverConfig, tol: Tolerances
) -> SolveResult:
    import cvxpy as cp

    vec = {v: cp.Variable(d, name=v) for v, d in problem.vector_vars.items()}
    mat = {
        v: cp.Variable((d, d), symmetric=True, name=v)
        for v, d in problem.matrix_vars.items()
    }

    constraints = []
    for con in problem.linear:
        expr = 0
        for v, coef in con.coeffs.items():
            if v in vec:
                expr = expr + coef @ vec[v]
            else:
                d = problem.matrix_vars[v]
                flat = cp.reshape(mat[v], (d * d,), order="C")
                expr = expr + coef.reshape(-1, d * d) @ flat
        constraints.append(expr <= con.rhs)

    for q in problem.quadratic:
        constraints.append(cp.quad_form(vec[q.var], q.Q, assume_PSD=True) <= q.rhs)

    margin_mode = not problem.objective and any(s.margin for s in problem.semidef)
    t = cp.Variable(name="margin") if margin_mode else None

    for s in problem.semidef:
        core = 0
        if s.const is not None:
            core = core + s.const
        for term in s.terms:
            V = mat[term.var]
            core = core + term.coeff * (V if term.left is None else term.left @ V @ term.left.T)
        if s.border is not None:
            v = s.border.B @ vec[s.border.var]
            block = cp.bmat(
                [
                    [core, cp.reshape(v, (s.dim, 1), order="C")],
                    [cp.reshape(v, (1, s.dim), order="C"), np.array([[s.border.corner]])],
                ]
            )
        else:
            block = core
        if margin_mode and s.margin:
            constraints.append(block >> t * np.eye(s.total_dim))
        else:
            constraints.append(block >> 0)

    if margin_mode:
        objective = cp.Maximize(t)
    else:
        obj = 0
        for v, coef in problem.objective.items():
            obj = obj + coef @ (vec[v] if v in vec else mat[v])
        objective = cp.Minimize(obj)

    prob = cp.Problem(objective, constraints)
    try:
        prob.solve(solver=getattr(cp, config.backend))
    except (cp.SolverError, ValueError, ArithmeticError):
        return SolveResult(SolveStatus.NUMERICAL_ERROR, None, {})

    status = {
        cp.OPTIMAL: SolveStatus.OPTIMAL,
        cp.OPTIMAL_INACCURATE: SolveStatus.OPTIMAL,
        cp.INFEASIBLE: SolveStatus.INFEASIBLE,
        cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
        cp.UNBOUNDED: SolveStatus.UNBOUNDED,
        cp.UNBOUNDED_INACCURATE: SolveStatus.UNBOUNDED,
    }.get(prob.status, SolveStatus.NUMERICAL_ERROR)

    if status is not SolveStatus.OPTIMAL:
        value = -np.inf if status is SolveStatus.UNBOUNDED and not margin_mode else None
        return SolveResult(status, value, {})

    assignment: dict[str, np.ndarray] = {}
    for v, var in vec.items():
        assignment[v] = np.asarray(var.value, dtype=float).reshape(-1)
    for v, var in mat.items():
        V = np.asarray(var.value, dtype=float)
        assignment[v] = 0.5 * (V + V.T)

    if margin_mode:
        return SolveResult(status, None, assignment, margin=float(t.value))
    return SolveResult(status, float(prob.value), assignment)


def solve_qcqp(
    problem: ConicProblem,
    config: SolverConfig = DEFAULT_CONFIG,
    tol: Tolerances = DEFAULT_TOL,
) -> SolveResult:
    """Linear objective under linear and convex quadratic constraints."""
    _validate_quadratics(problem, tol)
    if not problem.quadratic and not problem.semidef and not problem.matrix_vars:
        return solve_lp(problem, config)
    return _solve_cvxpy(problem, config, tol)


def solve_sdp(
    problem: ConicProblem,
    config: SolverConfig = DEFAULT_CONFIG,
    tol: Tolerances = DEFAULT_TOL,
) -> SolveResult:
    """Linear objective (or max-margin feasibility) under semidefinite,
    quadratic, and linear constraints."""
    _validate_quadratics(problem, tol)
    return _solve_cvxpy(problem, config, tol)


# ---------------------------------------------------------------------------
# independent re-checking


def check_assignment(
    problem: ConicProblem,
    assignment: Mapping[str, np.ndarray],
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[bool, tuple[tuple[str, float], ...]]:
    """Evaluate every constraint at the assignment, without any solver.

    Returns (ok, report) where report rows are (label, violation); linear
    and quadratic violations are amounts above the right-hand side, and
    semidefinite violations are -lambda_min of the evaluated block.  ``ok``
    applies eps_feas to the former and a relative eps_psd floor to the
    latter.
    """
    report: list[tuple[str, float]] = []
    ok = True
    for i, con in enumerate(problem.linear):
        lhs = np.zeros(con.rhs.shape[0])
        for v, coef in con.coeffs.items():
            val = np.asarray(assignment[v], dtype=float)
            if val.ndim == 1:
                lhs = lhs + coef @ val
            else:
                lhs = lhs + np.einsum("rjk,jk->r", coef, val)
        viol = float(np.max(lhs - con.rhs))
        report.append((f"linear[{i}]", viol))
        if viol > tol.eps_feas * (1.0 + float(np.max(np.abs(con.rhs)))):
            ok = False
    for i, q in enumerate(problem.quadratic):
        x = np.asarray(assignment[q.var], dtype=float)
        viol = float(x @ q.Q @ x - q.rhs)
        report.append((f"quadratic[{i}]", viol))
        if viol > tol.eps_feas * (1.0 + abs(q.rhs)):
            ok = False
    for i, s in enumerate(problem.semidef):
        S = s.evaluate(assignment)
        lam = float(np.linalg.eigvalsh(S)[0])
        report.append((s.label or f"semidef[{i}]", -lam))
        scale = max(1.0, abs(float(np.trace(S))))
        if lam < -tol.eps_psd * scale:
            ok = False
    return ok, tuple(report)
