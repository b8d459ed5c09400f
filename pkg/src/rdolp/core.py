"""Core data model: problem instances, invariant-set containers, verdicts.

The problem solved throughout this package is a linear program over the set
of initial conditions whose entire forward orbit stays inside a polytope:

    minimize  c^T x
    s.t.      every trajectory of  x_{k+1} = G_{sigma(k)} x_k,  x_0 = x,
              remains in  P = {x : A x <= b}  for all k >= 0,

where the dynamics are a single matrix G or an arbitrary switching sequence
over a finite family {G_1, ..., G_s}.  The feasible set is written S below;
it is the infinite intersection of the preimages of P under all matrix
products drawn from the family.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "RdoError",
    "ValidationError",
    "DimensionMismatch",
    "NonFiniteEntry",
    "EmptyPolytopeRow",
    "OriginNotInterior",
    "ProductCapExceeded",
    "EigenFailure",
    "UnstableDynamics",
    "SingularSystem",
    "NonConvexQuadratic",
    "EmptyPolytope",
    "UnboundedPolytope",
    "RhoStarViolated",
    "InvalidInvariantSet",
    "InfeasibleLevel",
    "BracketFailure",
    "ParseError",
    "DimensionNotPlottable",
    "LedgerOrderError",
    "Polytope",
    "Dynamics",
    "RdoInstance",
    "Ellipsoid",
    "MultiEllipsoid",
    "BoundStatus",
    "LedgerRow",
    "BoundLedger",
    "ExcludedAt",
    "InsideUpTo",
    "validate_instance",
    "normalize_rhs",
    "membership_by_simulation",
]


# ---------------------------------------------------------------------------
# tolerances


@dataclass(frozen=True)
class Tolerances:
    """Numerical slack used across the package.

    eps_feas    pointwise feasibility slack for linear inequalities
    eps_psd     relative eigenvalue floor for semidefiniteness checks
    eps_gap     convergence gap between lower and upper bounds
    eps_fp      relative slack in the finite-termination (fixed point) test
    eps_strict  margin that replaces strict definiteness in conic programs
    rho_margin  distance to 1 below which a spectral radius counts as stable
    """

    eps_feas: float = 1e-7
    eps_psd: float = 1e-8
    eps_gap: float = 1e-6
    eps_fp: float = 1e-6
    eps_strict: float = 1e-6
    rho_margin: float = 1e-9


DEFAULT_TOL = Tolerances()


# ---------------------------------------------------------------------------
# error taxonomy


class RdoError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RdoError):
    """Instance data violates one or more structural rules.

    ``violations`` lists every broken rule, not just the first one found.
    """

    def __init__(self, violations: Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class DimensionMismatch(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class EmptyPolytopeRow(ValidationError):
    """A zero row of A paired with a negative right-hand side: 0 <= b_i fails
    for every x, so the polytope is trivially empty."""


class OriginNotInterior(RdoError):
    pass


class ProductCapExceeded(RdoError):
    pass


class EigenFailure(RdoError):
    pass


class UnstableDynamics(RdoError):
    pass


class SingularSystem(RdoError):
    pass


class NonConvexQuadratic(RdoError):
    pass


class EmptyPolytope(RdoError):
    pass


class UnboundedPolytope(RdoError):
    pass


class RhoStarViolated(RdoError):
    pass


class InvalidInvariantSet(RdoError):
    pass


class InfeasibleLevel(RdoError):
    pass


class BracketFailure(RdoError):
    """The initial upper endpoint of a bisection bracket is not certified.

    Carries the fallback norm bound so callers can still report something.
    """

    def __init__(self, msg: str, norm_bound: float):
        super().__init__(msg)
        self.norm_bound = norm_bound


class ParseError(RdoError):
    pass


class DimensionNotPlottable(RdoError):
    pass


class LedgerOrderError(RdoError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class Polytope:
    """P = {x in R^n : A x <= b}."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(np.atleast_2d(self.A)))
        object.__setattr__(self, "b", _frozen(np.atleast_1d(self.b)))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def contains(self, x: np.ndarray, eps: float = 0.0) -> bool:
        return bool(np.all(self.A @ x <= self.b + eps))

    def violation(self, x: np.ndarray) -> float:
        """Largest amount by which x breaks a constraint (<= 0 means inside)."""
        return float(np.max(self.A @ x - self.b))


@dataclass(frozen=True, eq=False)
class Dynamics:
    """A finite family of n x n matrices; s == 1 is plain linear dynamics."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = self.matrices
        if isinstance(mats, np.ndarray) and mats.ndim == 2:
            mats = (mats,)
        object.__setattr__(self, "matrices", tuple(_frozen(M) for M in mats))
        digest = hash(tuple(M.tobytes() for M in self.matrices))
        object.__setattr__(self, "_digest", digest)

    @property
    def s(self) -> int:
        return len(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def is_switched(self) -> bool:
        return self.s > 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dynamics):
            return NotImplemented
        return self._digest == other._digest and all(
            a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(self.matrices, other.matrices)
        ) and self.s == other.s

    def __hash__(self) -> int:
        return self._digest


@dataclass(frozen=True, eq=False)
class RdoInstance:
    """Objective c, polytope P, dynamics family."""

    c: np.ndarray
    polytope: Polytope
    dynamics: Dynamics

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(np.atleast_1d(self.c)))

    @property
    def n(self) -> int:
        return self.polytope.n

    @property
    def s(self) -> int:
        return self.dynamics.s


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """E = {x : x^T M x <= alpha} with M symmetric positive definite."""

    M: np.ndarray
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "M", _frozen(self.M))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def value(self, x: np.ndarray) -> float:
        return float(x @ self.M @ x)

    def contains(self, x: np.ndarray, eps: float = 0.0) -> bool:
        return self.value(x) <= self.alpha + eps

    def support(self, a: np.ndarray) -> float:
        """max a^T x over E, i.e. sqrt(alpha * a^T M^{-1} a)."""
        return math.sqrt(max(self.alpha * float(a @ np.linalg.solve(self.M, a)), 0.0))


@dataclass(frozen=True, eq=False)
class MultiEllipsoid:
    """Intersection of ellipsoids indexed by words pi of length l - 1:

        F = {x : x^T H_pi x <= alpha  for every pi}.

    The pointwise maximum W(x) = max_pi x^T H_pi x acts as a Lyapunov-like
    value function for the switched dynamics that produced the family.
    """

    l: int
    forms: tuple[tuple[tuple[int, ...], np.ndarray], ...]
    alpha: float

    def __post_init__(self):
        frozen = tuple((tuple(w), _frozen(H)) for w, H in self.forms)
        object.__setattr__(self, "forms", frozen)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.forms[0][1].shape[0]

    @property
    def words(self) -> tuple[tuple[int, ...], ...]:
        return tuple(w for w, _ in self.forms)

    def form(self, word: tuple[int, ...]) -> np.ndarray:
        for w, H in self.forms:
            if w == tuple(word):
                return H
        raise KeyError(word)

    def value(self, x: np.ndarray) -> float:
        return max(float(x @ H @ x) for _, H in self.forms)

    def contains(self, x: np.ndarray, eps: float = 0.0) -> bool:
        return self.value(x) <= self.alpha + eps

    def support(self, a: np.ndarray) -> float:
        """max a^T x over F, bounded by the tightest single-ellipsoid support."""
        return min(
            math.sqrt(max(self.alpha * float(a @ np.linalg.solve(H, a)), 0.0))
            for _, H in self.forms
        )


# ---------------------------------------------------------------------------
# bound ledger


class BoundStatus(enum.Enum):
    OPEN = "open"
    FIXED_POINT = "fixed-point"
    CONVERGED = "converged"
    INFEASIBLE = "infeasible"
    LEVEL_CAP_REACHED = "level-cap-reached"


@dataclass(frozen=True, eq=False)
class LedgerRow:
    r: int
    lower: float | None
    upper: float | None
    witness: np.ndarray | None
    status: BoundStatus

    def __post_init__(self):
        if self.witness is not None:
            object.__setattr__(self, "witness", _frozen(self.witness))


@dataclass(frozen=True, eq=False)
class BoundLedger:
    """Per-level bound history.  Lower bounds must be nondecreasing in r,
    upper bounds nonincreasing, and lower <= upper + eps_gap whenever both
    are present.  Violations raise LedgerOrderError at construction."""

    rows: tuple[LedgerRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        slack = DEFAULT_TOL.eps_gap
        prev_lo = -math.inf
        prev_up = math.inf
        for row in self.rows:
            if row.lower is not None:
                if row.lower < prev_lo - slack:
                    raise LedgerOrderError(
                        f"lower bound decreased at r={row.r}: {row.lower} < {prev_lo}"
                    )
                prev_lo = max(prev_lo, row.lower)
            if row.upper is not None:
                if row.upper > prev_up + slack:
                    raise LedgerOrderError(
                        f"upper bound increased at r={row.r}: {row.upper} > {prev_up}"
                    )
                prev_up = min(prev_up, row.upper)
            if row.lower is not None and row.upper is not None:
                if row.lower > row.upper + slack:
                    raise LedgerOrderError(
                        f"crossed bounds at r={row.r}: {row.lower} > {row.upper}"
                    )

    def append(self, row: LedgerRow) -> "BoundLedger":
        return BoundLedger(self.rows + (row,))

    @property
    def status(self) -> BoundStatus:
        return self.rows[-1].status if self.rows else BoundStatus.OPEN

    @property
    def last(self) -> LedgerRow:
        return self.rows[-1]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


# ---------------------------------------------------------------------------
# membership verdicts


@dataclass(frozen=True)
class ExcludedAt:
    """x leaves P after applying the product indexed by ``word`` (k steps)."""

    k: int
    word: tuple[int, ...]


@dataclass(frozen=True)
class InsideUpTo:
    """No product of length <= k_max maps x outside P."""

    k_max: int


# ---------------------------------------------------------------------------
# validation and normalization


def validate_instance(c, A, b, matrices) -> RdoInstance:
    """Check raw arrays and assemble an instance.

    Every violated rule is collected; the raised error subclass matches the
    first violation but carries the full list in ``violations``.
    """
    problems: list[tuple[type, str]] = []

    def to_array(x, name, ndim):
        try:
            arr = np.asarray(x, dtype=float)
        except (ValueError, TypeError):
            problems.append((DimensionMismatch, f"{name} is not a rectangular numeric array"))
            return None
        if arr.ndim != ndim:
            problems.append((DimensionMismatch, f"{name} must be {ndim}-dimensional, got shape {arr.shape}"))
            return None
        return arr

    c_a = to_array(c, "c", 1)
    A_a = to_array(A, "A", 2)
    b_a = to_array(b, "b", 1)

    if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
        matrices = [matrices]
    mats = []
    try:
        mat_list = list(matrices)
    except TypeError:
        mat_list = []
        problems.append((DimensionMismatch, "dynamics must be a matrix or a sequence of matrices"))
    if not mat_list and not problems:
        problems.append((DimensionMismatch, "dynamics family is empty"))
    for i, M in enumerate(mat_list):
        M_a = to_array(M, f"G[{i}]", 2)
        if M_a is not None:
            mats.append(M_a)

    if A_a is not None:
        n = A_a.shape[1]
        m = A_a.shape[0]
        if c_a is not None and c_a.shape[0] != n:
            problems.append((DimensionMismatch, f"c has length {c_a.shape[0]}, expected {n}"))
        if b_a is not None and b_a.shape[0] != m:
            problems.append((DimensionMismatch, f"b has length {b_a.shape[0]}, expected {m}"))
        for i, M in enumerate(mats):
            if M.shape != (n, n):
                problems.append((DimensionMismatch, f"G[{i}] has shape {M.shape}, expected ({n}, {n})"))

    for name, arr in (("c", c_a), ("A", A_a), ("b", b_a)):
        if arr is not None and not np.all(np.isfinite(arr)):
            problems.append((NonFiniteEntry, f"{name} contains a non-finite entry"))
    for i, M in enumerate(mats):
        if not np.all(np.isfinite(M)):
            problems.append((NonFiniteEntry, f"G[{i}] contains a non-finite entry"))

    if A_a is not None and b_a is not None and A_a.shape[0] == b_a.shape[0]:
        zero_rows = np.max(np.abs(A_a), axis=1) == 0.0 if A_a.size else np.zeros(0, bool)
        for i in np.flatnonzero(zero_rows):
            if b_a[i] < 0:
                problems.append(
                    (EmptyPolytopeRow, f"row {i} of A is zero with b[{i}] = {b_a[i]} < 0")
                )

    if problems:
        kind = problems[0][0]
        raise kind([msg for _, msg in problems])

    return RdoInstance(c=c_a, polytope=Polytope(A_a, b_a), dynamics=Dynamics(tuple(mats)))


def normalize_rhs(inst: RdoInstance) -> RdoInstance:
    """Rescale each constraint row so the right-hand side is all ones.

    Requires every b_i > 0 (origin strictly inside P).  Idempotent: applying
    it twice reproduces the once-normalized instance bit for bit.
    """
    b = inst.polytope.b
    bad = np.flatnonzero(b <= 0)
    if bad.size:
        raise OriginNotInterior(
            f"cannot scale rows to unit right-hand side: b{bad.tolist()} <= 0"
        )
    A = inst.polytope.A / b[:, None]
    return RdoInstance(
        c=inst.c,
        polytope=Polytope(A, np.ones_like(b)),
        dynamics=inst.dynamics,
    )


# ---------------------------------------------------------------------------
# membership by simulation


def _word_from_index(idx: int, k: int, s: int) -> tuple[int, ...]:
    # base-s digits, most significant first; matches lexicographic enumeration
    digits = []
    for _ in range(k):
        digits.append(idx % s)
        idx //= s
    return tuple(reversed(digits))


def _prune_extreme_2d(pts: np.ndarray, words: list[tuple[int, ...]]):
    """Drop points that are strict convex combinations of the others.

    Sound for violation tracking: the maximum of any linear functional over
    the image of the point cloud is attained on images of extreme points.
    """
    from scipy.spatial import QhullError, ConvexHull

    uniq, keep_idx = np.unique(pts, axis=0, return_index=True)
    pts = pts[np.sort(keep_idx)]
    words = [words[i] for i in np.sort(keep_idx)]
    if len(pts) <= 3:
        return pts, words
    try:
        hull = ConvexHull(pts)
        idx = sorted(set(int(v) for v in hull.vertices))
    except QhullError:
        # degenerate cloud (collinear or coincident): keep extremes along the
        # principal direction
        center = pts.mean(axis=0)
        d = pts - center
        _, _, vt = np.linalg.svd(d, full_matrices=False)
        t = d @ vt[0]
        idx = sorted({int(np.argmin(t)), int(np.argmax(t))})
    return pts[idx], [words[i] for i in idx]


def membership_by_simulation(
    inst: RdoInstance,
    x: np.ndarray,
    k_max: int,
    tol: Tolerances = DEFAULT_TOL,
    cap: int = 65536,
):
    """Decide whether any product of up to k_max generators maps x out of P.

    Exact for a single matrix (one trajectory).  For switched dynamics the
    enumeration is breadth-first over words; when the total word count would
    exceed ``cap``, planar instances (n == 2) fall back to propagating only
    the extreme points of the image cloud, which preserves the maximal
    constraint violation at every depth.  Other instances raise
    ProductCapExceeded.
    """
    A, b = inst.polytope.A, inst.polytope.b
    mats = inst.dynamics.matrices
    s = inst.dynamics.s
    x = np.asarray(x, dtype=float)
    eps = tol.eps_feas

    if s == 1:
        G = mats[0]
        xk = x
        for k in range(k_max + 1):
            if np.max(A @ xk - b) > eps:
                return ExcludedAt(k, (0,) * k)
            if k < k_max:
                xk = G @ xk
        return InsideUpTo(k_max)

    total = sum(s**k for k in range(k_max + 1))
    if total <= cap:
        pts = x[None, :]
        for k in range(k_max + 1):
            resid = pts @ A.T - b
            worst = np.max(resid, axis=1)
            bad = np.flatnonzero(worst > eps)
            if bad.size:
                return ExcludedAt(k, _word_from_index(int(bad[0]), k, s))
            if k < k_max:
                pts = np.stack([pts @ M.T for M in mats], axis=1).reshape(-1, pts.shape[1])
        return InsideUpTo(k_max)

    if inst.n != 2:
        raise ProductCapExceeded(
            f"{total} products needed for s={s}, k_max={k_max}; cap is {cap}"
        )

    pts = x[None, :]
    words: list[tuple[int, ...]] = [()]
    for k in range(k_max + 1):
        resid = pts @ A.T - b
        worst = np.max(resid, axis=1)
        j = int(np.argmax(worst))
        if worst[j] > eps:
            return ExcludedAt(k, words[j])
        if k < k_max:
            pts, words = _prune_extreme_2d(pts, words)
            pts = np.stack([pts @ M.T for M in mats], axis=1).reshape(-1, 2)
            words = [w + (j,) for w in words for j in range(s)]
    return InsideUpTo(k_max)
