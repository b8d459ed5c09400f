"""Switched dynamics: joint spectral radius bounds and invariant families.

For a family {G_1, ..., G_s} the role of the single Lyapunov ellipsoid is
played by a family of quadratic forms H_pi indexed by words pi of length
l - 1, tied together by one linear matrix inequality per (prefix, letter)
pair:

    H_pi > 0,    G_j^T H_{i sigma} G_j <= H_{sigma j}
                 for all sigma of length l - 2 and letters i, j

(l = 1 degenerates to a single H with G_j^T H G_j <= H for every j).
Strict feasibility of the system certifies that every product G_{w_1} ...
G_{w_k} decays, i.e. the joint spectral radius is below one; the pointwise
maximum W(x) = max_pi x^T H_pi x then never increases along any switching
sequence, so its sublevel sets are invariant.  Feasibility is guaranteed
once the radius is below n^(-1/(2l)), so raising l buys back conservatism.

Scaling the family by 1/beta scales the radius by 1/beta, which turns the
feasibility test into a bisection for an upper bound; products of length up
to k give the lower bound max rho(G_w)^(1/k).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    Dynamics,
    InfeasibleLevel,
    InvalidInvariantSet,
    BracketFailure,
    MultiEllipsoid,
    OriginNotInterior,
    RdoInstance,
    Tolerances,
    _frozen,
    normalize_rhs,
)
from .inner import InnerLevel, pd_inverse
from .numlin import (
    PRODUCT_CAP,
    enumerate_products,
    joint_norm_bound,
    spectral_radius,
)
from .outer import (
    OuterLevel,
    check_origin_interior,
    fixed_point_reached,
    inscribed_level,
    lower_bound,
)
from .solverapi import (
    BorderTerm,
    ConicProblem,
    DEFAULT_CONFIG,
    LinearConstraint,
    MatrixTerm,
    QuadConstraint,
    SemidefConstraint,
    SolveStatus,
    SolverConfig,
    solve_qcqp,
    solve_sdp,
)

__all__ = [
    "JsrBounds",
    "PathCompleteCertificate",
    "jsr_lower_bound",
    "path_complete_feasible",
    "verify_certificate",
    "jsr_upper_bound",
    "multi_ellipsoid_invariant_set",
    "switched_lower_bound",
    "switched_fixed_point",
    "switched_inner_qp",
    "switched_inner_sdp",
]


@dataclass(frozen=True, eq=False)
class JsrBounds:
    """Certified joint-spectral-radius bracket: products of length <= k_used
    give the lower bound, a feasible quadratic family at level l gives the
    upper bound."""

    lower: float
    upper: float
    l: int
    tol: float
    iterations: int
    k_used: int = 2


@dataclass(frozen=True, eq=False)
class PathCompleteCertificate:
    """A strictly feasible family of forms, with the max-margin slack the
    solver achieved under the normalization H_pi <= I."""

    l: int
    forms: tuple[tuple[tuple[int, ...], np.ndarray], ...]
    margin: float

    def __post_init__(self):
        object.__setattr__(
            self, "forms", tuple((tuple(w), _frozen(H)) for w, H in self.forms)
        )

    def form(self, word: tuple[int, ...]) -> np.ndarray:
        for w, H in self.forms:
            if w == tuple(word):
                return H
        raise KeyError(word)


def _index_words(s: int, length: int) -> list[tuple[int, ...]]:
    if length <= 0:
        return [()]
    return list(itertools.product(range(s), repeat=length))


def _lmi_triples(s: int, l: int):
    """(source word, letter j, target word) for every inequality
    G_j^T H_source G_j <= H_target at level l."""
    if l == 1:
        for j in range(s):
            yield (), j, ()
    else:
        for sigma in _index_words(s, l - 2):
            for i in range(s):
                for j in range(s):
                    yield (i,) + sigma, j, sigma + (j,)


def jsr_lower_bound(
    dyn: Dynamics, k_max: int, cap: int = PRODUCT_CAP
) -> float:
    """max over 1 <= k <= k_max and words w of rho(G_w)^(1/k), a lower bound
    on the joint spectral radius by its homogeneity and submultiplicativity."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    best = 0.0
    for k in range(1, k_max + 1):
        for w in enumerate_products(dyn, k, cap):
            best = max(best, spectral_radius(w.matrix) ** (1.0 / k))
    return best


def path_complete_feasible(
    dyn: Dynamics,
    l: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
) -> PathCompleteCertificate | None:
    """Decide strict feasibility of the level-l family by maximizing the
    common slack t in

        H_pi >= t I,   H_pi <= I,   H_{sigma j} - G_j^T H_{i sigma} G_j >= t I.

    Returns a certificate when t* >= eps_strict and the forms pass an
    independent eigenvalue re-check; None otherwise.
    """
    if l < 1:
        raise ValueError("level l must be at least 1")
    n = dyn.n
    words = _index_words(dyn.s, l - 1)
    name = {w: "H" + "".join(map(str, w)) for w in words}

    semidef = []
    for w in words:
        semidef.append(
            SemidefConstraint(
                dim=n,
                terms=(MatrixTerm(1.0, name[w]),),
                margin=True,
                label=f"pd{w}",
            )
        )
        semidef.append(
            SemidefConstraint(
                dim=n,
                terms=(MatrixTerm(-1.0, name[w]),),
                const=np.eye(n),
                label=f"norm{w}",
            )
        )
    for src, j, dst in _lmi_triples(dyn.s, l):
        semidef.append(
            SemidefConstraint(
                dim=n,
                terms=(
                    MatrixTerm(1.0, name[dst]),
                    MatrixTerm(-1.0, name[src], dyn.matrices[j].T),
                ),
                margin=True,
                label=f"lmi{src}-{j}->{dst}",
            )
        )

    prob = ConicProblem(
        vector_vars={},
        matrix_vars={name[w]: n for w in words},
        semidef=tuple(semidef),
    )
    res = solve_sdp(prob, config, tol)
    if res.status is not SolveStatus.OPTIMAL or res.margin is None:
        return None
    if res.margin < tol.eps_strict:
        return None
    cert = PathCompleteCertificate(
        l=l,
        forms=tuple((w, res.assignment[name[w]]) for w in words),
        margin=float(res.margin),
    )
    if not verify_certificate(cert, dyn, tol):
        return None
    return cert


def verify_certificate(
    cert: PathCompleteCertificate, dyn: Dynamics, tol: Tolerances = DEFAULT_TOL
) -> bool:
    """Re-check the certificate by eigenvalues alone, independent of the
    solver: every form clears the strictness floor and every inequality
    holds within eps_psd."""
    forms = dict(cert.forms)
    for w, H in forms.items():
        scale = max(1.0, abs(float(np.trace(H))))
        if np.linalg.eigvalsh(H)[0] < tol.eps_strict - tol.eps_psd * scale:
            return False
    for src, j, dst in _lmi_triples(dyn.s, cert.l):
        Gj = dyn.matrices[j]
        S = forms[dst] - Gj.T @ forms[src] @ Gj
        scale = max(1.0, abs(float(np.trace(forms[dst]))))
        if np.linalg.eigvalsh(S)[0] < -tol.eps_psd * scale:
            return False
    return True


def _scaled(dyn: Dynamics, beta: float) -> Dynamics:
    return Dynamics(tuple(M / beta for M in dyn.matrices))


def jsr_upper_bound(
    dyn: Dynamics,
    l: int = 1,
    tol: float = 1e-3,
    config: SolverConfig = DEFAULT_CONFIG,
    max_iter: int = 40,
    tolerances: Tolerances = DEFAULT_TOL,
) -> JsrBounds:
    """Bisect on the scaling beta: level-l feasibility for {G_i / beta}
    certifies that the radius is below beta.

    The search starts from the norm bound max ||G_i||, inflated slightly so
    the identity family certifies the first endpoint; failure there raises
    BracketFailure carrying the norm bound.  The returned lower bound comes
    from products of length up to 2 and is certified independently of the
    bisection.
    """
    norm = joint_norm_bound(dyn)
    if norm == 0.0:
        return JsrBounds(0.0, 0.0, l, tol, 0)
    lower = jsr_lower_bound(dyn, 2)
    hi = norm * (1.0 + max(tol, 1e-4))
    if path_complete_feasible(_scaled(dyn, hi), l, tolerances, config) is None:
        raise BracketFailure(
            f"level-{l} family infeasible even at the norm bound {norm:.6g}; "
            "only the norm bound is certified",
            norm_bound=norm,
        )
    lo = min(lower, hi)
    iters = 0
    while iters < max_iter and hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        iters += 1
        if path_complete_feasible(_scaled(dyn, mid), l, tolerances, config) is not None:
            hi = mid
        else:
            lo = mid
    return JsrBounds(lower, hi, l, tol, iters)


def multi_ellipsoid_invariant_set(
    inst: RdoInstance,
    l: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
) -> MultiEllipsoid:
    """Largest common sublevel set of a feasible level-l family inside P.

    The level alpha is set by the containment of the single reference form
    H_{0...0} in P; the intersection over all forms is then both inside P
    and invariant under every generator.
    """
    if not check_origin_interior(inst.polytope):
        raise OriginNotInterior("invariant-set level needs every b_i > 0")
    cert = path_complete_feasible(inst.dynamics, l, tol, config)
    if cert is None:
        raise InfeasibleLevel(f"no strictly feasible family at level l={l}")
    ref = cert.form((0,) * (l - 1))
    alpha = inscribed_level(inst.polytope, ref)
    if not (0.0 < alpha < math.inf):
        raise InfeasibleLevel("reference form admits no positive level inside P")
    return MultiEllipsoid(l=l, forms=cert.forms, alpha=alpha)


def switched_lower_bound(
    inst: RdoInstance, r: int, cap: int = PRODUCT_CAP
) -> OuterLevel:
    """min c^T x over the depth-r outer polyhedron; identical to the
    single-matrix hierarchy with words in place of powers."""
    return lower_bound(inst, r, cap)


def switched_fixed_point(
    inst: RdoInstance,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    cap: int = PRODUCT_CAP,
) -> bool:
    """Exactness test over all words of length r + 1."""
    return fixed_point_reached(inst, r, tol, cap)


def _validate_multi_ellipsoid(
    inst: RdoInstance, family: MultiEllipsoid, tol: Tolerances
) -> None:
    dyn = inst.dynamics
    forms = dict(family.forms)
    expected = set(_index_words(dyn.s, family.l - 1))
    if set(forms) != expected:
        raise InvalidInvariantSet(
            f"family must carry one form per word of length {family.l - 1}"
        )
    for src, j, dst in _lmi_triples(dyn.s, family.l):
        Gj = dyn.matrices[j]
        S = forms[dst] - Gj.T @ forms[src] @ Gj
        scale = max(1.0, abs(float(np.trace(forms[dst]))))
        if np.linalg.eigvalsh(S)[0] < -tol.eps_psd * scale:
            raise InvalidInvariantSet(
                f"family is not invariant: inequality {src} -{j}-> {dst} fails"
            )
    ref = forms[(0,) * (family.l - 1)]
    level = inscribed_level(inst.polytope, ref)
    if family.alpha > level * (1.0 + tol.eps_feas):
        raise InvalidInvariantSet(
            f"level {family.alpha} exceeds the largest contained level {level}"
        )


def switched_inner_qp(
    inst: RdoInstance,
    family: MultiEllipsoid,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
    cap: int = PRODUCT_CAP,
) -> InnerLevel:
    """min c^T x over the depth-r inner set of a fixed invariant family:
    every word of length r must carry x into the family's sublevel set, and
    every shorter word must keep x inside the unit-rhs polytope."""
    norm = normalize_rhs(inst)
    _validate_multi_ellipsoid(norm, family, tol)
    A = norm.polytope.A
    n = norm.n
    quads = []
    for w in enumerate_products(norm.dynamics, r, cap):
        for _, H in family.forms:
            quads.append(QuadConstraint("x", w.matrix.T @ H @ w.matrix, family.alpha))
    rows = []
    for k in range(r):
        for w in enumerate_products(norm.dynamics, k, cap):
            rows.append(A @ w.matrix)
    linear = ()
    if rows:
        stacked = np.vstack(rows)
        linear = (LinearConstraint({"x": stacked}, np.ones(stacked.shape[0])),)
    prob = ConicProblem(
        vector_vars={"x": n},
        objective={"x": norm.c},
        linear=linear,
        quadratic=tuple(quads),
    )
    res = solve_qcqp(prob, config, tol)
    if res.status is SolveStatus.OPTIMAL:
        return InnerLevel(r, res.value, res.assignment["x"], family)
    if res.status is SolveStatus.UNBOUNDED:
        return InnerLevel(r, -math.inf, None, family)
    if res.status is SolveStatus.INFEASIBLE:
        raise InfeasibleLevel(f"switched inner program infeasible at r={r}")
    raise RuntimeError(f"QP solver failed at level {r}: {res.status}")


def switched_inner_sdp(
    inst: RdoInstance,
    l: int,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
    cap: int = PRODUCT_CAP,
) -> InnerLevel:
    """Level-(l, r) inner bound with the invariant family optimized per
    level, over the inverse shapes Q_pi:

        min  c^T x
        s.t. Q_pi >= eps_strict I,
             G_j Q_{sigma j} G_j^T <= Q_{i sigma},
             a_i^T Q_{0...0} a_i <= 1,
             [[Q_pi, G_w x], [(G_w x)^T, 1]] >= 0   for |w| = r, every pi,
             A G_w x <= 1                           for |w| < r.
    """
    norm = normalize_rhs(inst)
    dyn = norm.dynamics
    A = norm.polytope.A
    n = norm.n
    words = _index_words(dyn.s, l - 1)
    name = {w: "Q" + "".join(map(str, w)) for w in words}

    semidef = []
    for w in words:
        semidef.append(
            SemidefConstraint(
                dim=n,
                terms=(MatrixTerm(1.0, name[w]),),
                const=-tol.eps_strict * np.eye(n),
                label=f"pd{w}",
            )
        )
    for src, j, dst in _lmi_triples(dyn.s, l):
        # inverse-shape inequality: G_j Q_dst G_j^T <= Q_src
        semidef.append(
            SemidefConstraint(
                dim=n,
                terms=(
                    MatrixTerm(1.0, name[src]),
                    MatrixTerm(-1.0, name[dst], dyn.matrices[j]),
                ),
                label=f"lmi{src}-{j}->{dst}",
            )
        )
    for w in enumerate_products(dyn, r, cap):
        for pi in words:
            semidef.append(
                SemidefConstraint(
                    dim=n,
                    terms=(MatrixTerm(1.0, name[pi]),),
                    border=BorderTerm("x", w.matrix, 1.0),
                    label=f"member{pi}-{w.indices}",
                )
            )

    ref = (0,) * (l - 1)
    contain = np.einsum("ij,ik->ijk", A, A)
    linear = [LinearConstraint({name[ref]: contain}, np.ones(A.shape[0]))]
    rows = []
    for k in range(r):
        for w in enumerate_products(dyn, k, cap):
            rows.append(A @ w.matrix)
    if rows:
        stacked = np.vstack(rows)
        linear.append(LinearConstraint({"x": stacked}, np.ones(stacked.shape[0])))

    prob = ConicProblem(
        vector_vars={"x": n},
        matrix_vars={name[w]: n for w in words},
        objective={"x": norm.c},
        linear=tuple(linear),
        semidef=tuple(semidef),
    )
    res = solve_sdp(prob, config, tol)
    if res.status is SolveStatus.INFEASIBLE:
        raise InfeasibleLevel(f"switched inner SDP infeasible at l={l}, r={r}")
    if res.status is not SolveStatus.OPTIMAL:
        raise RuntimeError(f"SDP solver failed at l={l}, r={r}: {res.status}")
    forms = tuple((w, pd_inverse(res.assignment[name[w]], tol)) for w in words)
    family = MultiEllipsoid(l=l, forms=forms, alpha=1.0)
    return InnerLevel(r, res.value, res.assignment["x"], family)
