"""Dense linear-algebra kernels: spectral radius, Lyapunov solve, products.

Everything here is exact-ish numerics on small dense matrices.  The Lyapunov
solve deliberately uses the n^2 x n^2 Kronecker system; its O(n^6) cost is
irrelevant at the dimensions this package targets (n up to a few tens) and
it keeps the residual guarantee easy to state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Dynamics,
    EigenFailure,
    ProductCapExceeded,
    SingularSystem,
    UnstableDynamics,
    DEFAULT_TOL,
    Tolerances,
    _frozen,
)

__all__ = [
    "ProductWord",
    "spectral_radius",
    "joint_norm_bound",
    "gershgorin_lambda_max",
    "solve_discrete_lyapunov",
    "enumerate_products",
    "products_up_to",
    "PRODUCT_CAP",
]

PRODUCT_CAP = 4096


@dataclass(frozen=True, eq=False)
class ProductWord:
    """A word over generator indices together with the matrix it spells.

    ``matrix`` is G_{w_1} @ G_{w_2} @ ... @ G_{w_k}; the empty word is the
    identity.
    """

    indices: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def k(self) -> int:
        return len(self.indices)


def spectral_radius(G: np.ndarray) -> float:
    """max |lambda| over the eigenvalues of G."""
    try:
        eig = np.linalg.eigvals(np.asarray(G, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue computation failed: {exc}") from exc
    return float(np.max(np.abs(eig))) if eig.size else 0.0


def joint_norm_bound(dyn: Dynamics) -> float:
    """max_i ||G_i||_2, a norm upper bound on the joint spectral radius."""
    return max(float(np.linalg.norm(M, 2)) for M in dyn.matrices)


def gershgorin_lambda_max(M: np.ndarray) -> float:
    """Row-sum upper bound on the largest eigenvalue of a symmetric matrix:

        max_i ( M_ii + sum_{j != i} |M_ij| ).
    """
    M = np.asarray(M, dtype=float)
    radii = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    return float(np.max(np.diag(M) + radii))


def solve_discrete_lyapunov(
    G: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Solve G^T M G - M = -I for the unique symmetric M, which is positive
    definite whenever rho(G) < 1 (M = sum_k (G^T)^k G^k >= I).

    The vectorized system is (I - G^T kron G^T) vec(M) = vec(I); the solution
    is symmetrized and its residual checked against 1e-8 * n.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    rho = spectral_radius(G)
    if rho >= 1.0 - tol.rho_margin:
        raise UnstableDynamics(f"rho(G) = {rho} not below 1")
    K = np.eye(n * n) - np.kron(G.T, G.T)
    try:
        vec = np.linalg.solve(K, np.eye(n).reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Lyapunov system is singular: {exc}") from exc
    M = vec.reshape(n, n)
    M = 0.5 * (M + M.T)
    resid = np.linalg.norm(G.T @ M @ G - M + np.eye(n))
    if not np.isfinite(resid) or resid > 1e-8 * n:
        raise SingularSystem(
            f"Lyapunov residual {resid:.3e} exceeds {1e-8 * n:.1e}; "
            "system too ill-conditioned"
        )
    return M


# levels built so far, keyed by the dynamics object (few families live at once)
_levels_cache: "dict[Dynamics, list[tuple[ProductWord, ...]]]" = {}


def enumerate_products(
    dyn: Dynamics, k: int, cap: int = PRODUCT_CAP
) -> tuple[ProductWord, ...]:
    """All s^k words of length k in lexicographic order of their indices.

    Levels are built eagerly from the previous level (child = parent @ G_j)
    and cached per dynamics object.  No deduplication is attempted even when
    distinct words spell the same matrix.
    """
    if k < 0:
        raise ValueError("word length must be nonnegative")
    if dyn.s**k > cap:
        raise ProductCapExceeded(f"{dyn.s}^{k} products exceed the cap of {cap}")
    levels = _levels_cache.get(dyn)
    if levels is None:
        if len(_levels_cache) > 16:
            _levels_cache.clear()
        levels = [(ProductWord((), np.eye(dyn.n)),)]
        _levels_cache[dyn] = levels
    while len(levels) <= k:
        nxt = tuple(
            ProductWord(p.indices + (j,), p.matrix @ Gj)
            for p in levels[-1]
            for j, Gj in enumerate(dyn.matrices)
        )
        levels.append(nxt)
    return levels[k]


def products_up_to(
    dyn: Dynamics, r: int, cap: int = PRODUCT_CAP
) -> tuple[ProductWord, ...]:
    """Concatenation of enumerate_products(dyn, k) for k = 0 .. r."""
    out: list[ProductWord] = []
    for k in range(r + 1):
        out.extend(enumerate_products(dyn, k, cap))
    return tuple(out)
