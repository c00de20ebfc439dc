"""The space HL(mu) of twist maps compatible with a product.

HL(mu) is the kernel of the 3x9 constraint matrix from
:func:`homlie3.core.hl_constraint_matrix`.  The kernel is extracted with
complete pivoting and then orthonormalised, so bases of equal subspaces can
be compared by a plain rank test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    GroupElement,
    Tolerance,
    act_on_product,
    as_matrix,
    hl_constraint_matrix,
    max_abs,
    unvec,
    vec,
)

__all__ = [
    "EndoBasis",
    "nullspace",
    "numeric_rank",
    "hl_basis",
    "hl_contains",
    "conjugate_subspace",
    "subspaces_equal",
]


@dataclass(frozen=True)
class EndoBasis:
    basis: tuple
    product: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self) -> np.ndarray:
        """Stacked 9-vectors (one row per basis element)."""
        if not self.basis:
            return np.zeros((0, 9), dtype=complex)
        return np.array([vec(T) for T in self.basis])


def nullspace(L: np.ndarray, eps: float, scale: float = 0.0) -> tuple[np.ndarray, int]:
    """Right kernel of L by Gaussian elimination with complete pivoting.

    Pivots below ``eps * max(max|L|, scale)`` count as zero.  Pass the
    natural size of L's entries as ``scale`` when L may be pure rounding
    noise.  Returns (K, rank) where the columns of K span the kernel.
    """
    A = np.array(L, dtype=complex)
    m, n = A.shape
    thr = eps * max(max_abs(A), scale)
    cols = list(range(n))
    r = 0
    while r < m:
        sub = np.abs(A[r:, r:])
        if sub.size == 0 or sub.max() <= thr or sub.max() == 0:
            break
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i, j = i + r, j + r
        A[[r, i]] = A[[i, r]]
        A[:, [r, j]] = A[:, [j, r]]
        cols[r], cols[j] = cols[j], cols[r]
        A[r] = A[r] / A[r, r]
        for k in range(m):
            if k != r:
                A[k] = A[k] - A[k, r] * A[r]
        r += 1
    # A[:r] = [I | F] in permuted columns; kernel vectors are (-F e_k ; e_k)
    F = A[:r, r:]
    K = np.zeros((n, n - r), dtype=complex)
    for k in range(n - r):
        K[cols[r + k], k] = 1
        for p in range(r):
            K[cols[p], k] = -F[p, k]
    return K, r


def numeric_rank(X: np.ndarray, eps: float) -> int:
    if X.size == 0:
        return 0
    s = np.linalg.svd(X, compute_uv=False)
    return int(np.sum(s > eps * max(1.0, s[0])))


def _orthonormal(vectors: np.ndarray) -> np.ndarray:
    """Columns -> orthonormal columns spanning the same space (Hermitian product)."""
    if vectors.shape[1] == 0:
        return vectors
    q, _ = np.linalg.qr(vectors)
    return q


def _basis_from_columns(Q: np.ndarray) -> tuple:
    out = []
    for k in range(Q.shape[1]):
        T = unvec(Q[:, k])
        T.setflags(write=False)
        out.append(T)
    return tuple(out)


def hl_basis(M, tol: Tolerance = DEFAULT_TOL) -> EndoBasis:
    M = as_matrix(M)
    # the constraint map is quadratic in M
    K, _ = nullspace(hl_constraint_matrix(M), tol.eps_rank, max_abs(M) ** 2)
    P = M.copy()
    P.setflags(write=False)
    return EndoBasis(_basis_from_columns(_orthonormal(K)), P)


def hl_contains(M, T, tol: Tolerance = DEFAULT_TOL) -> bool:
    M, T = as_matrix(M), as_matrix(T)
    resid = max_abs(hl_constraint_matrix(M) @ vec(T))
    nm, nt = max_abs(M), max_abs(T)
    return resid <= tol.eps_zero * (1 + nm * nt * nm)


def conjugate_subspace(g, B: EndoBasis, tol: Tolerance = DEFAULT_TOL) -> EndoBasis:
    ge = GroupElement.of(g, tol)
    gi = np.linalg.inv(ge.matrix)
    cols = np.array([vec(ge.matrix @ T @ gi) for T in B.basis]).T.reshape(9, -1)
    P = act_on_product(ge, B.product, tol)
    P.setflags(write=False)
    return EndoBasis(_basis_from_columns(_orthonormal(cols)), P)


def subspaces_equal(B1: EndoBasis, B2: EndoBasis, tol: Tolerance = DEFAULT_TOL) -> bool:
    X1, X2 = B1.coordinates(), B2.coordinates()
    r1 = numeric_rank(X1, tol.eps_rank)
    r2 = numeric_rank(X2, tol.eps_rank)
    if r1 != r2:
        return False
    return numeric_rank(np.vstack([X1, X2]), tol.eps_rank) == r1
