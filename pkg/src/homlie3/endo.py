"""Isotropy groups and canonical forms of twist maps, class by class.

Each class is handled in a fixed working basis, where its formulas are
simplest.  ``basis_change(tag, p)`` is a fixed matrix h with
h . canonical(tag, p) = working(tag, p).  Everything in this module,
including the isotropy tests, lives in the working basis.

A reduction returns a :class:`CanonicalEndoForm`.  Its witness g lies in
the isotropy group of the working product and satisfies
g T g^-1 = canonical_T.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from .classify import (
    CLASS_TAGS,
    PARAMETRIC_TAGS,
    canonical_matrix,
    classify_product,
    parameters_match,
)
from .core import (
    DEFAULT_TOL,
    GroupElement,
    NotInHL,
    TagMismatch,
    Tolerance,
    UnknownClass,
    act_on_product,
    as_matrix,
    max_abs,
)
from .hl import hl_contains, nullspace
from .roots import pick_root, poly_roots
from .sl2 import HEF, canonicalize_sl2, shl_matrix

__all__ = [
    "IsotropyElement",
    "CanonicalEndoForm",
    "working_product",
    "basis_change",
    "is_exceptional",
    "isotropy_contains",
    "stabilizer_algebra",
    "sample_isotropy",
    "canonicalize_endo",
    "BRANCH_ZEROS",
    "branch_holds",
    "conjugation_invariants",
    "endo_forms_equivalent",
    "to_working",
    "hl_algebras_isomorphic",
    "ISOTROPY_DESCRIPTIONS",
]

_I = 1j


# ---------------------------------------------------------------- bases


def is_exceptional(tag: str, p) -> bool:
    """ND1 at a = +-i and D2_4 at z = +-i have a larger HL space and group."""
    if tag not in PARAMETRIC_TAGS or p is None:
        return False
    p = complex(p)
    return abs(p * p + 1) <= 1e-8 * (1 + abs(p) ** 2)


def _nd1_exc_change(a: complex) -> np.ndarray:
    P = np.array([[-2j, 0, 0], [0, 1, -1], [0, -1j, -1j]])
    g = np.linalg.inv(P)
    if a.imag > 0:
        g = np.diag([-4, 2, 2]) @ np.eye(3)[[0, 2, 1]] @ g
    else:
        g = np.diag([4, 2, 2]) @ g
    return g


_D24_P = np.array([[0, 1, 1], [0, -1j, 1j], [1, 0, 0]])


def working_product(tag: str, p=None) -> np.ndarray:
    if tag == "ND1":
        a = complex(canonical_matrix("ND1", p)[2, 1])
        if is_exceptional(tag, a):
            return np.array([[1, 0, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
        return canonical_matrix("ND1", a)
    if tag == "ND2":
        return HEF.copy()
    if tag == "ND3":
        return np.array([[1, 0, 0], [-1, 0, 2], [0, 2, 0]], dtype=complex)
    if tag == "D2_3":
        return np.array([[0, 0, 0], [-2, 0, 1], [0, 1, 0]], dtype=complex)
    if tag == "D2_4":
        z = complex(canonical_matrix("D2_4", p)[1, 0])
        if is_exceptional(tag, z):
            return (np.array([[0, 0, 0], [0, 0, 0], [0, 1, 0]]) if z.imag > 0
                    else np.array([[0, 0, 0], [0, 0, 1], [0, 0, 0]])).astype(complex)
        r = (z + _I) / (_I - z)
        return np.array([[0, 0, 0], [0, 0, 1], [0, r, 0]], dtype=complex)
    if tag in CLASS_TAGS:
        return canonical_matrix(tag)
    raise UnknownClass(tag)


def basis_change(tag: str, p=None) -> np.ndarray:
    """h with act_on_product(h, canonical(tag, p)) = working_product(tag, p)."""
    if tag == "ND1":
        a = complex(canonical_matrix("ND1", p)[2, 1])
        return _nd1_exc_change(a) if is_exceptional(tag, a) else np.eye(3, dtype=complex)
    if tag == "ND2":
        return 0.5j * np.array([[1, 0, 0], [0, 1, 1j], [0, 1, -1j]])
    if tag == "ND3":
        Q = np.eye(3)[[1, 0, 2]]
        P = np.column_stack([[0, 0, 2], [4, 0, 0], [0, 0.5, 0.5]])
        return -np.linalg.inv(P) @ Q + 0j
    if tag == "D2_3":
        Q = np.eye(3)[[1, 0, 2]]
        P = np.column_stack([[0, 0, 1], [1, 0, 0], [0, 1, 1]])
        return -np.linalg.inv(P) @ Q + 0j
    if tag == "D2_4":
        z = complex(canonical_matrix("D2_4", p)[1, 0])
        c = 2j if is_exceptional(tag, z) else _I - z
        return c * np.linalg.inv(_D24_P)
    if tag in CLASS_TAGS:
        return np.eye(3, dtype=complex)
    raise UnknownClass(tag)


def _flip(tag: str) -> np.ndarray:
    """Canonical-basis element mapping the parameter p to -p."""
    return np.diag([-1, -1, 1]).astype(complex) if tag == "ND1" else np.diag([1, -1, -1]).astype(complex)


# ---------------------------------------------------------------- isotropy


ISOTROPY_DESCRIPTIONS = {
    "ND1": "rotations about e1: [[1,0,0],[0,x,-y],[0,y,x]] with x^2+y^2=1",
    "ND1@exceptional": "stabiliser of [[1,0,0],[0,0,1],[0,0,0]]; computed from its Lie algebra",
    "ND2": "SO(3,C), generated by exp(ad aE), exp(ad aF), exp(ad(aH+acE-(a/c)F)) in the basis {H,E,F}",
    "ND3": "stabiliser computed from its Lie algebra; no reduction is attempted",
    "D2_1": "[[1,0,0],[0,s,b],[0,0,s]] with s = +-1",
    "D2_2": "[[L,u],[0,s]] with L L^T = s det(L) 1_2, s = +-1",
    "D2_3": "stabiliser computed from its Lie algebra; no reduction is attempted",
    "D2_4": "[[1,0,0],[c,a,0],[d,0,b]] with ab != 0",
    "D2_4@exceptional": "stabiliser computed from its Lie algebra",
    "D1_1": "[[1,0,0],[0,a,b],[0,c,d]] with ad-bc=1",
    "D1_2": "[[alpha,u^T],[0,L]] with det L = alpha",
    "D1_3": "[[a,b,c],[0,1,0],[0,d,a]] with a != 0",
}


@dataclass(frozen=True)
class IsotropyElement:
    class_tag: str
    parameters: dict
    matrix: GroupElement


def isotropy_contains(tag: str, g, p=None, tol: Tolerance = DEFAULT_TOL) -> bool:
    if tag not in CLASS_TAGS:
        raise UnknownClass(tag)
    W = working_product(tag, p)
    try:
        got = act_on_product(g, W, tol)
    except Exception:
        return False
    return max_abs(got - W) <= 1e-7 * max(1.0, max_abs(W))


def stabilizer_algebra(M, eps: float = 1e-10) -> np.ndarray:
    """Basis (k, 3, 3) of {X : -tr(X) M + X M + M X^T = 0}."""
    M = as_matrix(M)
    L = np.zeros((9, 9), dtype=complex)
    for k in range(9):
        X = np.zeros(9, dtype=complex)
        X[k] = 1
        X = X.reshape(3, 3, order="F")
        L[:, k] = (-np.trace(X) * M + X @ M + M @ X.T).reshape(9, order="F")
    K, _ = nullspace(L, eps)
    return np.array([K[:, i].reshape(3, 3, order="F") for i in range(K.shape[1])])


def _components(tag: str) -> list[np.ndarray]:
    if tag in ("D2_1", "D2_2"):
        return [np.eye(3, dtype=complex), np.diag([1, -1, -1]).astype(complex)]
    return [np.eye(3, dtype=complex)]


def _group_element(basis, comps, t: np.ndarray, k: int) -> np.ndarray:
    n = len(basis)
    coef = t[:n] + 1j * t[n:]
    X = np.tensordot(coef, basis, axes=1) if n else np.zeros((3, 3))
    return expm(X) @ comps[k]


def sample_isotropy(tag: str, rng: np.random.Generator, p=None, scale: float = 0.7) -> np.ndarray:
    basis = stabilizer_algebra(working_product(tag, p))
    comps = _components(tag)
    t = rng.normal(scale=scale, size=2 * len(basis))
    return _group_element(basis, comps, t, int(rng.integers(len(comps))))


# ---------------------------------------------------------------- forms


@dataclass(frozen=True)
class CanonicalEndoForm:
    class_tag: str
    branch: str
    canonical_T: np.ndarray
    witness: IsotropyElement
    residual_parameters: tuple = ()
    parameter: complex | None = None
    input_T: np.ndarray | None = field(default=None, repr=False)


# asserted-zero entries per branch (0-based); relations are checked in branch_holds
BRANCH_ZEROS: dict[str, tuple] = {
    "ND1/caseA": ((0, 2),),
    "ND1/caseB+/T23": ((1, 2),),
    "ND1/caseB-/T23": ((1, 2),),
    "ND1/caseB+/T12": (),
    "ND1/caseB-/T12": (),
    "ND1/caseC/T23": ((0, 1), (0, 2), (1, 0), (2, 0), (1, 2)),
    "ND1/caseC/fixed": ((0, 1), (0, 2), (1, 0), (2, 0)),
    "ND2/scalar": ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)),
    "ND2/rank1": ((0, 1), (0, 2), (1, 0), (2, 0), (2, 1)),
    "ND2/rank2/caseA": ((0, 1), (1, 2), (2, 0), (2, 1)),
    "ND2/rank2/caseB": ((1, 2), (2, 1)),
    "ND2/rank3/caseA": ((0, 2), (1, 0), (2, 1)),
    "ND2/rank3/caseB": ((2, 1),),
    "ND2/rank3/semisimple": ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)),
    "D2_1/T23": ((1, 2),),
    "D2_1/nilpotent": ((1, 1), (2, 2), (2, 1)),
    "D2_2/case1": ((1, 0), (0, 2), (1, 2), (2, 0), (2, 1)),
    "D2_2/case2": ((1, 0), (2, 0), (2, 1)),
    "D2_2/case3": ((0, 2), (1, 2), (2, 0), (2, 1)),
    "D2_2/case4": ((2, 0), (2, 1)),
    "D2_2/isotropic/v0": ((0, 2), (1, 2), (2, 0), (2, 1)),
    "D2_2/isotropic/full": ((2, 0), (2, 1)),
    "D2_4/case1": ((0, 1), (0, 2), (1, 0), (2, 0)),
    "D2_4/case2": ((0, 1), (0, 2)),
    "D1_1/case1": ((1, 1), (2, 1), (2, 2)),
    "D1_1/case2": ((1, 2), (2, 1)),
    "D1_2/case1": ((1, 2), (2, 1), (2, 2)),
    "D1_2/case2": ((0, 1), (0, 2), (1, 0), (2, 0), (2, 1)),
    "D1_2/case3": ((1, 0), (2, 0), (2, 1)),
    "D1_3/case1": ((1, 0), (1, 2), (2, 1), (2, 2)),
    "D1_3/case2": ((1, 0), (1, 2), (2, 0)),
}

_BRANCH_NONZERO: dict[str, tuple] = {
    "ND1/caseA": ((0, 1),),
    "D1_3/case1": ((2, 0),),
    "D2_4/case1": (),
}


def _membership_branch(tag: str) -> str:
    return f"{tag}/membership-only"


def branch_holds(form: CanonicalEndoForm, eps: float = DEFAULT_TOL.eps_zero) -> bool:
    """Zero pattern plus the relations that define the branch."""
    T = form.canonical_T
    b = form.branch
    if b.endswith("membership-only"):
        return True
    if any(abs(T[i, j]) > eps for i, j in BRANCH_ZEROS[b]):
        return False
    if any(abs(T[i, j]) <= eps for i, j in _BRANCH_NONZERO.get(b, ())):
        return False
    s = max(1.0, max_abs(T))
    close = lambda x, y: abs(x - y) <= 1e-7 * s
    if b.startswith("ND1/caseB"):
        sgn = 1 if "+" in b else -1
        ok = close(T[0, 2], sgn * 1j * T[0, 1]) and abs(T[0, 1]) > eps
        return ok and (close(T[0, 1], 1) if b.endswith("T12") else True)
    if b == "D2_2/case2":
        return close(T[0, 0], T[2, 2]) or close(T[1, 1], T[2, 2])
    if b in ("D2_2/case3", "D2_2/case4"):
        ok = close(T[0, 0], T[1, 1]) and close(T[0, 1], -T[1, 0])
        if b == "D2_2/case4":
            ok = ok and close(T[2, 2], T[0, 0] + 1j * T[1, 0])
        return ok
    if b == "D1_2/case1":
        return abs(T[1, 0]) > eps or abs(T[2, 0]) > eps
    if b == "D1_2/case3":
        return close(T[1, 1], T[0, 0]) or close(T[2, 2], T[0, 0])
    return True


class _Acc:
    """Accumulates a conjugating group element."""

    def __init__(self, T):
        self.T = np.array(T, dtype=complex)
        self.g = np.eye(3, dtype=complex)
        self.params: dict = {}

    def apply(self, g, **params):
        g = np.asarray(g, dtype=complex)
        self.g = g @ self.g
        self.T = g @ self.T @ np.linalg.inv(g)
        for k, v in params.items():
            self.params[k] = v


def _eigvec2(A: np.ndarray, lam: complex) -> np.ndarray:
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    u = np.array([b, lam - a])
    v = np.array([lam - d, c])
    e = u if np.linalg.norm(u) >= np.linalg.norm(v) else v
    if np.linalg.norm(e) == 0:
        return np.array([1, 0], dtype=complex)
    return e / np.linalg.norm(e)


def _eig2(A: np.ndarray) -> list[complex]:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    r = cmath.sqrt(tr * tr / 4 - det)
    return [tr / 2 + r, tr / 2 - r]


def _sl2_from_columns(e: np.ndarray, f: np.ndarray | None = None) -> np.ndarray:
    """Lambda in SL2 whose inverse has first column proportional to e."""
    if f is None:
        f = np.array([-np.conj(e[1]), np.conj(e[0])])
    P = np.column_stack([e, f])
    P = P / cmath.sqrt(np.linalg.det(P))
    return np.linalg.inv(P)


def _block(x, L) -> np.ndarray:
    g = np.zeros((3, 3), dtype=complex)
    g[0, 0] = x
    g[1:, 1:] = L
    return g


def _quadratic_in(f: Callable[[complex], complex]) -> list[complex]:
    """Coefficients of a polynomial of degree <= 2 from three samples."""
    y0, y1, ym = f(0), f(1), f(-1)
    return [(y1 + ym) / 2 - y0, (y1 - ym) / 2, y0]


# ---- per-class reductions; each returns (branch, acc, residuals)


def _rotation(k: complex) -> np.ndarray:
    x = (k + 1 / k) / 2
    y = (1 / k - k) / (2j)
    return _block(1, [[x, -y], [y, x]])


def _nd1(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    w = T[0, 1:]
    nw = float(np.linalg.norm(w))
    q = w[0] ** 2 + w[1] ** 2
    if nw > tol.eps_rank * s and abs(q) > tol.eps_rank * nw * nw:
        r = cmath.sqrt(q)
        x, y = w[0] / r, -w[1] / r
        acc.apply(_block(1, [[x, -y], [y, x]]), x=x, y=y)
        return "ND1/caseA", acc, ("sign of T12",)

    def k2_t23(k):
        R = _rotation(k)
        return k * k * (R @ acc.T @ np.linalg.inv(R))[1, 2]

    # k^2 T23'(k) = A k^4 + B k^2 + C; sample at k^2 = 1, -1, i
    f1, fm, fi = k2_t23(1), k2_t23(1j), k2_t23(cmath.exp(0.25j * cmath.pi))
    C = ((f1 + fm) / 2 + (fi - 1j * (f1 - fm) / 2)) / 2
    A = (f1 + fm) / 2 - C
    B = (f1 - fm) / 2
    scale = max(abs(A), abs(B), abs(C))
    if nw > tol.eps_rank * s:
        sign = "+" if abs(w[1] - 1j * w[0]) <= abs(w[1] + 1j * w[0]) else "-"
        stem = f"ND1/caseB{sign}"
    else:
        stem = "ND1/caseC"
    if scale <= tol.eps_zero * s:
        return (f"{stem}/T23", acc, ()) if stem == "ND1/caseC" else _nd1_norm(acc, stem, tol)
    ks = [k for k in poly_roots([A, 0, B, 0, C]) if abs(k) > 1e-6]
    k = pick_root(ks)
    if k is None:
        if stem == "ND1/caseC":
            return "ND1/caseC/fixed", acc, ()
        return _nd1_norm(acc, stem, tol)
    acc.apply(_rotation(k), k=k)
    return f"{stem}/T23", acc, ("choice among the roots k",)


def _nd1_norm(acc, stem, tol):
    # T12 scales by k or 1/k on the two isotropic lines
    t12 = acc.T[0, 1]
    k = 1 / t12 if stem.endswith("+") else t12
    probe = (_rotation(k) @ acc.T @ np.linalg.inv(_rotation(k)))[0, 1]
    if abs(probe - 1) > 1e-6:
        k = 1 / k
    acc.apply(_rotation(k), k=k)
    return f"{stem}/T12", acc, ()


def _d21(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    g = lambda b: np.array([[1, 0, 0], [0, 1, b], [0, 0, 1]], dtype=complex)
    f = lambda b: (g(b) @ T @ np.linalg.inv(g(b)))[1, 2]
    co = _quadratic_in(f)
    if abs(co[0]) <= tol.eps_rank * s and abs(co[1]) <= tol.eps_rank * s:
        if abs(co[2]) <= tol.eps_zero * s:
            return "D2_1/T23", acc, ()
        return "D2_1/nilpotent", acc, ()
    b = pick_root(poly_roots(co))
    acc.apply(g(b), b=b, s=1)
    return "D2_1/T23", acc, ("other root", "s = -1")


def _d22(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    th = T[:2, :2]
    t33 = T[2, 2]
    rot = abs(th[0, 0] - th[1, 1]) <= tol.eps_rank * s and abs(th[0, 1] + th[1, 0]) <= tol.eps_rank * s
    lams = _eig2(th)
    hits33 = [abs(l - t33) <= 1e-7 * s for l in lams]
    singular = any(hits33)
    if rot:
        if singular:
            p, q = th[0, 0], th[1, 0]
            if abs(q) > tol.eps_rank * s and abs(t33 - (p - 1j * q)) < abs(t33 - (p + 1j * q)):
                acc.apply(np.diag([1, -1, -1]), reflection=True)
            return "D2_2/case4", acc, ()
        _kill_v(acc)
        return "D2_2/case3", acc, ()
    if singular:
        order = sorted(range(2), key=lambda i: not hits33[i])
    else:
        order = sorted(range(2), key=lambda i: (lams[i].real, lams[i].imag))
    for i in order:
        e = _eigvec2(th, lams[i])
        ee = e[0] ** 2 + e[1] ** 2
        if abs(ee) > 1e-6:
            n = e / cmath.sqrt(ee)
            g = np.eye(3, dtype=complex)
            g[:2, :2] = [[n[0], n[1]], [-n[1], n[0]]]
            acc.apply(g)
            if singular:
                return "D2_2/case2", acc, ("sign of T12", "order of the diagonal")
            _kill_v(acc)
            return "D2_2/case1", acc, ("sign of T12", "order of the diagonal")
    # only isotropic eigenvectors and not of rotation type
    if singular:
        return "D2_2/isotropic/full", acc, ()
    _kill_v(acc)
    return "D2_2/isotropic/v0", acc, ()


def _kill_v(acc):
    th, v, t33 = acc.T[:2, :2], acc.T[:2, 2], acc.T[2, 2]
    u = np.linalg.solve(th - t33 * np.eye(2), v)
    g = np.eye(3, dtype=complex)
    g[:2, 2] = u
    acc.apply(g, u=tuple(u))


def _d24(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    th = T[1:, 1:] - T[0, 0] * np.eye(2)
    if abs(np.linalg.det(th)) <= tol.eps_rank * s * s:
        return "D2_4/case2", acc, ()
    u = np.linalg.solve(th, T[1:, 0])
    g = np.eye(3, dtype=complex)
    g[1:, 0] = u
    acc.apply(g, c=u[0], d=u[1])
    return "D2_4/case1", acc, ("diagonal scaling (a, b)",)


def _d11(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    th = T[1:, 1:]
    det = th[0, 0] * th[1, 1] - th[0, 1] * th[1, 0]
    if abs(det) <= tol.eps_rank * s * s:
        if max_abs(th) > tol.eps_zero * s:
            acc.apply(_block(1, _sl2_from_columns(_eigvec2(th, 0))))
        return "D1_1/case1", acc, ("scaling of T23",)
    lam = cmath.sqrt(-det)
    L = _sl2_from_columns(_eigvec2(th, lam), _eigvec2(th, -lam))
    acc.apply(_block(1, L))
    return "D1_1/case2", acc, ("order of the eigenvalues",)


def _d12(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    v = T[1:, 0]
    th = T[1:, 1:]
    if np.linalg.norm(v) > tol.eps_rank * s:
        u = _d12_u(th, v, tol.eps_rank * s)
        g = np.eye(3, dtype=complex)
        g[0, 1:] = u
        acc.apply(g, u=tuple(u))
        th1 = acc.T[1:, 1:]
        col = th1[:, int(np.argmax(np.linalg.norm(th1, axis=0)))]
        row = th1[int(np.argmax(np.linalg.norm(th1, axis=1)))]
        P = np.column_stack([col, [-row[1], row[0]]])
        L = np.linalg.inv(P)
        acc.apply(_block(np.linalg.det(L), L))
        return "D1_2/case1", acc, ()
    lams = _eig2(th)
    hit = [abs(l - T[0, 0]) <= 1e-7 * s for l in lams]
    order = sorted(range(2), key=lambda i: (not hit[i], lams[i].real, lams[i].imag))
    L = _sl2_from_columns(_eigvec2(th, lams[order[0]]))
    acc.apply(_block(1, L))
    if any(hit):
        return "D1_2/case3", acc, ()
    w = acc.T[0, 1:]
    u = -np.linalg.solve((acc.T[1:, 1:] - acc.T[0, 0] * np.eye(2)).T, w)
    g = np.eye(3, dtype=complex)
    g[0, 1:] = u
    acc.apply(g, u=tuple(u))
    return "D1_2/case2", acc, ()


def _d12_u(th, v, thr):
    """u with det(th - v u^T) = 0 and tr(th - v u^T) != 0."""
    adj = np.array([[th[1, 1], -th[0, 1]], [-th[1, 0], th[0, 0]]])
    r = adj @ v
    det = np.linalg.det(th)
    tr = np.trace(th)
    if np.linalg.norm(r) <= thr:
        if abs(tr) > thr:
            return np.zeros(2, dtype=complex)
        return -np.conj(v) / np.vdot(v, v)
    u0 = det * np.conj(r) / np.vdot(r, r)
    n = np.array([r[1], -r[0]])
    g0 = tr - u0 @ v
    nv = n @ v
    if abs(g0) > 1e-3 * max(1.0, abs(tr)) or abs(nv) <= thr:
        return u0
    return u0 + (g0 - 1) / nv * n


def _d13(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    t31 = T[2, 0]
    if abs(t31) <= tol.eps_rank * s:
        return "D1_3/case2", acc, ()
    b, c = T[2, 1] / t31, T[2, 2] / t31
    acc.apply(np.array([[1, b, c], [0, 1, 0], [0, 0, 1]]), a=1, b=b, c=c, d=0)
    return "D1_3/case1", acc, ()


def _nd2(T, tol):
    acc = _Acc(T)
    s = max(1.0, max_abs(T))
    lam = np.trace(T) / 3
    T0 = T - lam * np.eye(3)
    if max_abs(T0) <= tol.eps_rank * s:
        return "ND2/scalar", acc, (), lam * np.eye(3)
    branch, coords, g, moves = canonicalize_sl2(T0, tol.eps_rank)
    acc.apply(g, moves=[(m.kind, m.params) for m in moves])
    return branch, acc, (), shl_matrix(coords) + lam * np.eye(3)


_REDUCERS = {"ND1": _nd1, "D2_1": _d21, "D2_2": _d22, "D2_4": _d24,
             "D1_1": _d11, "D1_2": _d12, "D1_3": _d13}


def canonicalize_endo(tag: str, T, p=None, tol: Tolerance = DEFAULT_TOL) -> CanonicalEndoForm:
    """Reduce T in HL(working_product(tag, p)) under the isotropy group."""
    if tag not in CLASS_TAGS:
        raise UnknownClass(tag)
    T = as_matrix(T)
    W = working_product(tag, p)
    if not hl_contains(W, T, tol):
        raise NotInHL(f"T is not in HL of the {tag} working product")
    param = None
    if tag in PARAMETRIC_TAGS:
        param = complex(canonical_matrix(tag, p)[2, 1] if tag == "ND1" else canonical_matrix(tag, p)[1, 0])
    exact = None
    if tag in ("ND3", "D2_3") or is_exceptional(tag, param):
        branch, acc, resid = _membership_branch(tag), _Acc(T), ()
    elif tag == "ND2":
        branch, acc, resid, exact = _nd2(T, tol)
    else:
        branch, acc, resid = _REDUCERS[tag](T, tol)
    C = acc.T.copy() if exact is None else np.array(exact, dtype=complex)
    for i, j in BRANCH_ZEROS.get(branch, ()):
        C[i, j] = 0
    C.setflags(write=False)
    witness = IsotropyElement(tag, dict(acc.params), GroupElement(acc.g))
    return CanonicalEndoForm(tag, branch, C, witness, tuple(resid), param, T)


# ---------------------------------------------------------------- equivalence


def conjugation_invariants(T) -> dict:
    T = as_matrix(T)
    s = max(1.0, max_abs(T))
    ev = np.linalg.eigvals(T)
    groups: list[list[complex]] = []
    for z in ev:
        for g in groups:
            if abs(z - g[0]) <= 1e-5 * s:
                g.append(z)
                break
        else:
            groups.append([z])
    from .hl import numeric_rank

    jordan = sorted(
        (len(g), numeric_rank(T - np.mean(g) * np.eye(3), 1e-6)) for g in groups
    )
    return {
        "charpoly": np.poly(T)[1:],
        "jordan": jordan,
        "rank": numeric_rank(T, 1e-6),
    }


def _invariants_differ(T1, T2) -> bool:
    a, b = conjugation_invariants(T1), conjugation_invariants(T2)
    s = max(1.0, max_abs(T1), max_abs(T2))
    scales = np.array([s, s * s, s ** 3])
    if np.any(np.abs(a["charpoly"] - b["charpoly"]) > 1e-7 * scales):
        return True
    return a["jordan"] != b["jordan"] or a["rank"] != b["rank"]


def _search(tag, T1, T2, p, seed: int, samples: int = 1000, refine: int = 20) -> bool:
    W = working_product(tag, p)
    basis = stabilizer_algebra(W)
    comps = _components(tag)
    rng = np.random.default_rng(seed)
    s = max(1.0, max_abs(T1), max_abs(T2))
    n = len(basis)

    def resid(t, k):
        g = _group_element(basis, comps, t, k)
        return (g @ T1 - T2 @ g) / s

    if n == 0:
        return any(max_abs(resid(np.zeros(0), k)) <= 1e-6 for k in range(len(comps)))
    pool = []
    for _ in range(samples):
        t = rng.normal(scale=1.0, size=2 * n)
        k = int(rng.integers(len(comps)))
        g = _group_element(basis, comps, t, k)
        r = max_abs(g @ T1 @ np.linalg.inv(g) - T2) / s
        if r <= 1e-6:
            return True
        pool.append((r, k, t))
    pool.sort(key=lambda x: x[0])

    def fun(t, k):
        r = resid(t, k).ravel()
        return np.concatenate([r.real, r.imag])

    for _, k, t in pool[:refine]:
        sol = least_squares(fun, t, args=(k,), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        g = _group_element(basis, comps, sol.x, k)
        if abs(np.linalg.det(g)) > 1e-8 and max_abs(g @ T1 @ np.linalg.inv(g) - T2) / s <= 1e-6:
            return True
    return False


def endo_forms_equivalent(tag: str, F1: CanonicalEndoForm, F2: CanonicalEndoForm,
                          seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> str:
    if F1.class_tag != tag or F2.class_tag != tag:
        raise TagMismatch(f"forms are tagged {F1.class_tag}/{F2.class_tag}, expected {tag}")
    p1, p2 = F1.parameter, F2.parameter
    if tag in PARAMETRIC_TAGS:
        if not parameters_match(tag, p1, p2, 1e-9):
            return "no"
        if abs(p1 - p2) > abs(p1 + p2):
            # move F2 across the sign flip of the parameter, then reduce again
            t = basis_change(tag, p1) @ _flip(tag) @ np.linalg.inv(basis_change(tag, p2))
            F2 = canonicalize_endo(tag, t @ F2.canonical_T @ np.linalg.inv(t), p1, tol)
    C1, C2 = F1.canonical_T, F2.canonical_T
    if _invariants_differ(C1, C2):
        return "no"
    s = max(1.0, max_abs(C1), max_abs(C2))
    same = F1.branch == F2.branch and max_abs(C1 - C2) <= 1e-7 * s
    if same:
        return "yes"
    if tag == "ND2":
        # the reduction lands on one representative per orbit
        return "no"
    if tag == "ND1" and not is_exceptional(tag, p1) and (
        F1.branch == F2.branch == "ND1/caseA" or F1.branch.endswith("/T12") and F1.branch == F2.branch
    ):
        # the rotation reaching these shapes is unique
        return "no"
    return "yes" if _search(tag, C1, C2, p1, seed) else "undecided"


def to_working(M, tol: Tolerance = DEFAULT_TOL):
    """(ProductClass, G) with act_on_product(G, M) = working_product(tag, p)."""
    pc = classify_product(M, tol)
    if pc.tag not in CLASS_TAGS:
        return pc, pc.witness.matrix
    return pc, basis_change(pc.tag, pc.parameter) @ pc.witness.matrix


def hl_algebras_isomorphic(M1, T1, M2, T2, seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> str:
    M1, T1, M2, T2 = (as_matrix(x) for x in (M1, T1, M2, T2))
    if not hl_contains(M1, T1, tol) or not hl_contains(M2, T2, tol):
        raise NotInHL("both twist maps must lie in HL of their products")
    c1, G1 = to_working(M1, tol)
    c2, G2 = to_working(M2, tol)
    if c1.tag != c2.tag or not parameters_match(c1.tag, c1.parameter, c2.parameter, 1e-9):
        return "no"
    S1 = G1 @ T1 @ np.linalg.inv(G1)
    S2 = G2 @ T2 @ np.linalg.inv(G2)
    if c1.tag not in CLASS_TAGS:
        if _invariants_differ(S1, S2):
            return "no"
        if c1.tag == "X_ZERO":
            return "yes"  # the whole of GL3 acts, so Jordan data decide
        return "yes" if _search_generic(c1.canonical_matrix, S1, S2, seed) else "undecided"
    F1 = canonicalize_endo(c1.tag, S1, c1.parameter, tol)
    F2 = canonicalize_endo(c2.tag, S2, c2.parameter, tol)
    return endo_forms_equivalent(c1.tag, F1, F2, seed, tol)


def _search_generic(M, T1, T2, seed):
    basis = stabilizer_algebra(M)
    rng = np.random.default_rng(seed)
    s = max(1.0, max_abs(T1), max_abs(T2))
    n = len(basis)
    comps = [np.eye(3, dtype=complex)]

    def fun(t):
        g = _group_element(basis, comps, t, 0)
        r = ((g @ T1 - T2 @ g) / s).ravel()
        return np.concatenate([r.real, r.imag])

    for _ in range(20):
        sol = least_squares(fun, rng.normal(size=2 * n), max_nfev=400)
        g = _group_element(basis, comps, sol.x, 0)
        if abs(np.linalg.det(g)) > 1e-8 and max_abs(g @ T1 @ np.linalg.inv(g) - T2) / s <= 1e-6:
            return True
    return False
