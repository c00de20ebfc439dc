"""Reduction of twist maps for the sl2 bracket, worked in the basis {H, E, F}.

In this basis the product matrix is [[1,0,0],[0,0,2],[0,2,0]], and a
traceless element of HL has the shape

    [[2 t11,  t12,    t13],
     [2 t13, -t11,    t23],
     [2 t12,  t32,   -t11]]

The five coordinates (t11, t12, t13, t23, t32) transform like the
coefficients of the binary quartic

    p(x) = t23 x^4 - 4 t13 x^3 + 6 t11 x^2 + 4 t12 x + t32.

Conjugating by exp(ad aF) moves p to p(x + a).  Killing t32 is therefore
the same as sending a root of p to 0.  After that, t12 = p'(0)/4 and the
root is simple exactly when t12 != 0, in which case exp(ad aE) with
a = -t11/(2 t12) clears t11.  Quartics with no simple finite root are
handled through their multiplicity pattern.  One pattern, two double
roots, admits no form with t11 = t32 = 0 at all; it stays as (t11,0,0,0,0),
a semisimple T with a repeated eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import max_abs
from .hl import numeric_rank
from .roots import cluster_roots, pick_root, poly_roots

__all__ = [
    "HEF",
    "shl_matrix",
    "shl_coords",
    "exp_E",
    "exp_F",
    "exp_mixed",
    "torus",
    "quartic",
    "Move",
    "StageOne",
    "reduce_stage_one",
    "canonicalize_sl2",
]

HEF = np.array([[1, 0, 0], [0, 0, 2], [0, 2, 0]], dtype=complex)


def shl_matrix(c) -> np.ndarray:
    t11, t12, t13, t23, t32 = (complex(x) for x in c)
    return np.array(
        [[2 * t11, t12, t13], [2 * t13, -t11, t23], [2 * t12, t32, -t11]], dtype=complex
    )


def shl_coords(T) -> np.ndarray:
    T = np.asarray(T, dtype=complex)
    return np.array([T[0, 0] / 2, T[0, 1], T[0, 2], T[1, 2], T[2, 1]])


def exp_E(a) -> np.ndarray:
    """exp(ad aE), the generator written g_a."""
    return np.array([[1, 0, a], [-2 * a, 1, -a * a], [0, 0, 1]], dtype=complex)


def exp_F(a) -> np.ndarray:
    """exp(ad aF), the generator written h_a."""
    return np.array([[1, -a, 0], [0, 1, 0], [2 * a, -a * a, 1]], dtype=complex)


def _ad(x) -> np.ndarray:
    eye = np.eye(3, dtype=complex)
    return np.array([HEF @ np.cross(x, eye[k]) for k in range(3)]).T


def exp_mixed(a, c) -> np.ndarray:
    """exp(ad(aH + ac E - (a/c) F)); the exponent is nilpotent."""
    N = _ad(np.array([a, a * c, -a / c], dtype=complex))
    return np.eye(3) + N + N @ N / 2


def torus(lam) -> np.ndarray:
    return np.diag([1, lam, 1 / lam]).astype(complex)


def quartic(c) -> list[complex]:
    t11, t12, t13, t23, t32 = c
    return [t23, -4 * t13, 6 * t11, 4 * t12, t32]


@dataclass(frozen=True)
class Move:
    kind: str  # "K" = exp(ad aE), "L" = exp(ad aF), "J" = mixed, "D" = torus
    params: tuple

    def matrix(self) -> np.ndarray:
        if self.kind == "K":
            return exp_E(*self.params)
        if self.kind == "L":
            return exp_F(*self.params)
        if self.kind == "J":
            return exp_mixed(*self.params)
        return torus(*self.params)


class _Run:
    def __init__(self, T0):
        self.T = np.array(T0, dtype=complex)
        self.g = np.eye(3, dtype=complex)
        self.moves: list[Move] = []

    def apply(self, kind, *params):
        mv = Move(kind, tuple(complex(p) for p in params))
        m = mv.matrix()
        self.g = m @ self.g
        self.T = m @ self.T @ np.linalg.inv(m)
        self.moves.append(mv)

    @property
    def c(self):
        return shl_coords(self.T)


@dataclass(frozen=True)
class StageOne:
    matrix: np.ndarray
    moves: tuple
    coords: np.ndarray
    semisimple: bool


def _char(T):
    """(c1, c0) with char poly x^3 + c1 x + c0 for a traceless 3x3 T."""
    return -np.trace(T @ T) / 2, -np.linalg.det(T)


def reduce_stage_one(T0, eps: float) -> StageOne:
    """Bring a nonzero traceless T0 to t11 = t32 = 0, or to the semisimple form.

    Generic inputs go through a simple root of the quartic.  Degenerate
    root patterns are recognised from matrix invariants of T0 instead of
    from clustered numerical roots, because multiple roots are computed
    with an error of order eps**(1/m).
    """
    run = _Run(T0)
    c = run.c
    s = max_abs(c)
    tiny = lambda v, k=1: abs(v) <= eps * s ** k
    t11, t12, t13, t23, t32 = c
    c1, c0 = _char(run.T)
    nilpotent = tiny(c1, 2) and tiny(c0, 3)
    degenerate = tiny(-4 * c1 ** 3 - 27 * c0 ** 2, 6)
    semisimple = False
    if nilpotent and numeric_rank(run.T, eps) <= 1:
        # quadruple root, at t13/t23 or at infinity
        if tiny(t23):
            run.apply("J", 1, 1)
        else:
            run.apply("L", t13 / t23)
    elif nilpotent:
        # triple root plus a simple one; the triple root also kills p''
        if tiny(t23) and tiny(t13) and tiny(t11):
            run.apply("L", -t32 / (4 * t12))
        else:
            dp = np.polyder(np.array(quartic(c)))
            cands = poly_roots([t23, -2 * t13, t11])
            r = min(cands, key=lambda z: (abs(np.polyval(dp, z)), abs(z)))
            run.apply("L", r)
    elif degenerate and numeric_rank(run.T + 3 * c0 / (2 * c1) * np.eye(3), eps) <= 1:
        # two double roots
        semisimple = True
        if tiny(t23):
            run.apply("L", -t12 / (3 * t11))
        else:
            b = -2 * t13 / t23
            run.apply("L", pick_root(poly_roots([1, b, (6 * t11 / t23 - b * b) / 2])))
            c = run.c
            run.apply("K", c[2] / (3 * c[0]))
    else:
        roots = poly_roots(quartic(c))
        if degenerate:
            single = [z for z, m in cluster_roots(roots) if m == 1]
            roots = single or roots
        run.apply("L", pick_root(roots))
        c = run.c
        run.apply("K", -c[0] / (2 * c[1]))
    return StageOne(run.g, tuple(run.moves), run.c, semisimple)


def canonicalize_sl2(T0, eps: float):
    """Full reduction of a nonzero traceless T0.

    Returns (branch, coords, g, moves) where ``coords`` are the final SHL
    coordinates with the asserted zeros set exactly, and g T0 g^-1 agrees
    with shl_matrix(coords) up to rounding.
    """
    st = reduce_stage_one(T0, eps)
    run = _Run(T0)
    for mv in st.moves:
        run.apply(mv.kind, *mv.params)
    c = run.c
    scale = max_abs(c)
    tiny = lambda v: abs(v) <= eps * scale
    if st.semisimple:
        return "ND2/rank3/semisimple", np.array([c[0], 0, 0, 0, 0]), run.g, run.moves
    t11, t12, t13, t23, t32 = c
    if tiny(t12):
        if tiny(t13):
            run.apply("D", 1 / np.sqrt(complex(t23)))
            return "ND2/rank1", np.array([0, 0, 0, 1, 0], dtype=complex), run.g, run.moves
        run.apply("K", t23 / (4 * t13))
        run.apply("D", 1 / run.c[2])
        return "ND2/rank2/caseA", np.array([0, 0, 1, 0, 0], dtype=complex), run.g, run.moves
    if tiny(t13) and tiny(t23):
        run.apply("J", 1, 1)
        c = run.c
        run.apply("K", c[3] / (4 * c[2]))
        run.apply("D", 1 / run.c[2])
        return "ND2/rank2/caseA", np.array([0, 0, 1, 0, 0], dtype=complex), run.g, run.moves
    run.apply("D", t12)
    c = run.c
    s = 0 if tiny(t13) else c[2]
    j = 0 if tiny(t23) else c[3]
    out = np.array([0, 1, s, j, 0], dtype=complex)
    if s == 0:
        return "ND2/rank3/caseA", out, run.g, run.moves
    if j == 0:
        return "ND2/rank2/caseB", out, run.g, run.moves
    return "ND2/rank3/caseB", out, run.g, run.moves
