"""Closed-form polynomial roots up to degree four, with Newton polishing.

Coefficients are given highest degree first, as in ``numpy.polyval``.
Roots are returned with multiplicity.  A reduction that needs "a root"
uses :func:`pick_root`, which prefers the smallest modulus and breaks ties
lexicographically on (re, im) so that branch choices are reproducible.
"""

from __future__ import annotations

import cmath
from typing import Callable, Sequence

import numpy as np

__all__ = ["poly_roots", "polish", "pick_root", "cluster_roots"]

_CBRT_UNITY = (1.0, complex(-0.5, 3 ** 0.5 / 2), complex(-0.5, -(3 ** 0.5) / 2))


def _trim(coeffs: Sequence[complex], rel: float) -> list[complex]:
    c = [complex(x) for x in coeffs]
    scale = max((abs(x) for x in c), default=0.0)
    if scale == 0.0:
        return []
    while c and abs(c[0]) <= rel * scale:
        c.pop(0)
    return c


def _quadratic(a, b, c):
    d = cmath.sqrt(b * b - 4 * a * c)
    # pick the sign that avoids cancellation
    q = -(b + d) / 2 if abs(b + d) >= abs(b - d) else -(b - d) / 2
    if q == 0:
        return [0j, 0j]
    return [q / a, c / q]


def _cubic(a, b, c, d):
    b, c, d = b / a, c / a, d / a
    shift = b / 3
    p = c - b * b / 3
    q = 2 * b ** 3 / 27 - b * c / 3 + d
    if p == 0 and q == 0:
        return [-shift] * 3
    disc = cmath.sqrt(q * q / 4 + p ** 3 / 27)
    u3 = -q / 2 + disc if abs(-q / 2 + disc) >= abs(-q / 2 - disc) else -q / 2 - disc
    u = u3 ** (1 / 3) if u3 != 0 else 0j
    out = []
    for w in _CBRT_UNITY:
        uw = u * w
        out.append(uw - p / (3 * uw) - shift if uw != 0 else -shift)
    return out


def _quartic(a, b, c, d, e):
    b, c, d, e = b / a, c / a, d / a, e / a
    shift = b / 4
    p = c - 3 * b * b / 8
    q = d - b * c / 2 + b ** 3 / 8
    r = e - b * d / 4 + b * b * c / 16 - 3 * b ** 4 / 256
    scale = max(1.0, abs(p), abs(q) ** (2 / 3), abs(r) ** 0.5)
    if abs(q) <= 1e-14 * scale ** 1.5:
        ys = []
        for z in _quadratic(1.0, p, r):
            s = cmath.sqrt(z)
            ys += [s, -s]
        return [y - shift for y in ys]
    # resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0, any nonzero root works;
    # the largest one keeps the subsequent divisions well conditioned
    m = max(_cubic(8.0, 8 * p, 2 * p * p - 8 * r, -q * q), key=abs)
    s = cmath.sqrt(2 * m)
    ys = []
    for sign in (1, -1):
        t = cmath.sqrt(-(2 * p + 2 * m + sign * 2 * q / s))
        ys += [(sign * s + t) / 2, (sign * s - t) / 2]
    return [y - shift for y in ys]


def polish(coeffs: Sequence[complex], root: complex, steps: int = 2) -> complex:
    c = np.asarray(coeffs, dtype=complex)
    dc = np.polyder(c)
    z = complex(root)
    for _ in range(steps):
        f = np.polyval(c, z)
        fp = np.polyval(dc, z)
        if fp == 0:
            break
        nz = z - f / fp
        # Newton can wander near multiple roots; keep the step only if it helps
        if abs(np.polyval(c, nz)) <= abs(f):
            z = complex(nz)
        else:
            break
    return z


def poly_roots(coeffs: Sequence[complex], rel: float = 1e-13) -> list[complex]:
    """All roots of a polynomial of degree at most four.

    Leading coefficients that are negligible relative to the largest one
    are dropped, so the returned list may be shorter than the nominal degree.
    An identically zero polynomial has no isolated roots and returns [].
    """
    c = _trim(coeffs, rel)
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg > 4:
        raise ValueError("closed forms are only implemented up to degree four")
    solver = {1: lambda a, b: [-b / a], 2: _quadratic, 3: _cubic, 4: _quartic}[deg]
    return [polish(c, z) for z in solver(*c)]


def cluster_roots(roots: Sequence[complex], rel: float = 1e-5) -> list[tuple[complex, int]]:
    """Group numerically coincident roots; returns (mean, multiplicity) pairs."""
    groups: list[list[complex]] = []
    for z in roots:
        for g in groups:
            if abs(z - g[0]) <= rel * max(1.0, abs(z), abs(g[0])):
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def pick_root(roots: Sequence[complex], accept: Callable[[complex], bool] | None = None) -> complex | None:
    cand = [complex(z) for z in roots if accept is None or accept(z)]
    if not cand:
        return None
    # round the modulus so that z and -z, computed independently, tie
    return min(cand, key=lambda z: (round(abs(z), 9), z.real, z.imag))
