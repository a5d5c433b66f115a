"""Norm bounds for Harper's operator H = S + S^* + 2 cos(2 pi theta n) on l^2(Z).

Two closed-form bounds are compared with truncated spectra:

* the known estimate, ``sqrt(8 + 8 (cos pi t - sin pi t) cos pi t)`` on
  ``[0, 1/4]`` and ``2 sqrt 2`` on ``[1/4, 1/2]``;
* bounds read off from squares in the Heisenberg group algebra.  A square
  ``q^* q``, averaged over the automorphisms permuting ``e^{+-1}, g^{+-1}``,
  becomes ``V(theta) + W(theta) H`` under the representation sending ``e``
  to the shift, ``g`` to multiplication by ``exp(2 pi i theta n)`` and the
  central ``f`` to ``exp(2 pi i theta)``.  Positivity gives ``H <= -V/W``
  whenever ``W < 0``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from .algebra import AlgebraElement, element
from .groups import HeisenbergEngine
from .symmetry import aut_s_group

THETA = sympy.Symbol("theta", real=True)


def literature_bound(theta: float) -> float:
    t = theta % 1.0
    t = min(t, 1.0 - t)
    if t <= 0.25:
        c, s = math.cos(math.pi * t), math.sin(math.pi * t)
        return math.sqrt(8 + 8 * (c - s) * c)
    return 2 * math.sqrt(2)


def improved_bound(theta: float) -> float:
    c = math.cos(2 * math.pi * theta)
    return (44 - 40 * c) / (13 - 12 * c)


def truncated_norm(theta: float, window: int) -> float:
    """Norm of H compressed to the sites ``-window/2 <= n < window/2``."""
    if window < 2:
        raise ValueError("window must hold at least two sites")
    n = np.arange(-(window // 2), window - window // 2)
    diag = 2 * np.cos(2 * np.pi * theta * n)
    off = np.ones(window - 1)
    lo = eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
    hi = eigvalsh_tridiagonal(diag, off, select="i", select_range=(window - 1, window - 1))[0]
    return float(max(-lo, hi))


@dataclass
class HarperBoundCurve:
    thetas: list
    literature: list
    improved: list
    truncated: list
    window: int
    interval: tuple | None  # where the improved bound beats the known one

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "literature", "improved", "truncated_norm", "window", "improved_beats_literature"])
        for t, a, b, c in zip(self.thetas, self.literature, self.improved, self.truncated):
            w.writerow([f"{t:.6f}", f"{a:.10f}", f"{b:.10f}", f"{c:.10f}", self.window, int(b < a)])
        if self.interval:
            w.writerow(["# interval", f"{self.interval[0]:.6f}", f"{self.interval[1]:.6f}", "", "", ""])
        return buf.getvalue()


def improvement_interval() -> tuple[float, float]:
    """Endpoints in (0, 1/4) where the improved bound crosses the known one."""
    diff = lambda t: improved_bound(t) - literature_bound(t)  # noqa: E731
    grid = np.linspace(1e-4, 0.25, 2001)
    vals = [diff(t) for t in grid]
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(diff, a, b, xtol=1e-12))
    if len(roots) < 2:
        raise ValueError("the bounds do not cross twice on (0, 1/4)")
    return roots[0], roots[1]


def harper_curves(thetas: Sequence[float], window: int = 2048, threads: int = 1) -> HarperBoundCurve:
    if window < 64:
        raise ValueError("window must be at least 64")
    thetas = [float(t) for t in thetas]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            trunc = list(pool.map(lambda t: truncated_norm(t, window), thetas))
    else:
        trunc = [truncated_norm(t, window) for t in thetas]
    return HarperBoundCurve(
        thetas,
        [literature_bound(t) for t in thetas],
        [improved_bound(t) for t in thetas],
        trunc,
        window,
        improvement_interval(),
    )


# ---------------------------------------------------------------------------
# bounds from squares


@dataclass
class SquareBound:
    averaged: AlgebraElement
    scalar: sympy.Expr  # V(theta)
    coefficient: sympy.Expr  # W(theta), multiplying H
    bound: sympy.Expr | None  # -V/W, None when W vanishes identically

    def __call__(self, theta: float) -> float:
        if self.bound is None:
            return math.inf
        return float(self.bound.subs(THETA, theta))


def _average(q: AlgebraElement) -> AlgebraElement:
    sq = q.star() * q
    auts = aut_s_group(q.engine)
    out: dict = {}
    for t in auts:
        for g, c in sq.coeffs.items():
            y = t(g)
            out[y] = out.get(y, 0) + Fraction(c) / len(auts)
    return AlgebraElement(q.engine, {k: v for k, v in out.items() if v})


def harper_sdp_bound(q: AlgebraElement) -> SquareBound:
    """Bound on H from the positivity of the averaged square of q."""
    if not isinstance(q.engine, HeisenbergEngine):
        raise ValueError("q must live in the Heisenberg group algebra")
    avg = _average(q)
    V, W = sympy.Integer(0), sympy.Integer(0)
    hop: dict = {}
    for (a, b, c), coef in avg.coeffs.items():
        phase = sympy.cos(2 * sympy.pi * c * THETA)
        r = sympy.Rational(coef.numerator, coef.denominator)
        if a == 0 and b == 0:
            V += r * phase
        elif abs(a) + abs(b) == 1:
            hop.setdefault(c, []).append(r)
        else:
            raise ValueError("averaged square has terms outside span{1, H} under the representation")
    for c, coefs in hop.items():
        if len(coefs) != 4 or len(set(coefs)) != 1:
            raise ValueError("averaged square is not symmetric in the four hopping terms")
        W += coefs[0] * sympy.cos(2 * sympy.pi * c * THETA)
    V = sympy.simplify(V)
    W = sympy.simplify(W)
    bound = None
    if W != 0:
        bound = sympy.simplify(-V / W)
    return SquareBound(avg, V, W, bound)


def improved_square() -> AlgebraElement:
    """The square ``e + 2f + 2g - 2fg - 3`` behind the closed-form improved bound."""
    h = HeisenbergEngine()
    return element(h, {"e": 1, "f": 2, "g": 2, "f g": -2, "1": -3})
