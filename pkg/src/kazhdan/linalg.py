"""Small exact rational linear algebra: LDL^T with pivoting, inverses, rank."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list  # list of lists of Fraction


def to_fractions(m) -> Matrix:
    return [[Fraction(v) for v in row] for row in m]


def ldl_pivoted(a: Sequence[Sequence[Fraction]]):
    """Symmetric diagonal pivoting: P A P^T = L D L^T with unit lower triangular L.

    Returns ``(perm, L, d)`` where ``perm[k]`` is the original index placed at
    position k.  Raises ``ValueError`` if a negative pivot occurs or a zero
    pivot has a nonzero column below it, both of which mean A is not PSD.
    """
    n = len(a)
    w = [list(map(Fraction, row)) for row in a]
    perm = list(range(n))
    L = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for k in range(n):
        # largest remaining diagonal entry keeps fill-in and denominators tame
        j = max(range(k, n), key=lambda i: w[i][i])
        if j != k:
            w[k], w[j] = w[j], w[k]
            for row in w:
                row[k], row[j] = row[j], row[k]
            perm[k], perm[j] = perm[j], perm[k]
            L[k], L[j] = L[j], L[k]
            for row in L:
                row[k], row[j] = row[j], row[k]
        piv = w[k][k]
        L[k][k] = Fraction(1)
        if piv < 0:
            raise ValueError(f"negative pivot {float(piv):.3e} at step {k}")
        if piv == 0:
            if any(w[i][k] != 0 for i in range(k + 1, n)):
                raise ValueError(f"zero pivot with nonzero column at step {k}")
            continue
        d[k] = piv
        col = [w[i][k] / piv for i in range(k + 1, n)]
        for off, i in enumerate(range(k + 1, n)):
            L[i][k] = col[off]
        for off_i, i in enumerate(range(k + 1, n)):
            li = col[off_i]
            if not li:
                continue
            wi = w[i]
            for j2 in range(k + 1, i + 1):
                v = wi[j2] - li * w[k][j2]
                wi[j2] = v
                w[j2][i] = v
    return perm, L, d


def is_psd_exact(a) -> bool:
    try:
        ldl_pivoted(a)
    except ValueError:
        return False
    return True


def inverse(a: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def independent_rows(rows: Sequence[Sequence[Fraction]], order: Sequence[int]) -> list[int]:
    """Greedy choice of linearly independent rows, visiting them in ``order``."""
    basis: list[tuple[int, list]] = []  # (pivot column, reduced row)
    chosen = []
    for idx in order:
        v = list(map(Fraction, rows[idx]))
        for pc, b in basis:
            if v[pc]:
                f = v[pc] / b[pc]
                v = [x - f * y for x, y in zip(v, b)]
        pc = next((i for i, x in enumerate(v) if x), None)
        if pc is not None:
            basis.append((pc, v))
            chosen.append(idx)
    return chosen


def matvec(a, x):
    return [sum((ai * xi for ai, xi in zip(row, x)), Fraction(0)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]
