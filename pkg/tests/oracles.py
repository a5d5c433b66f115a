"""Independent reference implementations used only by the tests."""

import cvxpy as cp
import numpy as np


def cvxpy_optimum(problem):
    """Maximize offset + b.z over A z = c with z in the problem's cone, using cvxpy."""
    mats = [cp.Variable((d, d), symmetric=True) for d in problem.block_dims]
    scal = cp.Variable(problem.n_scalar, nonneg=True) if problem.n_scalar else None
    z = []
    for col in problem.columns:
        if col[0] == "scalar":
            z.append(scal[col[1]])
        else:
            blk, i, j = col
            z.append(mats[blk][i, j])
    z = cp.hstack(z)
    A = np.zeros((problem.n_rows, problem.n_cols))
    for r, row in enumerate(problem.A):
        for k, v in row.items():
            A[r, k] = float(v)
    cons = [m >> 0 for m in mats] + [A @ z == np.array([float(v) for v in problem.c])]
    obj = float(problem.offset) + np.array([float(v) for v in problem.b]) @ z
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def dense_poly_square(coeffs: dict) -> dict:
    """q^* q for a Laurent polynomial in one variable, by dense numpy convolution."""
    lo, hi = min(coeffs), max(coeffs)
    a = np.zeros(hi - lo + 1, dtype=object)
    for k, v in coeffs.items():
        a[k - lo] = v
    full = np.convolve(a[::-1], a)
    shift = -(hi - lo)
    return {k + shift: v for k, v in enumerate(full) if v}


def solve_sdpa_file(path):
    """Parse a sparse SDPA file independently and maximize F0.Y subject to Fi.Y = ci."""
    lines = [ln for ln in open(path).read().splitlines() if ln.strip() and ln[0] not in '"*']
    m = int(lines[0].split()[0])
    nb = int(lines[1].split()[0])
    sizes = [int(v) for v in lines[2].replace("=", " ").split()[:nb]]
    c = [float(v) for v in lines[3].split()[:m]]
    F = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for ln in lines[4:]:
        k, b, i, j, v = ln.split()
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        F[k][b][i, j] = v
        F[k][b][j, i] = v
    Y = []
    cons = []
    for s in sizes:
        if s > 0:
            y = cp.Variable((s, s), symmetric=True)
            cons.append(y >> 0)
        else:
            d = cp.Variable(-s, nonneg=True)
            y = cp.diag(d)
        Y.append(y)

    def inner(Fk):
        return sum(cp.sum(cp.multiply(f, y)) for f, y in zip(Fk, Y))

    cons += [inner(F[k]) == c[k - 1] for k in range(1, m + 1)]
    prob = cp.Problem(cp.Maximize(inner(F[0])), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value
