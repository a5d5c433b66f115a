"""SDPA sparse files for external solvers and CSDP-style solution files.

The problem ``max <b, lambda>  s.t.  A lambda = c,  lambda in K`` is written
with ``F_0`` from b and ``F_i`` from row i, so that its SDPA dual
``max <F_0, Y>  s.t.  <F_i, Y> = c_i,  Y PSD`` is our primal.  Off-diagonal
columns enter both symmetric entries, hence the halving.  Adjoined squares
form one diagonal block.  The objective offset is recorded in a comment.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .builder import SdpProblem
from .solver import PrimalDualSolution, evaluate


def _locate(problem: SdpProblem):
    """Column -> (block number, i, j, factor) in SDPA numbering."""
    out = []
    nb = len(problem.blocks)
    for col in problem.columns:
        if col[0] == "scalar":
            out.append((nb + 1, col[1] + 1, col[1] + 1, Fraction(1)))
        else:
            bi, i, j = col
            out.append((bi + 1, i + 1, j + 1, Fraction(1) if i == j else Fraction(1, 2)))
    return out


def _fmt(v: Fraction) -> str:
    return repr(float(v))


def export_sdpa(problem: SdpProblem, path) -> None:
    loc = _locate(problem)
    sizes = list(problem.block_dims)
    if problem.n_scalar:
        sizes.append(-problem.n_scalar)
    lines = [
        f'"kazhdan {problem.engine.family} n={problem.engine.n} mode={problem.mode} offset={problem.offset}"',
        f"{problem.n_rows} = mDIM",
        f"{len(sizes)} = nBLOCK",
        " ".join(str(s) for s in sizes) + " = bLOCKsTRUCT",
        " ".join(_fmt(v) for v in problem.c),
    ]
    for col, v in enumerate(problem.b):
        if v:
            blk, i, j, f = loc[col]
            lines.append(f"0 {blk} {i} {j} {_fmt(v * f)}")
    for r, row in enumerate(problem.A):
        for col, v in sorted(row.items()):
            blk, i, j, f = loc[col]
            lines.append(f"{r + 1} {blk} {i} {j} {_fmt(v * f)}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_solution(problem: SdpProblem, solution: PrimalDualSolution, path) -> None:
    """Write a solution in the CSDP layout: y, then Z (matrix 1) and X (matrix 2)."""
    loc = _locate(problem)
    x = np.asarray(solution.x, dtype=float)
    slack = problem.dual_slack(list(x))
    lines = [" ".join(repr(float(v)) for v in x)]
    for mat, vec in ((1, slack), (2, solution.z)):
        for col, v in enumerate(vec):
            if v:
                blk, i, j, f = loc[col]
                # slack columns are gradients, so off-diagonal entries are halved as in F_i
                val = float(v) * float(f) if mat == 1 else float(v)
                lines.append(f"{mat} {blk} {i} {j} {val!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def import_solution(problem: SdpProblem, path) -> PrimalDualSolution:
    """Read a CSDP-style solution file (y line, then ``matno blk i j value`` entries)."""
    text = Path(path).read_text().split("\n")
    rows = [ln.split() for ln in text if ln.strip()]
    if not rows:
        raise ValueError("empty solution file")
    y = np.array([float(v) for v in rows[0]])
    if y.shape != (problem.n_rows,):
        raise ValueError(f"solution has {len(y)} dual values, problem has {problem.n_rows} rows")
    index = {(blk, i, j): col for col, (blk, i, j, _) in enumerate(_locate(problem))}
    z = np.zeros(problem.n_cols)
    for parts in rows[1:]:
        if len(parts) != 5:
            raise ValueError(f"malformed solution line: {' '.join(parts)}")
        mat, blk, i, j = (int(p) for p in parts[:4])
        if mat != 2:
            continue
        i, j = min(i, j), max(i, j)
        col = index.get((blk, i, j))
        if col is None:
            raise ValueError(f"entry ({blk}, {i}, {j}) is not a variable of the problem")
        z[col] = float(parts[4])
    return evaluate(problem, z, y, status="imported")
