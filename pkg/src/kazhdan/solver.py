"""First-order solver for  max <b, z>  s.t.  A z = c,  z in K.

ADMM on the splitting ``z`` (affine set) / ``y`` (cone), in isometric
coordinates where off-diagonal entries are scaled by sqrt(2) so that the
Frobenius inner product is the Euclidean one.  The dual vector is recovered
from the scaled multiplier ``u`` as the least-squares solution of
``A^T x = b - rho u``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .builder import SdpProblem

SQRT2 = math.sqrt(2.0)


@dataclass
class SolverOptions:
    max_iter: int = 200_000
    tol_residual: float = 1e-8
    tol_gap: float = 1e-7
    rho: float = 1.0
    adapt_factor: float = 2.0
    adapt_every: int = 50
    adapt_ratio: float = 3.0
    alpha: float = 1.6
    seed: int | None = None
    check_every: int = 50
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.tol_residual <= 0 or self.tol_gap <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.alpha < 2:
            raise ValueError("over-relaxation must lie in (0, 2)")
        if self.max_iter < 1 or self.rho <= 0:
            raise ValueError("max_iter and rho must be positive")


@dataclass
class PrimalDualSolution:
    status: str
    iterations: int
    z: np.ndarray  # primal columns in the problem's convention
    x: np.ndarray  # dual vector, one entry per row
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    cone_violation: float
    gap: float
    history: list = field(default_factory=list)

    def blocks(self, problem: SdpProblem):
        return problem.vec_to_blocks(list(self.z))

    def to_json(self, problem: SdpProblem) -> dict:
        mats, scal = self.blocks(problem)
        return {
            "status": self.status,
            "iterations": self.iterations,
            "blocks": [np.asarray(m).tolist() for m in mats],
            "scalars": [float(v) for v in scal],
            "x": [float(v) for v in self.x],
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "cone_violation": self.cone_violation,
            "gap": self.gap,
        }

    @classmethod
    def from_json(cls, problem: SdpProblem, data: dict) -> "PrimalDualSolution":
        mats = [np.asarray(m, dtype=float) for m in data["blocks"]]
        if [m.shape[0] for m in mats] != problem.block_dims or len(data["scalars"]) != problem.n_scalar:
            raise ValueError("solution block sizes do not match the problem")
        z = np.array(problem.blocks_to_vec(mats, data["scalars"]), dtype=float)
        x = np.asarray(data["x"], dtype=float)
        if x.shape != (problem.n_rows,):
            raise ValueError("dual vector length does not match the problem")
        return evaluate(problem, z, x, status=data.get("status", "imported"),
                        iterations=int(data.get("iterations", 0)))


class _Geometry:
    """Cached isometric scaling and cone projection for one problem."""

    def __init__(self, problem: SdpProblem) -> None:
        self.problem = problem
        self.dims = problem.block_dims
        self.offs = problem.block_offsets()
        n = problem.n_cols
        sc = np.ones(n)
        self.tri = []
        for bi, d in enumerate(self.dims):
            iu = np.triu_indices(d)
            self.tri.append(iu)
            off = iu[0] != iu[1]
            sc[self.offs[bi]:self.offs[bi + 1]][off] = SQRT2
        self.sc = sc

    def to_mats(self, v):
        mats = []
        for bi, d in enumerate(self.dims):
            seg = v[self.offs[bi]:self.offs[bi + 1]]
            iu = self.tri[bi]
            m = np.zeros((d, d))
            m[iu] = seg
            m = m + m.T - np.diag(np.diag(m))
            mats.append(m)
        return mats

    def project(self, v: np.ndarray) -> np.ndarray:
        """Projection onto K in isometric coordinates."""
        out = np.empty_like(v)
        for bi, d in enumerate(self.dims):
            lo, hi = self.offs[bi], self.offs[bi + 1]
            iu = self.tri[bi]
            seg = v[lo:hi] / self.sc[lo:hi]
            m = np.zeros((d, d))
            m[iu] = seg
            m = m + m.T - np.diag(np.diag(m))
            w, q = np.linalg.eigh(m)
            w = np.maximum(w, 0.0)
            p = (q * w) @ q.T
            out[lo:hi] = p[iu] * self.sc[lo:hi]
        tail = self.offs[-1]
        out[tail:] = np.maximum(v[tail:], 0.0)
        return out

    def min_eig(self, col_values: np.ndarray) -> float:
        """Smallest eigenvalue over blocks and scalars of a vector in column convention.

        Off-diagonal columns of a dual slack hold twice the matrix entry.
        """
        worst = math.inf
        for bi, d in enumerate(self.dims):
            lo, hi = self.offs[bi], self.offs[bi + 1]
            iu = self.tri[bi]
            seg = col_values[lo:hi].copy()
            off = iu[0] != iu[1]
            seg[off] /= 2
            m = np.zeros((d, d))
            m[iu] = seg
            m = m + m.T - np.diag(np.diag(m))
            worst = min(worst, float(np.linalg.eigvalsh(m)[0]) if d else math.inf)
        tail = self.offs[-1]
        if len(col_values) > tail:
            worst = min(worst, float(np.min(col_values[tail:])))
        return worst

    def min_eig_primal(self, z: np.ndarray) -> float:
        worst = math.inf
        for m in self.to_mats(z):
            if len(m):
                worst = min(worst, float(np.linalg.eigvalsh(m)[0]))
        tail = self.offs[-1]
        if len(z) > tail:
            worst = min(worst, float(np.min(z[tail:])))
        return worst


def evaluate(problem: SdpProblem, z: np.ndarray, x: np.ndarray, status: str = "given",
             iterations: int = 0, history=None) -> PrimalDualSolution:
    """Recompute objectives and residuals from a primal/dual pair."""
    A = problem.A_sparse()
    c = problem.c_vec()
    b = problem.b_vec()
    geo = _Geometry(problem)
    pres = float(np.linalg.norm(A @ z - c)) / (1.0 + float(np.linalg.norm(c)))
    cone_p = max(0.0, -geo.min_eig_primal(z))
    slack = A.T @ x - b
    cone_d = max(0.0, -geo.min_eig(slack))
    pobj = problem.value(z)
    dobj = problem.dual_value(x)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return PrimalDualSolution(
        status=status,
        iterations=iterations,
        z=z,
        x=x,
        primal_objective=float(pobj),
        dual_objective=float(dobj),
        primal_residual=max(pres, cone_p),
        dual_residual=cone_d / (1.0 + float(np.linalg.norm(b))),
        cone_violation=max(cone_p, cone_d),
        gap=gap,
        history=list(history or []),
    )


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> PrimalDualSolution:
    opt = options or SolverOptions()
    geo = _Geometry(problem)
    n = problem.n_cols
    A = problem.A_sparse().toarray()
    c = problem.c_vec()
    b = problem.b_vec()

    # isometric coordinates and row equilibration
    Ai = A / geo.sc
    bi = b / geo.sc
    rs = np.linalg.norm(Ai, axis=1)
    rs[rs == 0] = 1.0
    Ae = Ai / rs[:, None]
    ce = c / rs
    K = Ae @ Ae.T
    w, q = np.linalg.eigh(K)
    keep = w > w.max() * 1e-12 if len(w) else np.zeros(0, bool)
    Kp = (q[:, keep] / w[keep]) @ q[:, keep].T
    P = Ae.T @ Kp  # n x m

    def affine(v):
        return v - P @ (Ae @ v - ce)

    if opt.seed is not None:
        rng = np.random.default_rng(opt.seed)
        y = geo.project(rng.standard_normal(n) * 1e-3)
    else:
        y = np.zeros(n)
    u = np.zeros(n)
    rho = opt.rho
    history = []
    status = "max-iter"
    z = y.copy()
    x = np.zeros(problem.n_rows)
    it = 0
    for it in range(1, opt.max_iter + 1):
        z = affine(y - u + bi / rho)
        y_old = y
        zr = opt.alpha * z + (1 - opt.alpha) * y_old
        y = geo.project(zr + u)
        u = u + zr - y

        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(y)) or np.abs(y).max() > 1e14:
            status = "diverging"
            break

        if it % opt.check_every == 0 or it == opt.max_iter:
            S = -rho * u
            xe = Kp @ (Ae @ (bi + S))
            x = xe / rs
            lam = y / geo.sc
            pres = np.linalg.norm(Ae @ y - ce) / (1 + np.linalg.norm(ce))
            dres = np.linalg.norm(Ae.T @ xe - bi - S) / (1 + np.linalg.norm(bi))
            pobj = float(b @ lam)
            dobj = float(c @ x)
            gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
            history.append((it, float(pres), float(dres), float(gap), rho))
            if opt.verbose:
                print(f"{it:7d} pres {pres:.2e} dres {dres:.2e} gap {gap:.2e} rho {rho:.2e}")
            if pres < opt.tol_residual and dres < opt.tol_residual and gap < opt.tol_gap:
                status = "optimal"
                break
            # residual balancing: a large dual residual asks for a smaller penalty
            if it % opt.adapt_every == 0:
                if pres > opt.adapt_ratio * dres:
                    rho *= opt.adapt_factor
                    u /= opt.adapt_factor
                elif dres > opt.adapt_ratio * pres:
                    rho /= opt.adapt_factor
                    u *= opt.adapt_factor

    lam = y / geo.sc
    if status == "diverging":
        lam = np.nan_to_num(lam)
        x = np.nan_to_num(x)
    sol = evaluate(problem, lam, x, status=status, iterations=it, history=history)
    return sol


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class GapReport:
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    cone_violation: float
    weak_duality_ok: bool
    flagged: bool
    message: str

    def to_json(self) -> dict:
        return asdict(self)


def gap_report(problem: SdpProblem, solution: PrimalDualSolution, tol: float = 1e-6) -> GapReport:
    """Weak duality check: primal value <= dual value up to residual slack."""
    s = evaluate(problem, np.asarray(solution.z, float), np.asarray(solution.x, float))
    slack = tol + 10 * (s.primal_residual + s.dual_residual) * (1 + abs(s.primal_objective) + abs(s.dual_objective))
    weak = s.primal_objective <= s.dual_objective + slack
    flagged = (not weak) or s.gap > tol or s.primal_residual > tol or s.dual_residual > tol
    parts = []
    if not weak:
        parts.append("primal objective exceeds dual objective beyond residual slack")
    if s.gap > tol:
        parts.append(f"relative gap {s.gap:.2e} above {tol:.0e}")
    if s.primal_residual > tol:
        parts.append(f"primal residual {s.primal_residual:.2e}")
    if s.dual_residual > tol:
        parts.append(f"dual residual {s.dual_residual:.2e}")
    return GapReport(
        primal_objective=s.primal_objective,
        dual_objective=s.dual_objective,
        gap=s.gap,
        primal_residual=s.primal_residual,
        dual_residual=s.dual_residual,
        cone_violation=s.cone_violation,
        weak_duality_ok=weak,
        flagged=flagged,
        message="; ".join(parts) if parts else "ok",
    )


def dumps_solution(problem: SdpProblem, solution: PrimalDualSolution) -> str:
    return json.dumps(solution.to_json(problem), indent=1)


# ---------------------------------------------------------------------------
# strictly feasible points


class ConstructionFailed(RuntimeError):
    """A strictly feasible point failed its exact check; this points at a builder bug."""


@dataclass
class StrictWitnesses:
    primal: list  # exact column vector, positive definite blocks
    dual: list  # exact row vector
    primal_value: Fraction
    min_pivot: Fraction


def _right_paths(problem: SdpProblem) -> dict:
    """Shortest right-multiplication path inside E from 1 to some member of each point class."""
    table = problem.table
    e = problem.engine
    E = set(table.support)
    prev = {e.identity: None}
    layer = [e.identity]
    found = {table.identity_point: e.identity}
    while layer:
        nxt = []
        for x in layer:
            for idx, s in enumerate(e.generators):
                y = e._mul(x, s)
                if y in E and y not in prev:
                    prev[y] = (x, idx)
                    found.setdefault(table.point_of[y], y)
                    nxt.append(y)
        layer = nxt
    paths = {}
    for pid, g in found.items():
        nodes, steps = [g], []
        while prev[nodes[-1]] is not None:
            x, idx = prev[nodes[-1]]
            steps.append(idx)
            nodes.append(x)
        paths[pid] = (nodes[::-1], steps[::-1])
    return paths


def strict_feasibility_witnesses(problem: SdpProblem) -> StrictWitnesses:
    """Exact strictly feasible primal and dual points of an epsilon-mode problem.

    Dual: every non-identity class at squared distance one; then the dual
    slack is ``(I + J) / |S|`` on each block.  Primal: the Gram matrix of
    ``Delta`` plus, for every point class ``p`` reached by a path
    ``1 = x_0, ..., x_m = gamma`` in E, the squares

        (gamma - 1)^2 + sum_{i<j} (v_i - v_j)^2 + m sum_i sum_{s' != s_i} (s' - 1)^2,

    with ``v_i = x_i - x_{i-1}``, which add up to ``2 m^2 Delta``.  The
    rank-one terms ``(gamma - 1)^2`` make every block positive definite.
    """
    if problem.mode != "epsilon":
        raise ValueError("strictly feasible points are built for epsilon mode")
    if problem.extra or problem.free:
        raise ValueError("strictly feasible points are built without adjoined or assumed-zero squares")
    if len(problem.blocks) != 1 or problem.blocks[0].base != problem.engine.identity:
        raise ValueError("strictly feasible points need the single block based at the identity")
    table = problem.table
    e = problem.engine
    nS = problem.S_size
    one = Fraction(1)

    # dual point
    classes = problem.notes["classes"]
    x = problem.distances_to_dual({cid: one for cid in classes})
    slack = problem.dual_slack(x)
    want = Fraction(2, nS)
    for col, (key, val) in enumerate(zip(problem.columns, slack)):
        if key[0] == "scalar":
            if val < 0:
                raise ConstructionFailed("dual slack negative on an adjoined square")
        elif val != want:
            raise ConstructionFailed(f"dual slack at column {col} is {val}, expected {want}")

    # primal point
    blk = problem.blocks[0]
    index = {pid: i for i, pid in enumerate(blk.points)}
    d = blk.dim
    lam = [[Fraction(0)] * d for _ in range(d)]

    def vec(g):
        v = [Fraction(0)] * d
        pid = table.point_of[g]
        if pid in index:
            v[index[pid]] = one
        return v

    def add(u, w=one):
        for i, ui in enumerate(u):
            if ui:
                for j, uj in enumerate(u):
                    if uj:
                        lam[i][j] += w * ui * uj

    gens = e.generators
    add([sum(col) for col in zip(*(vec(s) for s in gens))])
    paths = _right_paths(problem)
    M = Fraction(0)
    for pid in blk.points:
        if pid not in paths:
            raise ConstructionFailed(f"point {e.serialize(table.point_reps[pid])} is not reachable inside E")
        nodes, steps = paths[pid]
        m = len(steps)
        add(vec(nodes[-1]))
        steps_v = [[a - b for a, b in zip(vec(nodes[i + 1]), vec(nodes[i]))] for i in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                add([a - b for a, b in zip(steps_v[i], steps_v[j])])
        for idx in steps:
            for k, s in enumerate(gens):
                if k != idx:
                    add(vec(s), Fraction(m))
        M += 2 * m * m

    z = problem.blocks_to_vec([lam])
    for r, row in enumerate(problem.A):
        if sum((a * z[col] for col, a in row.items()), Fraction(0)) != problem.c[r]:
            raise ConstructionFailed(f"primal point violates row {r}")
    value = problem.value(z)
    if value != -M:
        raise ConstructionFailed(f"primal value {value} differs from {-M}")
    try:
        _, _, piv = linalg.ldl_pivoted(lam)
    except ValueError as exc:
        raise ConstructionFailed(str(exc)) from None
    if d and min(piv) <= 0:
        raise ConstructionFailed("primal point is singular")
    return StrictWitnesses(z, x, value, min(piv) if d else Fraction(0))
