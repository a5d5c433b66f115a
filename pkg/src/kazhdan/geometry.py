"""Spacial arrangements: the geometric side of the Property (T) program.

An arrangement places the points of a support E in a Euclidean space so that
squared distances only depend on the distance class of ``g1^-1 g2``, with
``alpha(1) = 0`` and ``sum_s |alpha(s)|^2 = |S|``.  Dual feasible points of
an epsilon-mode problem are exactly such arrangements (their Gram matrices
are the dual slacks), and an arrangement with ``sum_s alpha(s) = 0`` is
S-flat: it certifies that no spectral gap witness exists on E.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .builder import BuilderError, SdpProblem, assemble, parse_element
from .groups import FreeAbelianEngine, GroupEngine, HeisenbergEngine
from .symmetry import build_class_table


class GeometryError(ValueError):
    """Indefinite Gram data, unsupported engine or a violated precondition."""


@dataclass
class Arrangement:
    """Point-class coordinates of an arrangement of a support."""

    problem: SdpProblem
    distances: dict  # distance class id -> squared distance from alpha(1)
    points: list  # point class ids, identity point first
    coords: np.ndarray  # one row per entry of ``points``
    gram: list  # Gram matrix over points[1:], Fractions when exact
    exact: bool
    normalization: dict = field(default_factory=dict)

    @property
    def engine(self) -> GroupEngine:
        return self.problem.engine

    def alpha(self, g) -> np.ndarray:
        table = self.problem.table
        pid = table.point_of.get(g)
        if pid is None:
            rep = table.symmetry.point_rep(g)
            if rep not in table.point_of:
                raise GeometryError(f"{self.engine.serialize(g)} is not in the support")
            pid = table.point_of[rep]
        return self.coords[self.points.index(pid)]

    def generator_sum(self) -> np.ndarray:
        return sum((self.alpha(s) for s in self.engine.generators), np.zeros(self.coords.shape[1]))

    @property
    def objective(self) -> float:
        """(2/|S|) |sum_s alpha(s)|^2 - 2|S|; equal to -2|S| exactly when S-flat."""
        nS = len(self.engine.generators)
        v = self.generator_sum()
        return 2.0 / nS * float(v @ v) - 2 * nS

    def exact_objective(self) -> Fraction:
        """Same quantity from the Gram matrix, for exact arrangements."""
        if not self.exact:
            raise GeometryError("arrangement is numerical")
        table = self.problem.table
        index = {pid: i for i, pid in enumerate(self.points[1:])}
        counts = [0] * len(index)
        for s in self.engine.generators:
            pid = table.point_of[s]
            if pid in index:
                counts[index[pid]] += 1
        tot = Fraction(0)
        for i, ci in enumerate(counts):
            for j, cj in enumerate(counts):
                if ci and cj:
                    tot += ci * cj * self.gram[i][j]
        nS = len(self.engine.generators)
        return Fraction(2, nS) * tot - 2 * nS

    def check(self, tol: float = 1e-8) -> list[str]:
        """Violated invariants (empty when the arrangement is consistent)."""
        problems = []
        if np.linalg.norm(self.alpha(self.engine.identity)) > tol:
            problems.append("alpha(1) is not the origin")
        total = sum(float(self.alpha(s) @ self.alpha(s)) for s in self.engine.generators)
        if abs(total - len(self.engine.generators)) > tol * max(1.0, total):
            problems.append(f"sum of |alpha(s)|^2 is {total}, not |S|")
        table = self.problem.table
        E = table.support
        e = self.engine
        for g1 in E:
            for g2 in E:
                cid = table.distance_of.get(e._mul(e._inv(g1), g2))
                if cid is None:
                    continue
                d = self.alpha(g1) - self.alpha(g2)
                want = float(self.distances.get(cid, 0))
                if abs(float(d @ d) - want) > tol * max(1.0, want) * 10:
                    problems.append(f"distance class {self.problem.class_label(cid)} is inconsistent")
                    return problems
        return problems

    def to_json(self) -> dict:
        ser = self.engine.serialize
        reps = self.problem.table.point_reps
        return {
            "group": self.engine.params,
            "exact": self.exact,
            "coordinates": {ser(reps[p]): [float(v) for v in row] for p, row in zip(self.points, self.coords)},
            "distances": {self.problem.class_label(c): str(v) if self.exact else float(v)
                          for c, v in sorted(self.distances.items())},
            "objective": self.objective,
            "normalization": {k: str(v) if isinstance(v, Fraction) else v for k, v in self.normalization.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _gram_from_distances(problem: SdpProblem, D: Mapping, exact: bool) -> tuple[list, list]:
    """Gram matrix of the non-identity point classes, from squared class distances."""
    table = problem.table
    e = problem.engine
    ident_pid = table.identity_point
    pts = [p for p in range(len(table.point_reps)) if p != ident_pid]
    reps = [table.point_reps[p] for p in pts]
    ident_cid = table.identity_class
    zero = Fraction(0) if exact else 0.0

    def dist(g):
        cid = table.classify(g)
        if cid == ident_cid:
            return zero
        if cid not in D:
            raise GeometryError(f"no value for distance class {problem.class_label(cid)}")
        return D[cid]

    n = len(pts)
    G = [[zero] * n for _ in range(n)]
    for i in range(n):
        di = dist(reps[i])
        for j in range(i, n):
            v = (di + dist(reps[j]) - dist(e._mul(e._inv(reps[i]), reps[j]))) / 2
            G[i][j] = G[j][i] = v
    return [ident_pid] + pts, G


def _factor(G: list, exact: bool, tol: float) -> np.ndarray:
    n = len(G)
    if n == 0:
        return np.zeros((1, 1))
    if exact:
        try:
            perm, L, d = linalg.ldl_pivoted(G)
        except ValueError:
            raise GeometryError("Gram matrix is not positive semidefinite") from None
        coords = np.zeros((n, n))
        roots = np.sqrt([float(v) for v in d])
        for a, orig in enumerate(perm):
            coords[orig] = [float(v) for v in L[a]] * roots
        return np.vstack([np.zeros((1, n)), coords])
    M = np.array([[float(v) for v in row] for row in G])
    w, q = np.linalg.eigh(M)
    if w[0] < -tol * max(1.0, abs(w[-1])):
        raise GeometryError(f"Gram matrix is indefinite (smallest eigenvalue {w[0]:.3e})")
    coords = q * np.sqrt(np.maximum(w, 0.0))
    return np.vstack([np.zeros((1, n)), coords])


def arrangement_from_dual(problem: SdpProblem, x: Sequence, tol: float = 1e-6) -> Arrangement:
    """Arrangement encoded by a dual point of an epsilon-mode problem."""
    if problem.mode != "epsilon":
        raise GeometryError("dual points of epsilon-mode problems encode arrangements")
    exact = len(x) > 0 and all(isinstance(v, (int, Fraction)) for v in x)
    if exact:
        x = [Fraction(v) for v in x]
    else:
        x = [float(v) for v in x]
    D = problem.dual_to_distances(x)
    _fill_merged(problem, D)
    points, G = _gram_from_distances(problem, D, exact)
    coords = _factor(G, exact, tol)
    arr = Arrangement(problem, D, points, coords, G, exact)
    nS = problem.S_size
    arr.normalization = {
        "alpha_identity": 0.0,
        "generator_norms": float(sum(float(D[problem.table.classify(s)]) for s in problem.engine.generators)),
        "S_size": nS,
    }
    dual = problem.dual_value(x)
    if abs(float(dual) - 2 * nS - arr.objective) > max(tol, 1e-8) * (1 + abs(arr.objective)) * 100:
        raise GeometryError("dual objective does not match the arrangement objective")
    return arr


def _fill_merged(problem: SdpProblem, D: dict) -> None:
    # classes sharing a merged row get the value of the row's leading class
    for r, extra in problem.merged.items():
        lead = problem.rows[r]
        for cid in extra:
            D[cid] = D[lead]


# ---------------------------------------------------------------------------
# S-flat arrangements of Z^n and the Heisenberg group


def _flat_distance(engine: GroupEngine):
    if isinstance(engine, FreeAbelianEngine):
        return lambda g: Fraction(sum(v * v for v in g))
    if isinstance(engine, HeisenbergEngine):
        # e and g go to orthogonal translations of squared length 3/2, f to the identity
        return lambda g: Fraction(3, 2) * (g[0] * g[0] + g[1] * g[1])
    raise GeometryError(f"no flat arrangement for {engine!r}")


@dataclass
class FlatCertificate:
    arrangement: Arrangement
    dual: list  # exact dual point
    dual_value: Fraction  # epsilon upper bound, zero for a flat arrangement
    objective: Fraction  # -2|S|


def flat_arrangement(engine: GroupEngine, E: Sequence | None = None, problem: SdpProblem | None = None,
                     level: str = "point+distance") -> FlatCertificate:
    """Explicit S-flat arrangement with an exactly checked dual feasible point.

    Z^n uses the standard embedding; the Heisenberg group factors through its
    abelianization with ``e`` and ``g`` sent to orthogonal translations.
    """
    dist = _flat_distance(engine)
    if problem is None:
        if E is None:
            raise GeometryError("give a support or an assembled problem")
        problem = assemble(engine, E, level=level)
    if problem.mode != "epsilon":
        raise GeometryError("flat arrangements certify epsilon-mode problems")
    table = problem.table
    D = {cid: dist(rep) for cid, rep in enumerate(table.distance_reps) if cid != table.identity_class}
    x = problem.distances_to_dual(D)
    slack = problem.dual_slack(x)
    mats, scal = problem.vec_to_blocks(slack)
    for m in mats:
        # off-diagonal columns hold twice the matrix entry
        half = [[v if i == j else v / 2 for j, v in enumerate(row)] for i, row in enumerate(m)]
        if not linalg.is_psd_exact(half):
            raise GeometryError("flat arrangement gives an infeasible dual point")
    if any(v < 0 for v in scal):
        raise GeometryError("flat arrangement violates an adjoined square")
    points, G = _gram_from_distances(problem, D, True)
    coords = _factor(G, True, 0.0)
    arr = Arrangement(problem, D, points, coords, G, True,
                      {"alpha_identity": 0, "generator_norms": sum(dist(s) for s in engine.generators),
                       "S_size": len(engine.generators)})
    value = problem.dual_value(x)
    return FlatCertificate(arr, x, value, arr.exact_objective())


# ---------------------------------------------------------------------------
# translations conjugating S into itself


@dataclass
class DisplacementReport:
    element: str
    samples: int
    mean: list
    spread: float  # largest deviation of a displacement from the mean
    flat_defect: float  # |sum_s alpha(s)|
    allowed: float
    finite_order: bool
    ok: bool


def translation_displacement(arrangement: Arrangement, t, tol: float = 1e-6, scale: float = 10.0,
                             max_order: int = 64) -> DisplacementReport:
    """Check that ``alpha(g t) - alpha(g)`` does not depend on g.

    For an S-flat arrangement and t conjugating S into S the displacement is
    constant, and zero when t has finite order.  Numerical arrangements are
    allowed a spread of ``tol + scale * defect``.
    """
    e = arrangement.engine
    if isinstance(t, str):
        t = parse_element(e, t)
    ti = e._inv(t)
    gens = set(e.generators)
    if any(e._mul(e._mul(ti, s), t) not in gens for s in e.generators):
        raise GeometryError("t does not conjugate S into S")
    order = None
    y = t
    for k in range(1, max_order + 1):
        if y == e.identity:
            order = k
            break
        y = e._mul(y, t)
    table = arrangement.problem.table
    disp = []
    for g in table.support:
        gt = e._mul(g, t)
        if gt in table.point_of:
            disp.append(arrangement.alpha(gt) - arrangement.alpha(g))
    if not disp:
        raise GeometryError("no g with g and g t both in the support")
    V = np.array(disp)
    mean = V.mean(axis=0)
    spread = float(np.max(np.linalg.norm(V - mean, axis=1)))
    defect = float(np.linalg.norm(arrangement.generator_sum()))
    allowed = tol + scale * defect
    ok = spread <= allowed
    if order is not None:
        ok = ok and float(np.linalg.norm(mean)) <= allowed
    return DisplacementReport(e.serialize(t), len(disp), [float(v) for v in mean], spread, defect,
                              allowed, order is not None, ok)


# ---------------------------------------------------------------------------
# bound problems


def bound_problem(engine: GroupEngine, E: Sequence, target, fixed: Mapping | None = None,
                  level: str = "point+distance", extra=()) -> SdpProblem:
    """Maximize the squared distance of one class over arrangements of E.

    ``fixed`` pins further classes to given values.  The solved value is
    minus the bound, as for every class-mode problem.
    """
    tgt = parse_element(engine, target) if isinstance(target, str) else target
    table = build_class_table(engine, E, level)
    cid = table.classify(tgt)
    if cid not in set(table.distance_of.values()):
        raise BuilderError(f"class of {engine.serialize(tgt)} does not occur among differences of E")
    return assemble(engine, E, "class", level=level, objective={tgt: 1}, pins=fixed, extra=extra, table=table)
