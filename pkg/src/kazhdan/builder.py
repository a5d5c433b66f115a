"""Assembly of the restricted, symmetry-reduced SDP.

Variables are PSD blocks indexed by point classes (basis ``gamma - base``
per block) plus nonnegative scalars for adjoined squares.  For a column the
element ``(g_p - base)^* (g_q - base)`` is expanded and its coefficients are
summed per distance class; off-diagonal columns carry a factor 2 because the
entries ``(p, q)`` and ``(q, p)`` share one variable.

Both objective modes are instances of one scheme.  With class values ``D``
(squared distances of a spacial arrangement) the geometric problem is

    maximize <w, D>   subject to   -1/2 sum_d D_d A_d  PSD,
                                   sum_d k_d D_d = |S|,   D_p = v_p (pins),
                                   <F_j, D> = 0 (assumed-zero squares)

and its primal is: find ``lambda`` PSD with ``Phi(lambda) = 2w - 2 Z theta``
classwise, minimizing ``<l, theta>`` where the columns of Z are k, the pin
indicators and the F_j.  The free multipliers theta are eliminated by
solving for them on pivot rows, which leaves the standard form

    maximize <b, lambda> + offset   subject to   A lambda = c,  lambda in K.

In epsilon mode ``w = Delta^2 / 2`` and the value is rescaled by ``2/|S|``
so that it equals the spectral gap epsilon in ``Delta^2 - eps Delta = Phi``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import linalg
from .algebra import AlgebraElement, as_fraction, convolve, laplacian
from .groups import GroupEngine, GroupError, cayley_ball
from .symmetry import ClassTable, Symmetry, build_class_table, normalize_level


class BuilderError(ValueError):
    """Invalid support, missing classes or inconsistent objective data."""


# ---------------------------------------------------------------------------
# supports


def parse_element(engine: GroupEngine, text: str):
    """A word of generator labels (``"e fbar*"``), ``"1"`` for the identity."""
    text = text.strip()
    if text in ("1", ""):
        return engine.identity
    try:
        return engine.word(text)
    except GroupError as exc:
        raise BuilderError(str(exc)) from None


def build_support(
    engine: GroupEngine,
    *,
    radius: int | None = None,
    elements: Sequence | None = None,
    complete: bool = False,
    symmetry: Symmetry | None = None,
    cap: int = 5_000_000,
) -> list:
    """Support from a ball radius or an explicit list (words or elements)."""
    if (radius is None) == (elements is None):
        raise BuilderError("give exactly one of radius or elements")
    if radius is not None:
        E = cayley_ball(engine, radius, cap).elements
    else:
        E = [parse_element(engine, x) if isinstance(x, str) else x for x in elements]
        if engine.identity not in E:
            E = [engine.identity] + E
    if complete:
        sym = symmetry or Symmetry(engine, "point+distance")
        grown = set(E)
        for g in E:
            for t in sym.auts:
                grown.add(t(g))
        E = E + sorted(grown - set(E), key=engine.key)
    E = list(dict.fromkeys(E))
    if len(E) > cap:
        raise BuilderError("support exceeds its cap")
    return E


# ---------------------------------------------------------------------------
# problem data


@dataclass
class Block:
    base: object
    points: list  # point class ids, basepoint class excluded
    reps: list  # representative element of each point class

    @property
    def dim(self) -> int:
        return len(self.points)


def aggregate(table: ClassTable, x: AlgebraElement) -> dict:
    """Class totals of an algebra element (class id -> Fraction)."""
    out: dict = {}
    for g, c in x.coeffs.items():
        cid = table.classify(g)
        out[cid] = out.get(cid, 0) + c
    return {k: v for k, v in out.items() if v}


def pair_vector(table: ClassTable, gp, gq, base) -> dict:
    """Class totals of (gp - base)^* (gq - base)."""
    e = table.engine
    inv, mul = e._inv, e._mul
    gpi = inv(gp)
    bi = inv(base)
    out: dict = {}
    for g, c in (
        (mul(gpi, gq), 1),
        (mul(gpi, base), -1),
        (mul(bi, gq), -1),
        (e.identity, 1),
    ):
        cid = table.classify(g)
        out[cid] = out.get(cid, 0) + c
    return {k: Fraction(v) for k, v in out.items() if v}


@dataclass
class SdpProblem:
    """Sparse equality-constrained conic program with class provenance.

    Columns: for each block the upper triangle ``(i, j), i <= j`` in row-major
    order, then one nonnegative scalar per adjoined square.  Off-diagonal
    columns hold twice the class vector (doubling convention).
    """

    engine: GroupEngine
    level: str
    mode: str
    table: ClassTable
    blocks: list
    extra: list  # adjoined squares q (nonnegative multiples of q^* q)
    free: list  # assumed-zero squares (sign-free multiples)
    columns: list  # (block, i, j) or ("scalar", k)
    full_columns: list  # class vector per column, identity class dropped
    rows: list  # retained class id per row
    merged: dict  # row index -> further class ids sharing the row
    A: list  # exact rows: dict column -> Fraction
    c: list
    b: list  # per column, Fraction
    offset: Fraction
    pivots: list  # class ids solved for
    proj: dict  # non-pivot class -> {pivot class: coefficient}
    beta: dict  # pivot class -> Fraction
    kappa: Fraction
    weights: dict  # class id -> w_d
    pins: dict  # class id -> pinned value
    gen_counts: dict  # generator class -> k_d
    target: Fraction | None = None
    notes: dict = field(default_factory=dict)

    # -- shapes -------------------------------------------------------------
    @property
    def block_dims(self) -> list[int]:
        return [b.dim for b in self.blocks]

    @property
    def n_scalar(self) -> int:
        return len(self.extra)

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def S_size(self) -> int:
        return len(self.engine.generators)

    def block_offsets(self) -> list[int]:
        out, pos = [], 0
        for d in self.block_dims:
            out.append(pos)
            pos += d * (d + 1) // 2
        out.append(pos)
        return out

    # -- float views ----------------------------------------------------------
    def A_sparse(self) -> sp.csr_matrix:
        data, ri, ci = [], [], []
        for r, row in enumerate(self.A):
            for col, v in row.items():
                ri.append(r)
                ci.append(col)
                data.append(float(v))
        return sp.csr_matrix((data, (ri, ci)), shape=(self.n_rows, self.n_cols))

    def c_vec(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])

    def b_vec(self) -> np.ndarray:
        return np.array([float(v) for v in self.b])

    # -- matrices <-> column vectors --------------------------------------------
    def vec_to_blocks(self, z: Sequence) -> tuple[list, list]:
        """Column values -> (symmetric block matrices, scalars); works for floats and Fractions."""
        offs = self.block_offsets()
        mats = []
        exact = len(z) > 0 and isinstance(z[0], Fraction)
        for bi, d in enumerate(self.block_dims):
            m = [[Fraction(0) if exact else 0.0] * d for _ in range(d)]
            pos = offs[bi]
            for i in range(d):
                for j in range(i, d):
                    m[i][j] = m[j][i] = z[pos]
                    pos += 1
            mats.append(m if exact else np.array(m, dtype=float).reshape(d, d))
        return mats, list(z[offs[-1]:])

    def blocks_to_vec(self, mats: Sequence, scalars: Sequence = ()) -> list:
        out = []
        for m in mats:
            d = len(m)
            for i in range(d):
                for j in range(i, d):
                    out.append(m[i][j])
        out.extend(scalars)
        if len(out) != self.n_cols:
            raise BuilderError("block sizes do not match the problem")
        return out

    def value(self, z: Sequence) -> float:
        """Objective <b, lambda> + offset: epsilon, or minus the bound in class mode."""
        if isinstance(z[0], Fraction):
            return sum((bi * zi for bi, zi in zip(self.b, z)), Fraction(0)) + self.offset
        return float(np.dot(self.b_vec(), np.asarray(z, dtype=float)) + float(self.offset))

    def bound_from_value(self, val):
        """Class mode: upper bound on the weighted class combination."""
        return -val

    # -- class vectors ------------------------------------------------------------
    def phi(self, z: Sequence[Fraction]) -> dict:
        """Exact class vector of Phi(lambda) (identity class dropped)."""
        out: dict = {}
        for col, v in enumerate(z):
            if not v:
                continue
            for cid, a in self.full_columns[col].items():
                out[cid] = out.get(cid, 0) + a * v
        return {k: v for k, v in out.items() if v}

    def class_label(self, cid: int) -> str:
        return self.engine.serialize(self.table.distance_reps[cid])

    # -- dual bookkeeping ---------------------------------------------------------
    def dual_to_distances(self, x: Sequence) -> dict:
        """Class values D from a dual vector x:  D = Z^+T l - kappa P^T x."""
        exact = len(x) > 0 and isinstance(x[0], Fraction)
        zero = Fraction(0) if exact else 0.0
        D: dict = {}
        for piv, bv in self.beta.items():
            D[piv] = bv if exact else float(bv)
        kappa = self.kappa if exact else float(self.kappa)
        for r, cid in enumerate(self.rows):
            xr = x[r]
            D[cid] = D.get(cid, zero) - kappa * xr
            for piv, coef in self.proj.get(cid, {}).items():
                cf = coef if exact else float(coef)
                D[piv] = D.get(piv, zero) + kappa * cf * xr
        for r, extra in self.merged.items():
            for cid in extra:
                # merged rows carry their whole multiplier on the first class;
                # the remaining classes see only the pivot part
                D.setdefault(cid, zero)
        return D

    def distances_to_dual(self, D: Mapping) -> list:
        """Inverse of :meth:`dual_to_distances` on retained rows (pivots carry no row)."""
        if all(isinstance(v, (int, Fraction)) for v in D.values()):
            return [-as_fraction(D.get(cid, 0)) / self.kappa for cid in self.rows]
        return [-float(D.get(cid, 0)) / float(self.kappa) for cid in self.rows]

    def gram_blocks(self, D: Mapping) -> list:
        """Gram matrices -1/2 sum_d D_d A_d of an assignment of class values."""
        exact = all(isinstance(v, (int, Fraction)) for v in D.values())
        mats = []
        offs = self.block_offsets()
        for bi, d in enumerate(self.block_dims):
            m = [[Fraction(0) if exact else 0.0] * d for _ in range(d)]
            pos = offs[bi]
            for i in range(d):
                for j in range(i, d):
                    vec = self.full_columns[pos]
                    tot = sum((a * (D.get(cid, 0)) for cid, a in vec.items()), Fraction(0) if exact else 0.0)
                    val = -tot / 2 if i == j else -tot / 4
                    m[i][j] = m[j][i] = val
                    pos += 1
            mats.append(m if exact else np.array(m, dtype=float).reshape(d, d))
        return mats

    def dual_slack(self, x: Sequence) -> list:
        """A^T x - b per column."""
        exact = len(x) > 0 and isinstance(x[0], Fraction)
        zero = Fraction(0) if exact else 0.0
        out = [zero - (bi if exact else float(bi)) for bi in self.b]
        for r, row in enumerate(self.A):
            xr = x[r]
            for col, a in row.items():
                out[col] += (a if exact else float(a)) * xr
        return out

    def dual_value(self, x: Sequence):
        exact = len(x) > 0 and isinstance(x[0], Fraction)
        if exact:
            return sum((ci * xi for ci, xi in zip(self.c, x)), Fraction(0)) + self.offset
        return float(np.dot(self.c_vec(), np.asarray(x, dtype=float)) + float(self.offset))

    # -- export -----------------------------------------------------------------
    def to_json(self) -> dict:
        ser = self.engine.serialize
        tri = []
        for r, row in enumerate(self.A):
            for col, v in sorted(row.items()):
                tri.append([r, col, str(v)])
        return {
            "group": self.engine.params,
            "level": self.level,
            "mode": self.mode,
            "cone": {"psd_blocks": self.block_dims, "nonneg": self.n_scalar},
            "off_diagonal_convention": "column value = 2 x class vector for p != q",
            "A": tri,
            "c": [str(v) for v in self.c],
            "b": [str(v) for v in self.b],
            "offset": str(self.offset),
            "rows": [ser(self.table.distance_reps[cid]) for cid in self.rows],
            "merged_rows": {str(r): [ser(self.table.distance_reps[c]) for c in cs]
                            for r, cs in self.merged.items()},
            "columns": [
                ["scalar", col[1]] if col[0] == "scalar"
                else [col[0], ser(self.blocks[col[0]].reps[col[1]]), ser(self.blocks[col[0]].reps[col[2]])]
                for col in self.columns
            ],
            "blocks": [{"base": ser(b.base), "points": [ser(r) for r in b.reps]} for b in self.blocks],
            "extra_squares": [q.to_json() for q in self.extra],
            "weights": {ser(self.table.distance_reps[k]): str(v) for k, v in self.weights.items()},
            "pins": {ser(self.table.distance_reps[k]): str(v) for k, v in self.pins.items()},
            "target": None if self.target is None else str(self.target),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# assembly


def _point_blocks(table: ClassTable, blocks) -> list[Block]:
    engine = table.engine
    if blocks is None:
        blocks = [(table.support, engine.identity)]
    out = []
    for pts, base in blocks:
        if base not in table.point_of:
            raise BuilderError("block basepoint not in support")
        bpid = table.point_of[base]
        pids = []
        for g in pts:
            if g not in table.point_of:
                raise BuilderError("block point not in support")
            pid = table.point_of[g]
            if pid != bpid and pid not in pids:
                pids.append(pid)
        pids.sort()
        reps = [table.point_reps[p] for p in pids]
        out.append(Block(base, pids, reps))
    return out


def assemble(
    engine: GroupEngine,
    E: Sequence,
    mode: str = "epsilon",
    *,
    level: str = "point+distance",
    objective: Mapping | None = None,
    pins: Mapping | None = None,
    target=None,
    extra: Iterable[AlgebraElement] = (),
    free: Iterable[AlgebraElement] = (),
    blocks=None,
    table: ClassTable | None = None,
    free_vectors: Sequence[Mapping] = (),
) -> SdpProblem:
    """Build the standard-form problem.

    ``mode`` is ``"epsilon"`` or ``"class"``.  In class mode ``objective``
    maps group elements (or words) to weights of their distance classes and
    ``pins`` fixes squared distances of classes; ``target`` is the value the
    weighted combination should be certified to stay below.
    """
    level = normalize_level(level)
    if mode not in ("epsilon", "class"):
        raise BuilderError(f"unknown objective mode {mode!r}")
    if table is None:
        table = build_class_table(engine, E, level)
    ident = table.identity_class
    S = engine.generators
    nS = len(S)

    if mode == "epsilon":
        missing = [engine.labels[i] for i, s in enumerate(S) if s not in table.point_of]
        if missing:
            raise BuilderError("epsilon mode needs S and 1 in the support; missing " + ", ".join(missing))
        if objective or pins:
            raise BuilderError("objective weights and pins belong to class mode")

    # normalization vector k (generator counts per class)
    gen_counts: dict = {}
    for s in S:
        cid = table.classify(s)
        gen_counts[cid] = gen_counts.get(cid, 0) + 1
    g0 = table.classify(S[0])

    blocks_ = _point_blocks(table, blocks)
    if not any(b.dim for b in blocks_):
        raise BuilderError("empty point set: every block reduces to its basepoint")

    columns, full = [], []
    for bi, blk in enumerate(blocks_):
        for i in range(blk.dim):
            for j in range(i, blk.dim):
                vec = pair_vector(table, blk.reps[i], blk.reps[j], blk.base)
                if i != j:
                    vec = {k: 2 * v for k, v in vec.items()}
                vec.pop(ident, None)
                columns.append((bi, i, j))
                full.append(vec)
    extra = list(extra)
    for k, q in enumerate(extra):
        if q.augmentation() != 0:
            raise BuilderError("adjoined squares must have augmentation zero")
        vec = aggregate(table, q.square())
        vec.pop(ident, None)
        columns.append(("scalar", k))
        full.append(vec)

    # right-hand side data w
    weights: dict = {}
    if mode == "epsilon":
        lap = laplacian(engine)
        for cid, v in aggregate(table, convolve(lap, lap)).items():
            if cid != ident:
                weights[cid] = v / 2
    else:
        if not objective:
            raise BuilderError("class mode needs objective weights")
        for g, wv in objective.items():
            g = parse_element(engine, g) if isinstance(g, str) else g
            cid = table.classify(g)
            if cid == ident:
                raise BuilderError("objective on the identity class")
            weights[cid] = weights.get(cid, 0) + as_fraction(wv)
        weights = {k: v for k, v in weights.items() if v}

    pin_map: dict = {}
    for g, v in (pins or {}).items():
        g = parse_element(engine, g) if isinstance(g, str) else g
        cid = table.classify(g)
        if cid == ident or cid in gen_counts:
            raise BuilderError("cannot pin the identity or a generator class")
        pin_map[cid] = as_fraction(v)

    free = list(free)
    free_vecs = []
    for q in free:
        if q.augmentation() != 0:
            raise BuilderError("assumed-zero squares must have augmentation zero")
        vec = aggregate(table, q.square())
        vec.pop(ident, None)
        free_vecs.append(vec)
    for vec in free_vectors:
        vec = {k: as_fraction(v) for k, v in vec.items() if k != ident and v}
        if vec:
            free_vecs.append(vec)

    # all classes appearing anywhere, identity excluded
    classes = set(gen_counts) | set(weights) | set(pin_map)
    for vec in full + free_vecs:
        classes |= set(vec)
    classes.discard(ident)
    key = engine.key
    classes = sorted(classes, key=lambda c: key(table.distance_reps[c]))
    pos = {c: i for i, c in enumerate(classes)}

    # Z columns and their l entries
    zcols = [gen_counts] + [{c: 1} for c in pin_map] + free_vecs
    ell = [Fraction(nS)] + [pin_map[c] for c in pin_map] + [Fraction(0)] * len(free_vecs)
    zrows = [[Fraction(zc.get(c, 0)) for zc in zcols] for c in classes]
    order = [pos[g0]] + [pos[c] for c in pin_map] + [i for i in range(len(classes))]
    order = list(dict.fromkeys(order))
    chosen = linalg.independent_rows(zrows, order)
    if len(chosen) < len(zcols):
        # drop dependent assumed-zero squares; k and pins must stay independent
        zt = linalg.transpose(zrows)
        keep = linalg.independent_rows(zt, list(range(len(zcols))))
        if any(i not in keep for i in range(1 + len(pin_map))):
            raise BuilderError("pins are inconsistent with the normalization")
        zcols = [zcols[i] for i in keep]
        ell = [ell[i] for i in keep]
        zrows = [[Fraction(zc.get(c, 0)) for zc in zcols] for c in classes]
        chosen = linalg.independent_rows(zrows, order)
    piv_classes = [classes[i] for i in chosen]
    zp_inv = linalg.inverse([zrows[i] for i in chosen])
    m = len(zcols)
    # beta = Zp^-T l
    beta_vec = [sum((zp_inv[j][i] * ell[j] for j in range(m)), Fraction(0)) for i in range(m)]
    beta = {piv_classes[i]: beta_vec[i] for i in range(m)}

    # column-major view of full vectors per class
    by_class: dict = {c: {} for c in classes}
    for col, vec in enumerate(full):
        for cid, a in vec.items():
            by_class[cid][col] = a

    scale = Fraction(2, nS) if mode == "epsilon" else Fraction(1)
    kappa = Fraction(nS) if mode == "epsilon" else Fraction(2)

    b = [Fraction(0)] * len(columns)
    for pc in piv_classes:
        bv = beta[pc]
        if bv:
            for col, a in by_class[pc].items():
                b[col] += scale * bv * a / 2
    offset = -scale * sum((beta[pc] * weights.get(pc, 0) for pc in piv_classes), Fraction(0))

    proj: dict = {}
    rows, A, c = [], [], []
    seen: dict = {}
    merged: dict = {}
    piv_set = set(piv_classes)
    for cid in classes:
        if cid in piv_set:
            continue
        zr = zrows[pos[cid]]
        coef = [sum((zr[j] * zp_inv[j][i] for j in range(m)), Fraction(0)) for i in range(m)]
        pc_coef = {piv_classes[i]: coef[i] for i in range(m) if coef[i]}
        row = dict(by_class[cid])
        for pc, cf in pc_coef.items():
            for col, a in by_class[pc].items():
                v = row.get(col, 0) - cf * a
                if v:
                    row[col] = v
                else:
                    row.pop(col, None)
        rhs = 2 * (weights.get(cid, 0) - sum((cf * weights.get(pc, 0) for pc, cf in pc_coef.items()), Fraction(0)))
        if not row:
            if rhs:
                raise BuilderError(
                    f"class {engine.serialize(table.distance_reps[cid])} carries objective weight "
                    "but no column reaches it; the bound would be infinite"
                )
            continue
        sig = (tuple(sorted(row.items())), rhs)
        if sig in seen:
            merged.setdefault(seen[sig], []).append(cid)
            continue
        seen[sig] = len(rows)
        proj[cid] = pc_coef
        rows.append(cid)
        A.append(row)
        c.append(rhs)

    prob = SdpProblem(
        engine=engine,
        level=level,
        mode=mode,
        table=table,
        blocks=blocks_,
        extra=extra,
        free=free,
        columns=columns,
        full_columns=full,
        rows=rows,
        merged=merged,
        A=A,
        c=c,
        b=b,
        offset=offset,
        pivots=piv_classes,
        proj=proj,
        beta=beta,
        kappa=kappa,
        weights=weights,
        pins=pin_map,
        gen_counts=gen_counts,
        target=None if target is None else as_fraction(target),
    )
    prob.notes["classes"] = classes
    return prob


# ---------------------------------------------------------------------------
# class-level objectives


def flat_objective(engine: GroupEngine, table: ClassTable, s0=None) -> tuple[dict, int]:
    """Multiplicities of the classes [s0 s'] over s' in S, and the constant 2|S|.

    S-flatness of an arrangement in which all generators share one distance
    class reads  sum_{s'} |alpha(s0 s')|^2 = 2|S|.
    """
    s0 = engine.generators[0] if s0 is None else s0
    mult: dict = {}
    for s in engine.generators:
        cid = table.classify(engine._mul(s0, s))
        mult[cid] = mult.get(cid, 0) + 1
    return mult, 2 * len(engine.generators)


# ---------------------------------------------------------------------------
# interior elimination


def eliminate_interior(engine: GroupEngine, E: Sequence, radius: int, *, level: str = "point+distance",
                       objective=None, pins=None, target=None, extra=()) -> SdpProblem:
    """Class-mode problem on ball(radius) with interior points replaced by S-averages.

    Experimental.  Assumes the arrangement is S-flat: every point of the open
    ball is the average of its neighbours.  Interior positions are solved as
    a discrete Dirichlet problem with boundary the identity and the outer
    sphere; the Gram entries involving interior points become assumed-zero
    relations on the boundary block.  Equivalent to the uneliminated problem
    with the harmonic defects and Delta adjoined as assumed-zero squares.
    """
    E = list(E)
    ball_ = cayley_ball(engine, radius)
    if set(E) != set(ball_.elements):
        raise BuilderError("interior elimination needs a full ball as support")
    table = build_class_table(engine, E, level)
    sym = table.symmetry
    ident_pid = table.identity_point
    nS = len(engine.generators)
    interior_pids = set()
    witness = {}
    for g in E:
        pid = table.point_of[g]
        if pid != ident_pid and ball_.length[g] < radius:
            interior_pids.add(pid)
            witness.setdefault(pid, g)
    boundary_pids = sorted(set(range(len(table.point_reps))) - interior_pids - {ident_pid})
    interior = sorted(interior_pids)
    ipos = {p: i for i, p in enumerate(interior)}
    bpos = {p: i for i, p in enumerate(boundary_pids)}

    # alpha(p) - 1/|S| sum_s alpha(p s) = 0 for interior p
    ni, nb = len(interior), len(boundary_pids)
    M = [[Fraction(0)] * ni for _ in range(ni)]
    R = [[Fraction(0)] * nb for _ in range(ni)]
    for p in interior:
        i = ipos[p]
        M[i][i] += 1
        g = witness[p]
        for s in engine.generators:
            q = table.point_of.get(engine._mul(g, s))
            if q is None:
                q_rep = sym.point_rep(engine._mul(g, s))
                q = next(k for k, r in enumerate(table.point_reps) if r == q_rep)
            if q == ident_pid:
                continue
            if q in ipos:
                M[i][ipos[q]] -= Fraction(1, nS)
            else:
                R[i][bpos[q]] += Fraction(1, nS)
    Minv = linalg.inverse(M) if ni else []
    T = [[sum((Minv[i][k] * R[k][j] for k in range(ni)), Fraction(0)) for j in range(nb)] for i in range(ni)]

    # relations: Gram entries with an interior index must match the extension
    def expand(p):
        if p in bpos:
            return {bpos[p]: Fraction(1)}
        return {j: v for j, v in enumerate(T[ipos[p]]) if v}

    ident = engine.identity
    reps = table.point_reps
    relations = []
    all_pids = interior + boundary_pids
    for a_i, pa in enumerate(all_pids):
        for pb in all_pids[a_i:]:
            if pa in bpos and pb in bpos:
                continue
            vec = pair_vector(table, reps[pa], reps[pb], ident)
            ea, eb = expand(pa), expand(pb)
            for ja, ta in ea.items():
                for jb, tb in eb.items():
                    sub = pair_vector(table, reps[boundary_pids[ja]], reps[boundary_pids[jb]], ident)
                    for cid, v in sub.items():
                        vec[cid] = vec.get(cid, 0) - ta * tb * v
            relations.append({k: v for k, v in vec.items() if v})

    boundary_elems = [reps[p] for p in boundary_pids] + [ident]
    prob = assemble(engine, E, "class", level=level, objective=objective, pins=pins, target=target,
                    extra=extra, free=[laplacian(engine)], free_vectors=relations,
                    blocks=[(boundary_elems, ident)], table=table)
    prob.notes["eliminated_points"] = len(interior)
    prob.notes["experimental"] = True
    return prob
