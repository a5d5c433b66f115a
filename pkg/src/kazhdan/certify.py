"""Exact certificates from approximate solutions.

A certificate is the identity

    sum_i a_i w_i^* w_i  +  sum_j c_j q_j^* q_j  =  R

in the group algebra, compared after summing coefficients per distance
class.  In epsilon mode ``R = Delta^2 - eps' Delta``; in class mode
``R = 2 sum_d (w_d - mu_d)(g_d - 1) + 2 tau' Delta``, which bounds the
weighted class combination of every spacial arrangement by
``tau' |S| + sum_p mu_p v_p``.  Verification uses exact rationals only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .algebra import AlgebraElement, as_fraction, convolve, laplacian
from .builder import BuilderError, SdpProblem, aggregate, parse_element
from .groups import GroupEngine, GroupError, cayley_ball, make_engine
from .symmetry import Symmetry, normalize_level

FORMAT = "kazhdan-certificate/1"


class CertificationError(RuntimeError):
    """Rounding failed or the problem cannot be certified."""


# ---------------------------------------------------------------------------
# rounding


@dataclass
class RoundedBlocks:
    mats: list  # rational symmetric matrices
    scalars: list
    ldl: list  # (perm, L, d) per block
    shifts: list  # diagonal shift added to each block
    denominator: int


def _rationalize(m: np.ndarray, den: int) -> list:
    d = m.shape[0]
    out = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            v = Fraction(int(round(float(m[i, j]) * den)), den)
            out[i][j] = out[j][i] = v
    return out


def round_to_rational_psd(
    mats: Sequence,
    scalars: Sequence = (),
    denominator: int = 2**32,
    max_shift: float | None = None,
) -> RoundedBlocks:
    """Eigen-clip, rationalize and add the smallest dyadic diagonal shift giving exact LDL.

    Exactly PSD rational input is returned unchanged with zero shift.
    """
    out, ldls, shifts = [], [], []
    for m in mats:
        if len(m) and isinstance(m[0][0], Fraction):
            try:
                ldls.append(linalg.ldl_pivoted(m))
                out.append([list(r) for r in m])
                shifts.append(Fraction(0))
                continue
            except ValueError:
                m = np.array([[float(v) for v in r] for r in m])
        m = np.asarray(m, dtype=float)
        d = m.shape[0]
        if d == 0:
            out.append([])
            ldls.append(([], [], []))
            shifts.append(Fraction(0))
            continue
        w, q = np.linalg.eigh((m + m.T) / 2)
        clipped = (q * np.maximum(w, 0.0)) @ q.T
        r = _rationalize(clipped, denominator)
        shift = Fraction(0)
        step = Fraction(max(1, d), denominator)
        for _ in range(80):
            cand = [[v + (shift if i == j else 0) for j, v in enumerate(row)] for i, row in enumerate(r)]
            try:
                ldls.append(linalg.ldl_pivoted(cand))
                break
            except ValueError:
                shift = step if shift == 0 else shift * 2
                if max_shift is not None and shift > max_shift:
                    raise CertificationError(f"rounding needs a diagonal shift above {max_shift}") from None
        else:
            raise CertificationError("rounding failed to produce an exactly PSD matrix")
        out.append(cand)
        shifts.append(shift)
    scal = [max(Fraction(0), Fraction(int(round(float(v) * denominator)), denominator)) for v in scalars]
    return RoundedBlocks(out, scal, ldls, shifts, denominator)


# ---------------------------------------------------------------------------
# words for class representatives


class WordBook:
    """Shortest known word for each distance class, grown as corrections create new elements."""

    def __init__(self, engine: GroupEngine, classify) -> None:
        self.engine = engine
        self.classify = classify
        self.best: dict = {}  # class id -> (element, word)

    def offer(self, g, word: tuple) -> None:
        cid = self.classify(g)
        cur = self.best.get(cid)
        if cur is None or len(word) < len(cur[1]) or (
            len(word) == len(cur[1]) and self.engine.key(g) < self.engine.key(cur[0])
        ):
            self.best[cid] = (g, tuple(word))

    def inv_word(self, word: tuple) -> tuple:
        inv = self.engine.inverse_index
        return tuple(inv[i] for i in reversed(word))

    def element(self, word: tuple):
        gens = self.engine.generators
        return self.engine.product(gens[i] for i in word)

    def length(self, cid: int) -> int:
        return len(self.best[cid][1])


def words_for_support(engine: GroupEngine, E: Sequence, max_radius: int = 12) -> dict:
    """Word (generator indices) of every support element, from a breadth-first search."""
    need = set(E)
    found = {}
    e = engine.identity
    found[e] = ()
    layer = [e]
    need.discard(e)
    r = 0
    while need and layer and r < max_radius:
        r += 1
        nxt = []
        for x in layer:
            wx = found[x]
            for idx, s in enumerate(engine.generators):
                y = engine._mul(x, s)
                if y in found:
                    continue
                found[y] = wx + (idx,)
                need.discard(y)
                nxt.append(y)
        layer = nxt
    if need:
        raise CertificationError("support element beyond the word search radius")
    return {g: found[g] for g in E}


# ---------------------------------------------------------------------------
# order-unit correction


@dataclass
class Correction:
    weight: Fraction
    element: AlgebraElement
    kind: str  # "generator", "pair", "weighted"
    uv: tuple = (1, 1)


def _split(m: int, strategy: str) -> tuple[int, int, int]:
    """(prefix length p, weight u on the prefix point, weight v on the suffix point)."""
    if strategy == "classic" or m < 3:
        return 1, 1, 1
    if strategy != "weighted":
        raise ValueError(f"unknown strategy {strategy!r}")
    p = -(-m // 3)
    u, v = m - p, p
    g = math.gcd(u, v)
    return p, u // g, v // g


def order_unit_correct(
    engine: GroupEngine,
    x: dict,
    book: WordBook,
    gen_counts: dict,
    identity_class: int,
    strategy: str = "classic",
    max_steps: int = 1_000_000,
) -> tuple[Fraction, list]:
    """Find c_j >= 0 and M with  x + sum c_j q_j^* q_j = M Delta  (classwise).

    ``x`` maps class ids to exact coefficients; its identity entry is implied
    by augmentation zero and ignored.  Negative coefficients at a class of
    word length m are cancelled with ``(u+v) 1 - u g1 - v g2`` where
    ``g = g1^-1 g2``; positive ones with ``2 1 - s - g`` where ``g = s g'``.
    Both push mass to strictly shorter classes, so the loop terminates.
    """
    x = {k: as_fraction(v) for k, v in x.items() if k != identity_class and v}
    if strategy == "weighted":
        # the classic schedule is also a weighted schedule (u = v = 1), so keep the better one
        saved = dict(book.best)
        best = _correct_once(engine, dict(x), book, gen_counts, identity_class, "weighted", max_steps)
        after_best, book.best = book.best, dict(saved)
        other = _correct_once(engine, dict(x), book, gen_counts, identity_class, "classic", max_steps)
        if best[0] <= other[0]:
            book.best = after_best
            return best
        return other
    return _correct_once(engine, x, book, gen_counts, identity_class, strategy, max_steps)


def _correct_once(engine, x, book, gen_counts, identity_class, strategy, max_steps):
    corrections: list = []
    e = engine
    one = e.identity
    for _ in range(max_steps):
        live = [(book.length(cid), e.key(book.best[cid][0]), cid) for cid, v in x.items()
                if v and book.length(cid) >= 2]
        if not live:
            break
        live.sort(key=lambda t: (-t[0], t[1]))
        m, _, cid = live[0]
        X = x[cid]
        g, word = book.best[cid]
        if X < 0:
            p, u, v = _split(m, strategy)
            w1, w2 = word[:p], word[p:]
            g1 = book.element(book.inv_word(w1))
            g2 = book.element(w2)
            q = AlgebraElement.from_terms(e, [(one, u + v), (g1, -u), (g2, -v)])
            kind = "pair" if (u, v) == (1, 1) else "weighted"
            book.offer(g1, book.inv_word(w1))
            book.offer(g2, w2)
        else:
            s = e.generators[word[0]]
            u = v = 1
            q = AlgebraElement.from_terms(e, [(one, 2), (s, -1), (g, -1)])
            kind = "pair"
            book.offer(s, word[:1])
            book.offer(e._mul(e._inv(s), g), word[1:])
        sq = aggregate_with(book.classify, q.square())
        coef = sq.get(cid, 0)
        if coef == 0 or (coef > 0) != (X < 0):
            raise CertificationError("correction square does not reach its class")
        c = -X / coef
        for k, a in sq.items():
            if k == identity_class:
                continue
            nv = x.get(k, 0) + c * a
            if nv:
                x[k] = nv
            else:
                x.pop(k, None)
        x.pop(cid, None)
        corrections.append(Correction(c, q, kind, (u, v)))
    else:
        raise CertificationError("order-unit correction did not terminate")

    # now only classes of generators (length one) remain
    M = Fraction(0)
    for cid, k in gen_counts.items():
        M = max(M, -x.get(cid, Fraction(0)) / k)
    for cid, v in x.items():
        if cid not in gen_counts:
            raise CertificationError("residual left on a class of length one outside S")
    for cid, k in sorted(gen_counts.items()):
        c = (x.get(cid, Fraction(0)) + M * k) / 2
        if c:
            s = book.best[cid][0]
            q = AlgebraElement.from_terms(e, [(one, 1), (s, -1)])
            corrections.append(Correction(c, q, "generator", (1, 0)))
    return M, corrections


def aggregate_with(classify, x: AlgebraElement) -> dict:
    out: dict = {}
    for g, c in x.coeffs.items():
        cid = classify(g)
        out[cid] = out.get(cid, 0) + c
    return {k: v for k, v in out.items() if v}


def correct_element(engine: GroupEngine, x: AlgebraElement, words: dict | None = None,
                    strategy: str = "classic", level: str = "none") -> tuple[Fraction, list]:
    """Order-unit correction for an algebra element at a given simplification level.

    ``words`` optionally maps support elements to generator-index words; by
    default words come from a breadth-first search.
    """
    if x.augmentation() != 0:
        raise ValueError("residual is not in the augmentation ideal")
    sym = Symmetry(engine, level)
    index: dict = {}

    def classify(g):
        rep = sym.distance_rep(g)
        if rep not in index:
            index[rep] = len(index)
        return index[rep]

    book = WordBook(engine, classify)
    if words is None:
        words = words_for_support(engine, list(x.coeffs) + [engine.identity])
    for g, w in words.items():
        book.offer(g, tuple(w))
    for i, s in enumerate(engine.generators):
        book.offer(s, (i,))
    book.offer(engine.identity, ())
    gen_counts: dict = {}
    for s in engine.generators:
        cid = classify(s)
        gen_counts[cid] = gen_counts.get(cid, 0) + 1
    vec = aggregate_with(classify, x)
    return order_unit_correct(engine, vec, book, gen_counts, classify(engine.identity), strategy)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    engine: GroupEngine
    level: str
    mode: str
    squares: list  # (weight, AlgebraElement)
    corrections: list  # Correction
    epsilon: Fraction | None = None  # certified gap (epsilon mode)
    claimed: Fraction | None = None  # epsilon or tau before correction
    M: Fraction = Fraction(0)
    shifts: list = field(default_factory=list)
    objective: list = field(default_factory=list)  # (element, weight) class mode
    pins: list = field(default_factory=list)  # (element, value, multiplier)
    tau: Fraction | None = None
    target: Fraction | None = None

    @property
    def bound(self) -> Fraction | None:
        if self.mode != "class":
            return None
        nS = len(self.engine.generators)
        return self.tau * nS + sum((mu * v for _, v, mu in self.pins), Fraction(0))

    @property
    def margin(self) -> Fraction | None:
        if self.mode != "class" or self.target is None:
            return None
        return self.target - self.bound

    @property
    def proves(self) -> bool:
        if self.mode == "epsilon":
            return self.epsilon is not None and self.epsilon > 0
        return self.margin is not None and self.margin > 0

    def rhs(self) -> AlgebraElement:
        e = self.engine
        lap = laplacian(e)
        if self.mode == "epsilon":
            return convolve(lap, lap) - lap.scale(self.epsilon)
        out = lap.scale(2 * self.tau)
        muls: dict = {}
        for g, v, mu in self.pins:
            muls[g] = muls.get(g, 0) + mu
        terms = [(g, 2 * w) for g, w in self.objective] + [(g, -2 * mu) for g, mu in muls.items()]
        for g, c in terms:
            out = out + AlgebraElement.from_terms(e, [(g, c), (e.identity, -c)])
        return out

    def to_json(self) -> dict:
        ser = self.engine.serialize
        fr = lambda v: None if v is None else f"{v.numerator}/{v.denominator}"  # noqa: E731
        return {
            "format": FORMAT,
            "group": self.engine.params,
            "level": self.level,
            "mode": self.mode,
            "squares": [{"weight": fr(w), "element": q.to_json()} for w, q in self.squares],
            "corrections": [
                {"weight": fr(c.weight), "kind": c.kind, "uv": list(c.uv), "element": c.element.to_json()}
                for c in self.corrections
            ],
            "epsilon": fr(self.epsilon),
            "claimed": fr(self.claimed),
            "M": fr(self.M),
            "shifts": [fr(s) for s in self.shifts],
            "objective": [[ser(g), fr(w)] for g, w in self.objective],
            "pins": [[ser(g), fr(v), fr(mu)] for g, v, mu in self.pins],
            "tau": fr(self.tau),
            "target": fr(self.target),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        if data.get("format") != FORMAT:
            raise ValueError("unknown certificate format")
        grp = data["group"]
        engine = make_engine(grp["family"], int(grp["n"]))
        fr = lambda v: None if v is None else _parse_fraction(v)  # noqa: E731
        squares = [(fr(s["weight"]), AlgebraElement.from_json(engine, s["element"])) for s in data["squares"]]
        corr = [
            Correction(fr(c["weight"]), AlgebraElement.from_json(engine, c["element"]), str(c["kind"]),
                       tuple(int(t) for t in c.get("uv", (1, 1))))
            for c in data["corrections"]
        ]
        return cls(
            engine=engine,
            level=normalize_level(data["level"]),
            mode=data["mode"],
            squares=squares,
            corrections=corr,
            epsilon=fr(data.get("epsilon")),
            claimed=fr(data.get("claimed")),
            M=fr(data.get("M")) or Fraction(0),
            shifts=[fr(s) for s in data.get("shifts", [])],
            objective=[(engine.deserialize(g), fr(w)) for g, w in data.get("objective", [])],
            pins=[(engine.deserialize(g), fr(v), fr(mu)) for g, v, mu in data.get("pins", [])],
            tau=fr(data.get("tau")),
            target=fr(data.get("target")),
        )

    @classmethod
    def loads(cls, text: str) -> "Certificate":
        return cls.from_json(json.loads(text))


def _parse_fraction(text) -> Fraction:
    if not isinstance(text, str) or "." in text or "e" in text.lower():
        raise ValueError("rationals must be numerator/denominator strings")
    return Fraction(text)


@dataclass
class Residual:
    x: dict  # distance class id -> exact coefficient, identity class omitted
    claimed: Fraction  # epsilon (epsilon mode) or tau (class mode)
    multipliers: dict  # pinned class id -> mu


def residual(problem: SdpProblem, z: Sequence, epsilon=None) -> Residual:
    """Class vector of  Phi(lambda) - R  for exact columns z.

    ``R`` is the right-hand side the certificate will claim.  The claimed
    epsilon (or tau) defaults to the value read off the first generator class,
    which makes that class vanish from the residual.
    """
    z = [as_fraction(v) for v in z]
    phi = problem.phi(z)
    w = problem.weights
    k = problem.gen_counts
    g0 = problem.pivots[0]
    mus: dict = {}
    if problem.mode == "epsilon":
        eps = (phi.get(g0, 0) - 2 * w.get(g0, 0)) / k[g0] if epsilon is None else as_fraction(epsilon)
        target = {cid: 2 * w.get(cid, 0) + eps * k.get(cid, 0) for cid in set(w) | set(k)}
        claimed = eps
    else:
        # multipliers on pivot rows: Zp theta = (w - phi/2)_piv
        piv = problem.pivots
        zcols = [k] + [{c: 1} for c in problem.pins]
        zp = [[Fraction(zc.get(pc, 0)) for zc in zcols] for pc in piv]
        rhs = [w.get(pc, 0) - phi.get(pc, 0) / 2 for pc in piv]
        theta = linalg.matvec(linalg.inverse(zp), rhs)
        claimed = theta[0]
        mus = dict(zip(problem.pins, theta[1:]))
        target = {}
        for cid in set(w) | set(k) | set(mus):
            target[cid] = 2 * w.get(cid, 0) - 2 * claimed * k.get(cid, 0) - 2 * mus.get(cid, 0)
    ident = problem.table.identity_class
    x = {}
    for cid in set(phi) | set(target):
        if cid == ident:
            continue
        v = phi.get(cid, 0) - target.get(cid, 0)
        if v:
            x[cid] = v
    return Residual(x, claimed, mus)


@dataclass
class CertifyOptions:
    denominator: int = 2**32
    strategy: str = "weighted"
    max_shift_fraction: float = 0.5  # of the claimed epsilon / margin


def certify(problem: SdpProblem, solution, options: CertifyOptions | None = None) -> Certificate:
    """Round, extract weighted squares, correct the residual and package the certificate."""
    opt = options or CertifyOptions()
    if problem.free:
        raise CertificationError("problems with assumed-zero squares are not certifiable")
    if len(problem.pivots) != 1 + len(problem.pins):
        raise CertificationError("problems with assumed-zero relations are not certifiable")
    engine = problem.engine
    table = problem.table
    mats, scalars = problem.vec_to_blocks(list(np.asarray(solution.z, dtype=float)))

    nS = len(engine.generators)
    max_shift = None
    if problem.mode == "epsilon" and solution.primal_objective > 0:
        max_shift = Fraction(solution.primal_objective * opt.max_shift_fraction).limit_denominator(2**40)
    rounded = round_to_rational_psd(mats, scalars, opt.denominator, max_shift)

    # squares from the exact LDL factors
    squares = []
    for blk, (perm, L, d) in zip(problem.blocks, rounded.ldl):
        dim = blk.dim
        for i in range(dim):
            if not d[i]:
                continue
            terms = []
            for k in range(dim):
                coef = L[k][i]
                if coef:
                    g = blk.reps[perm[k]]
                    terms.append((g, coef))
                    terms.append((blk.base, -coef))
            w = AlgebraElement.from_terms(engine, terms)
            if w:
                squares.append((d[i], w))
    for sigma, q in zip(rounded.scalars, problem.extra):
        if sigma:
            squares.append((sigma, q))

    z = problem.blocks_to_vec(rounded.mats, rounded.scalars)
    res = residual(problem, z)
    x = res.x
    k = problem.gen_counts
    ident = table.identity_class
    w = problem.weights

    book = WordBook(engine, table.classify)
    words = words_for_support(engine, table.support)
    for g in table.support:
        book.offer(g, words[g])
    inv = engine._inv
    for a in table.support:
        wa = book.inv_word(words[a])
        ai = inv(a)
        for bb in table.support:
            book.offer(engine._mul(ai, bb), wa + words[bb])
    for q in problem.extra:
        for g in q.coeffs:
            if g not in words:
                words.update(words_for_support(engine, [g]))
            book.offer(g, words[g])
        for g1 in q.coeffs:
            for g2 in q.coeffs:
                book.offer(engine._mul(inv(g1), g2), book.inv_word(words[g1]) + words[g2])
    for i, s in enumerate(engine.generators):
        book.offer(s, (i,))
    book.offer(engine.identity, ())
    missing = [cid for cid in x if cid not in book.best]
    if missing:
        raise CertificationError("residual class without a known word")

    M, corrections = order_unit_correct(engine, x, book, k, ident, opt.strategy)

    cert = Certificate(engine=engine, level=problem.level, mode=problem.mode, squares=squares,
                       corrections=corrections, M=M, shifts=rounded.shifts)
    mus = res.multipliers
    if problem.mode == "epsilon":
        cert.claimed = res.claimed
        cert.epsilon = res.claimed - M
    else:
        cert.claimed = res.claimed
        cert.tau = res.claimed + M / 2
        reps = table.distance_reps
        cert.objective = [(reps[cid], wv) for cid, wv in sorted(w.items())]
        cert.pins = [(reps[cid], problem.pins[cid], mus[cid]) for cid in problem.pins]
        cert.target = problem.target
    return cert


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyResult:
    accepted: bool
    reason: str
    identity_holds: bool = False
    value: Fraction | None = None  # epsilon' or margin

    def __bool__(self) -> bool:
        return self.accepted


def verify(cert: Certificate) -> VerifyResult:
    """Recompute the certificate identity with exact arithmetic only."""
    try:
        return _verify(cert)
    except (ValueError, TypeError, KeyError, GroupError, ZeroDivisionError, AttributeError) as exc:
        return VerifyResult(False, f"malformed certificate: {exc}")


def _verify(cert: Certificate) -> VerifyResult:
    e = cert.engine
    if cert.mode not in ("epsilon", "class"):
        return VerifyResult(False, "unknown mode")
    for w, q in cert.squares:
        if not isinstance(w, Fraction) or w < 0:
            return VerifyResult(False, "negative square weight")
        if q.engine != e:
            return VerifyResult(False, "square over a different group")
        if q.augmentation() != 0:
            return VerifyResult(False, "square outside the augmentation ideal")
    for c in cert.corrections:
        if not isinstance(c.weight, Fraction) or c.weight < 0:
            return VerifyResult(False, "negative correction weight")
        if c.element.augmentation() != 0:
            return VerifyResult(False, "correction outside the augmentation ideal")
    if cert.mode == "epsilon":
        if cert.epsilon is None:
            return VerifyResult(False, "missing epsilon")
    else:
        if cert.tau is None or cert.target is None:
            return VerifyResult(False, "missing bound data")
        for _, v, mu in cert.pins:
            if v is None or mu is None:
                return VerifyResult(False, "incomplete pin")

    lhs: dict = {}
    for w, q in list(cert.squares) + [(c.weight, c.element) for c in cert.corrections]:
        if not w:
            continue
        for g, v in convolve(q.star(), q).coeffs.items():
            lhs[g] = lhs.get(g, 0) + w * v
    rhs = cert.rhs()

    level = normalize_level(cert.level)
    if level == "none" and cert.mode == "epsilon":
        diff = dict(lhs)
        for g, v in rhs.coeffs.items():
            diff[g] = diff.get(g, 0) - v
        ok = not any(diff.values())
    else:
        sym = Symmetry(e, level)
        agg: dict = {}
        for g, v in lhs.items():
            r = sym.distance_rep(g)
            agg[r] = agg.get(r, 0) + v
        for g, v in rhs.coeffs.items():
            r = sym.distance_rep(g)
            agg[r] = agg.get(r, 0) - v
        ok = not any(agg.values())
    if not ok:
        return VerifyResult(False, "identity fails")
    if cert.mode == "epsilon":
        if cert.epsilon > 0:
            return VerifyResult(True, "identity holds; spectral gap certified", True, cert.epsilon)
        return VerifyResult(False, "identity holds but epsilon' <= 0 proves nothing", True, cert.epsilon)
    margin = cert.margin
    if margin > 0:
        return VerifyResult(True, "identity holds; bound below target", True, margin)
    return VerifyResult(False, "identity holds but the bound does not beat the target", True, margin)
