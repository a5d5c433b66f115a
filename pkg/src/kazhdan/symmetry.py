"""Point classes and distance classes.

Two points of a support represent the same point when they differ by right
multiplication with an element of N, the subgroup generated by finite order
elements conjugating S into itself.  Two group elements represent the same
distance when one is obtained from the other by inversion, an S-preserving
automorphism and right multiplication by N.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .groups import GroupEngine, GroupError, ResourceLimitError

LEVELS = ("none", "point", "point+distance")
_LEVEL_ALIASES = {
    "none": "none",
    "point": "point",
    "point+distance": "point+distance",
    "distance": "point+distance",
    "full": "point+distance",
}


def normalize_level(level: str) -> str:
    try:
        return _LEVEL_ALIASES[level]
    except KeyError:
        raise ValueError(f"unknown simplification level {level!r}; use one of {LEVELS}") from None


def n_subgroup(engine: GroupEngine, bound: int = 100_000) -> list:
    """Closure of the engine's normalizer seed, checked to conjugate S into S."""
    elems = {engine.identity}
    seed = list(engine.normalizer_seed())
    frontier = [engine.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for t in seed:
                y = engine._mul(x, t)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
                    if len(elems) > bound:
                        raise ResourceLimitError("normalizer closure exceeds its bound")
        frontier = nxt
    gens = set(engine.generators)
    for t in elems:
        ti = engine._inv(t)
        for s in engine.generators:
            if engine._mul(engine._mul(ti, s), t) not in gens:
                raise GroupError("normalizer seed element does not conjugate S into S")
    return sorted(elems, key=engine.key)


@dataclass(frozen=True)
class Transformation:
    label: str
    apply: Callable
    signature: tuple  # images of the generators as generator indices

    def __call__(self, g):
        return self.apply(g)


def _signature(engine: GroupEngine, fn: Callable) -> tuple:
    index = {s: i for i, s in enumerate(engine.generators)}
    sig = []
    for s in engine.generators:
        img = fn(s)
        if img not in index:
            raise GroupError("automorphism does not map S into S")
        sig.append(index[img])
    if len(set(sig)) != len(sig):
        raise GroupError("automorphism is not injective on S")
    return tuple(sig)


def aut_s_group(engine: GroupEngine, bound: int = 100_000) -> list[Transformation]:
    """Closure of the engine's S-preserving automorphisms, deduplicated by action on S."""
    ident = Transformation("id", lambda g: g, tuple(range(len(engine.generators))))
    gens = []
    for label, fn in engine.automorphism_generators():
        gens.append(Transformation(label, fn, _signature(engine, fn)))
    found = {ident.signature: ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for t in frontier:
            for u in gens:
                sig = tuple(u.signature[i] for i in t.signature)
                if sig in found:
                    continue
                fn = (lambda a, b: (lambda g: b(a(g))))(t.apply, u.apply)
                label = u.label if t.label == "id" else f"{u.label}.{t.label}"
                new = Transformation(label, fn, sig)
                found[sig] = new
                nxt.append(new)
                if len(found) > bound:
                    raise ResourceLimitError("automorphism closure exceeds its bound")
        frontier = nxt
    return sorted(found.values(), key=lambda t: t.signature)


class Symmetry:
    """Canonical representatives for one engine and simplification level."""

    def __init__(self, engine: GroupEngine, level: str = "point+distance") -> None:
        self.engine = engine
        self.level = normalize_level(level)
        if self.level == "none":
            self.N = [engine.identity]
            self.auts = [Transformation("id", lambda g: g, tuple(range(len(engine.generators))))]
        else:
            self.N = n_subgroup(engine)
            self.auts = aut_s_group(engine) if self.level == "point+distance" else None
        self._nset = set(self.N)
        self._point_cache: dict = {}
        self._dist_cache: dict = {}

    @property
    def trivial_n(self) -> bool:
        return len(self.N) == 1

    def same_point(self, a, b) -> bool:
        e = self.engine
        return e._mul(e._inv(a), b) in self._nset

    def point_rep(self, g):
        if self.trivial_n:
            return g
        rep = self._point_cache.get(g)
        if rep is None:
            e = self.engine
            rep = e.fast_orbit_min(g, "point")
            if rep is None:
                rep = min((e._mul(g, h) for h in self.N), key=e.key)
            self._point_cache[g] = rep
        return rep

    def distance_rep(self, g):
        rep = self._dist_cache.get(g)
        if rep is not None:
            return rep
        e = self.engine
        gi = e._inv(g)
        if self.level == "none":
            rep = min(g, gi, key=e.key)
        else:
            kind = "point-distance" if self.level == "point" else "distance"
            rep = None if self.trivial_n and self.level == "point" else e.fast_orbit_min(g, kind)
            if rep is None:
                rep = min(self.distance_orbit(g), key=e.key)
        self._dist_cache[g] = rep
        return rep

    def distance_orbit(self, g) -> set:
        """Explicit orbit, by applying every (automorphism, N element, sign) triple."""
        e = self.engine
        out = set()
        base = [g, e._inv(g)]
        if self.level == "point":
            for x in base:
                for h1 in self.N:
                    hx = e._mul(h1, x)
                    for h2 in self.N:
                        out.add(e._mul(hx, h2))
            return out
        auts = self.auts or []
        for x in base:
            for t in auts:
                y = t(x)
                for h in self.N:
                    out.add(e._mul(y, h))
        return out


@dataclass
class ClassTable:
    """Point and distance classes over a support E and its difference set E*E."""

    engine: GroupEngine
    level: str
    symmetry: Symmetry
    support: list
    point_of: dict = field(default_factory=dict)  # element -> point class id
    point_reps: list = field(default_factory=list)
    point_members: list = field(default_factory=list)
    distance_of: dict = field(default_factory=dict)  # element of E*E -> class id
    distance_reps: list = field(default_factory=list)
    distance_sizes: list = field(default_factory=list)
    _rep_index: dict = field(default_factory=dict)

    @property
    def identity_point(self) -> int:
        return self.point_of[self.engine.identity]

    @property
    def identity_class(self) -> int:
        return self._rep_index[self.symmetry.distance_rep(self.engine.identity)]

    def classify(self, g) -> int:
        """Distance class id of any group element, adding a new class if needed."""
        cid = self.distance_of.get(g)
        if cid is not None:
            return cid
        rep = self.symmetry.distance_rep(g)
        cid = self._rep_index.get(rep)
        if cid is None:
            cid = len(self.distance_reps)
            self._rep_index[rep] = cid
            self.distance_reps.append(rep)
            self.distance_sizes.append(0)
        return cid

    def class_of_rep(self, rep) -> int | None:
        return self._rep_index.get(self.symmetry.distance_rep(rep))

    def to_json(self) -> dict:
        ser = self.engine.serialize
        return {
            "level": self.level,
            "points": [
                {"id": i, "rep": ser(r), "members": [ser(m) for m in mem]}
                for i, (r, mem) in enumerate(zip(self.point_reps, self.point_members))
            ],
            "distances": [
                {"id": i, "rep": ser(r), "size": s}
                for i, (r, s) in enumerate(zip(self.distance_reps, self.distance_sizes))
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def build_class_table(
    engine: GroupEngine,
    E: Iterable,
    level: str = "point+distance",
    symmetry: Symmetry | None = None,
    cap: int = 5_000_000,
) -> ClassTable:
    E = list(dict.fromkeys(E))
    if engine.identity not in E:
        raise GroupError("support must contain the identity")
    sym = symmetry if symmetry is not None else Symmetry(engine, level)
    table = ClassTable(engine, sym.level, sym, E)

    by_rep: dict = {}
    for g in E:
        rep = sym.point_rep(g)
        by_rep.setdefault(rep, []).append(g)
    reps = sorted(by_rep, key=engine.key)
    for pid, rep in enumerate(reps):
        table.point_reps.append(rep)
        table.point_members.append(sorted(by_rep[rep], key=engine.key))
        for g in by_rep[rep]:
            table.point_of[g] = pid

    diffs = set()
    inv = engine._inv
    mul = engine._mul
    for a in E:
        ai = inv(a)
        for b in E:
            diffs.add(mul(ai, b))
            if len(diffs) > cap:
                raise ResourceLimitError("difference set exceeds its cap")
    reps_of = {g: sym.distance_rep(g) for g in diffs}
    ordered = sorted(set(reps_of.values()), key=engine.key)
    for rep in ordered:
        table._rep_index[rep] = len(table.distance_reps)
        table.distance_reps.append(rep)
        table.distance_sizes.append(0)
    for g, rep in reps_of.items():
        cid = table._rep_index[rep]
        table.distance_of[g] = cid
        table.distance_sizes[cid] += 1
    return table


def canonical_point_rep(engine: GroupEngine, g, level: str = "point+distance"):
    return Symmetry(engine, level).point_rep(g)


def canonical_distance_rep(engine: GroupEngine, g, level: str = "point+distance"):
    return Symmetry(engine, level).distance_rep(g)
