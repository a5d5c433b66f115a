"""Exact arithmetic in the real group algebra R[G] with rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .groups import GroupEngine, GroupError


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"exact rational expected, got {type(v).__name__}")


class AlgebraElement:
    """Finitely supported map from group elements to rationals.

    ``x * y`` is convolution when both operands are algebra elements and
    scalar multiplication otherwise.  Zero coefficients are never stored.
    """

    __slots__ = ("engine", "coeffs")

    def __init__(self, engine: GroupEngine, coeffs: Mapping | None = None) -> None:
        self.engine = engine
        self.coeffs: dict = {}
        if coeffs:
            for g, c in coeffs.items():
                c = as_fraction(c)
                if c:
                    self.coeffs[g] = c

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_terms(cls, engine: GroupEngine, terms: Iterable[tuple]) -> "AlgebraElement":
        out: dict = {}
        for g, c in terms:
            out[g] = out.get(g, Fraction(0)) + as_fraction(c)
        return cls(engine, out)

    @classmethod
    def one(cls, engine: GroupEngine) -> "AlgebraElement":
        return cls(engine, {engine.identity: 1})

    @classmethod
    def zero(cls, engine: GroupEngine) -> "AlgebraElement":
        return cls(engine)

    @classmethod
    def basis(cls, engine: GroupEngine, g, c=1) -> "AlgebraElement":
        return cls(engine, {g: c})

    # -- queries ------------------------------------------------------------
    def __getitem__(self, g) -> Fraction:
        return self.coeffs.get(g, Fraction(0))

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs.items())

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    @property
    def support(self) -> list:
        return sorted(self.coeffs, key=self.engine.key)

    def augmentation(self) -> Fraction:
        return sum(self.coeffs.values(), Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.engine == other.engine and self.coeffs == other.coeffs

    def __hash__(self):
        raise TypeError("AlgebraElement is not hashable")

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = [f"{c}*[{self.engine.serialize(g)}]" for g, c in self.sorted_terms()]
        return " + ".join(parts)

    def sorted_terms(self) -> list:
        return sorted(self.coeffs.items(), key=lambda t: self.engine.key(t[0]))

    # -- arithmetic -----------------------------------------------------------
    def _same(self, other: "AlgebraElement") -> None:
        if self.engine != other.engine:
            raise GroupError("algebra elements over different groups")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same(other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            v = out.get(g, 0) + c
            if v:
                out[g] = v
            else:
                out.pop(g, None)
        return _raw(self.engine, out)

    def __neg__(self) -> "AlgebraElement":
        return _raw(self.engine, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, k) -> "AlgebraElement":
        k = as_fraction(k)
        if not k:
            return AlgebraElement(self.engine)
        return _raw(self.engine, {g: c * k for g, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def star(self) -> "AlgebraElement":
        inv = self.engine._inv
        return _raw(self.engine, {inv(g): c for g, c in self.coeffs.items()})

    def square(self) -> "AlgebraElement":
        """x* x"""
        return convolve(self.star(), self)

    # -- serialization ----------------------------------------------------------
    def to_json(self) -> list:
        ser = self.engine.serialize
        rows = [[ser(g), str(c.numerator), str(c.denominator)] for g, c in self.coeffs.items()]
        rows.sort(key=lambda r: r[0])
        return rows

    @classmethod
    def from_json(cls, engine: GroupEngine, rows: list) -> "AlgebraElement":
        out: dict = {}
        for item in rows:
            if len(item) != 3:
                raise ValueError("algebra term must be [element, numerator, denominator]")
            g = engine.deserialize(item[0])
            den = int(item[2])
            if den <= 0:
                raise ValueError("non-positive denominator")
            c = Fraction(int(item[1]), den)
            if g in out:
                raise ValueError("repeated element in algebra term list")
            out[g] = c
        return cls(engine, out)


def _raw(engine: GroupEngine, coeffs: dict) -> AlgebraElement:
    x = AlgebraElement.__new__(AlgebraElement)
    x.engine = engine
    x.coeffs = coeffs
    return x


def convolve(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._same(y)
    mul = x.engine._mul
    out: dict = {}
    for g, a in x.coeffs.items():
        for h, b in y.coeffs.items():
            k = mul(g, h)
            out[k] = out.get(k, 0) + a * b
    return _raw(x.engine, {k: v for k, v in out.items() if v})


def star(x: AlgebraElement) -> AlgebraElement:
    return x.star()


def laplacian(engine: GroupEngine) -> AlgebraElement:
    """|S| 1 - sum of generators."""
    terms = [(engine.identity, len(engine.generators))]
    terms += [(s, -1) for s in engine.generators]
    return AlgebraElement.from_terms(engine, terms)


def element(engine: GroupEngine, words: Mapping[str, object]) -> AlgebraElement:
    """Build an element from ``{"1": 3, "e": -2, "f g": 1}`` style word labels."""
    terms = []
    for word, c in words.items():
        g = engine.identity if word.strip() in ("", "1") else engine.word(word)
        terms.append((g, c))
    return AlgebraElement.from_terms(engine, terms)
