"""Exact group engines.

Every engine represents its elements as hashable tuples of Python ints, so
elements can be used directly as dictionary keys.  ``engine.key(x)`` gives the
total order used for canonical representatives and ``engine.serialize(x)``
an injective text form.

Supported families:

* ``SL`` -- SL(n, Z) with the elementary matrices and their inverses.
* ``Steinberg`` -- alias for ``SL``; both produce the same SDP.
* ``Heisenberg`` -- the discrete Heisenberg group, ``e^a g^b f^c`` normal form
  with ``[e, g] = f`` central.
* ``FreeAbelian`` -- Z^n with the standard basis and inverses.
* ``SAut`` -- SAut(F_n) with the Nielsen transvections ``E_{f, f'}``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_BALL_CAP = 5_000_000


class GroupError(ValueError):
    """Raised for malformed elements or mixing elements of different engines."""


class ResourceLimitError(RuntimeError):
    """Raised when an enumeration exceeds its configured element cap."""


class GroupEngine:
    """Base class.  Subclasses fill in the group law and symmetry seeds."""

    family: str = ""
    n: int = 0

    def __init__(self) -> None:
        self.generators: list = []
        self.labels: list[str] = []
        self.inverse_index: list[int] = []

    # -- identification -------------------------------------------------
    @property
    def params(self) -> dict:
        return {"family": self.family, "n": self.n}

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupEngine) and self.params == other.params

    def __hash__(self) -> int:
        return hash((self.family, self.n))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"

    # -- group law --------------------------------------------------------
    identity: tuple = ()

    def mul(self, a, b):
        self.check(a)
        self.check(b)
        return self._mul(a, b)

    def inv(self, a):
        self.check(a)
        return self._inv(a)

    def _mul(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    def check(self, a) -> None:
        raise NotImplementedError

    def product(self, elements: Iterable):
        out = self.identity
        for x in elements:
            out = self._mul(out, x)
        return out

    def power(self, a, k: int):
        if k < 0:
            a, k = self._inv(a), -k
        out = self.identity
        for _ in range(k):
            out = self._mul(out, a)
        return out

    # -- ordering and serialization ----------------------------------------
    def key(self, a):
        return a

    def serialize(self, a) -> str:
        return ",".join(str(v) for v in a)

    def deserialize(self, text: str):
        a = tuple(int(v) for v in text.split(","))
        self.check(a)
        return a

    # -- generators ----------------------------------------------------------
    def generator(self, label: str):
        """Look up a generator (or its inverse with a trailing ``*``)."""
        if label.endswith("*"):
            return self._inv(self.generator(label[:-1]))
        try:
            return self.generators[self.labels.index(label)]
        except ValueError:
            raise GroupError(f"unknown generator label {label!r}") from None

    def word(self, text: str):
        """Multiply out a whitespace separated word of generator labels."""
        return self.product(self.generator(tok) for tok in text.split())

    # -- symmetry seeds -----------------------------------------------------
    def normalizer_seed(self) -> list:
        """Finite-order elements conjugating S into itself (closure taken later)."""
        return []

    def automorphism_generators(self) -> list[tuple[str, Callable]]:
        """S-preserving automorphisms, as (label, map on elements)."""
        return []

    def fast_orbit_min(self, g, kind: str):
        """Engine specific shortcut for canonical representatives, or None."""
        return None

    def _validate_generators(self) -> None:
        seen = set()
        for idx, s in enumerate(self.generators):
            if s == self.identity:
                raise GroupError("identity listed as a generator")
            if s in seen:
                raise GroupError("duplicate generator")
            seen.add(s)
            if self.generators[self.inverse_index[idx]] != self._inv(s):
                raise GroupError(f"generator {self.labels[idx]} has a wrong inverse index")


# ---------------------------------------------------------------------------
# SL(n, Z)


def _matmul(a: tuple, b: tuple, n: int) -> tuple:
    return tuple(
        sum(a[i * n + k] * b[k * n + j] for k in range(n)) for i in range(n) for j in range(n)
    )


def _det(m: tuple, n: int) -> int:
    # Bareiss fraction-free elimination, exact on integers
    a = [list(m[i * n:(i + 1) * n]) for i in range(n)]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _adjugate_inverse(m: tuple, n: int) -> tuple:
    """Inverse of a unimodular integer matrix by Gauss-Jordan over the rationals."""
    from fractions import Fraction

    a = [[Fraction(m[i * n + j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    out = []
    for i in range(n):
        for j in range(n):
            v = a[i][n + j]
            if v.denominator != 1:
                raise GroupError("matrix is not unimodular")
            out.append(int(v))
    return tuple(out)


def signed_permutation_matrices(n: int, det: int | None = None) -> list[tuple]:
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            m = [0] * (n * n)
            for i in range(n):
                m[i * n + perm[i]] = signs[i]
            m = tuple(m)
            if det is None or _det(m, n) == det:
                out.append(m)
    return out


class SLEngine(GroupEngine):
    """SL(n, Z), elements are row-major integer tuples of length n*n."""

    family = "SL"

    def __init__(self, n: int = 3) -> None:
        super().__init__()
        if n < 2:
            raise GroupError("SL(n, Z) needs n >= 2")
        self.n = n
        self.identity = tuple(int(i == j) for i in range(n) for j in range(n))
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                m = list(self.identity)
                m[i * n + j] = 1
                self.generators.append(tuple(m))
                self.labels.append(f"E{i + 1}{j + 1}")
                m[i * n + j] = -1
                self.generators.append(tuple(m))
                self.labels.append(f"E{i + 1}{j + 1}^-1")
        self.inverse_index = [k ^ 1 for k in range(len(self.generators))]
        if n == 3:
            # names used in the SL(3, Z) discussion
            alias = {"e": "E12", "f": "E13", "g": "E23", "ebar": "E21", "fbar": "E31", "gbar": "E32"}
            self.aliases = alias
        else:
            self.aliases = {}
        self._validate_generators()
        self._orbit_tables = None

    def generator(self, label: str):
        if label.endswith("*"):
            return self._inv(self.generator(label[:-1]))
        return super().generator(self.aliases.get(label, label))

    def elementary(self, i: int, j: int, k: int = 1) -> tuple:
        m = list(self.identity)
        m[(i - 1) * self.n + (j - 1)] = k
        return tuple(m)

    def check(self, a) -> None:
        if not isinstance(a, tuple) or len(a) != self.n * self.n:
            raise GroupError(f"not an SL({self.n}, Z) element: {a!r}")

    def validate(self, a) -> None:
        self.check(a)
        if _det(a, self.n) != 1:
            raise GroupError("determinant is not 1")

    def _mul(self, a, b):
        return _matmul(a, b, self.n)

    def _inv(self, a):
        if self.n == 3:
            a0, a1, a2, a3, a4, a5, a6, a7, a8 = a
            # adjugate; det = 1
            return (
                a4 * a8 - a5 * a7, a2 * a7 - a1 * a8, a1 * a5 - a2 * a4,
                a5 * a6 - a3 * a8, a0 * a8 - a2 * a6, a2 * a3 - a0 * a5,
                a3 * a7 - a4 * a6, a1 * a6 - a0 * a7, a0 * a4 - a1 * a3,
            )
        return _adjugate_inverse(a, self.n)

    def transpose(self, a):
        n = self.n
        return tuple(a[j * n + i] for i in range(n) for j in range(n))

    def normalizer_seed(self) -> list:
        return signed_permutation_matrices(self.n, det=1)

    def automorphism_generators(self) -> list[tuple[str, Callable]]:
        n = self.n
        gens = []
        # conjugation by a transposition and by a single sign flip generate
        # all conjugations by signed permutation matrices
        for k in range(n - 1):
            p = list(range(n))
            p[k], p[k + 1] = p[k + 1], p[k]
            m = tuple(int(p[i] == j) for i in range(n) for j in range(n))
            gens.append((f"conj(swap{k + 1}{k + 2})", self._conjugator(m)))
        d = tuple((-1 if i == 0 else 1) * int(i == j) for i in range(n) for j in range(n))
        gens.append(("conj(flip1)", self._conjugator(d)))
        gens.append(("transpose-inverse", lambda x: self.transpose(self._inv(x))))
        return gens

    def _conjugator(self, m):
        mi = self._inv(m) if _det(m, self.n) == 1 else _adjugate_inverse(m, self.n)
        return lambda x: _matmul(_matmul(m, x, self.n), mi, self.n)

    # -- vectorized canonical forms ------------------------------------------
    def _tables(self):
        if self._orbit_tables is None:
            n = self.n
            h_all = signed_permutation_matrices(n)
            dets = [_det(h, n) for h in h_all]
            arr = np.array(h_all, dtype=np.int64).reshape(-1, n, n)
            dets = np.array(dets)
            self._orbit_tables = {
                "H": arr,
                "H+": arr[dets == 1],
                "H-": arr[dets == -1],
            }
        return self._orbit_tables

    def fast_orbit_min(self, g, kind: str):
        n = self.n
        t = self._tables()
        gm = np.array(g, dtype=np.int64).reshape(n, n)
        if kind == "point":
            cands = np.einsum("ij,kjl->kil", gm, t["H+"])
        else:
            gi = np.array(self._inv(g), dtype=np.int64).reshape(n, n)
            bases = [gm, gi]
            if kind == "distance":
                bases += [gi.T.copy(), gm.T.copy()]
                pairs = [(t["H+"], t["H+"]), (t["H-"], t["H-"])]
            elif kind == "point-distance":
                pairs = [(t["H+"], t["H+"])]
            else:
                return None
            chunks = []
            for b in bases:
                for left, right in pairs:
                    lb = np.einsum("aij,jk->aik", left, b)
                    chunks.append(np.einsum("aij,bjk->abik", lb, right).reshape(-1, n, n))
            cands = np.concatenate(chunks)
        flat = cands.reshape(len(cands), -1)
        return _lexmin_rows(flat)


def _lexmin_rows(flat: np.ndarray) -> tuple:
    rows = flat
    for col in range(flat.shape[1]):
        m = rows[:, col].min()
        rows = rows[rows[:, col] == m]
        if len(rows) == 1:
            break
    return tuple(int(v) for v in rows[0])


# ---------------------------------------------------------------------------
# Heisenberg group


class HeisenbergEngine(GroupEngine):
    """H_3(Z) = <e, f, g | [e,f] = [f,g] = 1, [e,g] = f>, elements (a, b, c) = e^a g^b f^c."""

    family = "Heisenberg"

    def __init__(self, n: int = 3) -> None:
        super().__init__()
        self.n = 3
        self.identity = (0, 0, 0)
        for name, gen in (("e", (1, 0, 0)), ("f", (0, 0, 1)), ("g", (0, 1, 0))):
            self.generators += [gen, self._inv(gen)]
            self.labels += [name, name + "^-1"]
        self.inverse_index = [k ^ 1 for k in range(6)]
        self._validate_generators()

    def check(self, a) -> None:
        if not isinstance(a, tuple) or len(a) != 3:
            raise GroupError(f"not a Heisenberg element: {a!r}")

    def _mul(self, x, y):
        # g^b e^a' = e^a' g^b f^(-a' b)
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] - y[0] * x[1])

    def _inv(self, x):
        return (-x[0], -x[1], -x[0] * x[1] - x[2])

    def automorphism_generators(self) -> list[tuple[str, Callable]]:
        return [
            # e -> e^-1, g -> g, f -> f^-1
            ("invert-e", lambda x: (-x[0], x[1], -x[2])),
            # e <-> g, f -> f^-1; g^a e^b = e^b g^a f^(-ab)
            ("swap-eg", lambda x: (x[1], x[0], -x[2] - x[0] * x[1])),
        ]


# ---------------------------------------------------------------------------
# Z^n


class FreeAbelianEngine(GroupEngine):
    family = "FreeAbelian"

    def __init__(self, n: int = 1) -> None:
        super().__init__()
        if n < 1:
            raise GroupError("Z^n needs n >= 1")
        self.n = n
        self.identity = (0,) * n
        for i in range(n):
            e = tuple(int(k == i) for k in range(n))
            self.generators += [e, tuple(-v for v in e)]
            self.labels += [f"t{i + 1}", f"t{i + 1}^-1"]
        if n == 1:
            self.labels[0], self.labels[1] = "t", "t^-1"
        self.inverse_index = [k ^ 1 for k in range(2 * n)]
        self._validate_generators()

    def check(self, a) -> None:
        if not isinstance(a, tuple) or len(a) != self.n:
            raise GroupError(f"not a Z^{self.n} element: {a!r}")

    def _mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _inv(self, a):
        return tuple(-x for x in a)

    def automorphism_generators(self) -> list[tuple[str, Callable]]:
        gens = [("negate1", lambda x: (-x[0],) + x[1:])]
        for k in range(self.n - 1):
            def swap(x, k=k):
                y = list(x)
                y[k], y[k + 1] = y[k + 1], y[k]
                return tuple(y)
            gens.append((f"swap{k + 1}{k + 2}", swap))
        return gens


# ---------------------------------------------------------------------------
# SAut(F_n)
#
# Words in F_n are tuples of nonzero ints, letter +-(i+1) standing for f_i^(+-1).
# An element is (images, inverse_images); composition is mul(a, b) = a o b.


def reduce_word(word: Iterable[int]) -> tuple:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Sequence[int]) -> tuple:
    return tuple(-x for x in reversed(word))


def substitute(word: Sequence[int], images: Sequence[tuple]) -> tuple:
    out: list[int] = []
    for x in word:
        piece = images[x - 1] if x > 0 else invert_word(images[-x - 1])
        for y in piece:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


@dataclass(frozen=True)
class SignedPermutation:
    """f_i -> f_{perm[i]}^{signs[i]}."""

    perm: tuple
    signs: tuple

    @property
    def det(self) -> int:
        inv = sum(1 for i in range(len(self.perm)) for j in range(i) if self.perm[j] > self.perm[i])
        d = -1 if inv % 2 else 1
        for s in self.signs:
            d *= s
        return d

    def letter_map(self) -> dict:
        m = {}
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            m[i + 1] = s * (p + 1)
            m[-(i + 1)] = -s * (p + 1)
        return m

    def inverse(self) -> "SignedPermutation":
        n = len(self.perm)
        perm = [0] * n
        signs = [1] * n
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            perm[p] = i
            signs[p] = s
        return SignedPermutation(tuple(perm), tuple(signs))


class SAutEngine(GroupEngine):
    """SAut(F_n) with the 4 n (n-1) Nielsen transvections."""

    family = "SAut"

    def __init__(self, n: int = 4) -> None:
        super().__init__()
        if n < 2:
            raise GroupError("SAut(F_n) needs n >= 2")
        self.n = n
        basis = tuple((i + 1,) for i in range(n))
        self.identity = (basis, basis)
        index = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                a, b = i + 1, j + 1
                # E_{f,f'}: f -> f f'; for f = f_i^-1 this means f_i -> f'^-1 f_i
                for si, sj, img in (
                    (1, 1, (a, b)),
                    (1, -1, (a, -b)),
                    (-1, 1, (-b, a)),
                    (-1, -1, (b, a)),
                ):
                    index[(i, j, si, sj)] = len(self.generators)
                    self.generators.append(self._transvection(i, img))
                    self.labels.append(
                        f"E(f{a}{'' if si > 0 else '^-1'},f{b}{'' if sj > 0 else '^-1'})"
                    )
        # E_{f,f'}^-1 = E_{f,f'^-1}
        self.inverse_index = [index[(i, j, si, -sj)] for (i, j, si, sj) in index]
        self._validate_generators()
        self._signed_perms = None

    def _transvection(self, i: int, image: tuple):
        imgs = [(k + 1,) for k in range(self.n)]
        imgs[i] = image
        imgs = tuple(imgs)
        # inverse images by substitution is not available yet, build by formula
        a = i + 1
        if image[0] == a:
            inv = (a, -image[1])
        else:
            inv = (-image[0], a)
        invs = [(k + 1,) for k in range(self.n)]
        invs[i] = inv
        return (imgs, tuple(invs))

    def transvection(self, f: int, f2: int) -> tuple:
        """E_{f, f2} with signed 1-based letters, e.g. transvection(-1, 2)."""
        label = f"E(f{abs(f)}{'' if f > 0 else '^-1'},f{abs(f2)}{'' if f2 > 0 else '^-1'})"
        return self.generator(label)

    def check(self, a) -> None:
        if (
            not isinstance(a, tuple)
            or len(a) != 2
            or len(a[0]) != self.n
            or len(a[1]) != self.n
        ):
            raise GroupError(f"not an SAut(F_{self.n}) element")

    def validate(self, a) -> None:
        self.check(a)
        for img in a[0] + a[1]:
            if reduce_word(img) != img:
                raise GroupError("image word is not freely reduced")
        if tuple(substitute(w, a[0]) for w in a[1]) != self.identity[0]:
            raise GroupError("stored inverse does not invert the automorphism")
        if tuple(substitute(w, a[1]) for w in a[0]) != self.identity[0]:
            raise GroupError("stored inverse does not invert the automorphism")

    def _mul(self, a, b):
        imgs = tuple(substitute(w, a[0]) for w in b[0])
        invs = tuple(substitute(w, b[1]) for w in a[1])
        return (imgs, invs)

    def _inv(self, a):
        return (a[1], a[0])

    def key(self, a):
        return a[0]

    def serialize(self, a) -> str:
        return "|".join(".".join(str(x) for x in w) for w in a[0])

    def deserialize(self, text: str):
        imgs = tuple(tuple(int(x) for x in w.split(".") if x) for w in text.split("|"))
        if len(imgs) != self.n:
            raise GroupError("wrong number of images")
        inv = self._invert_images(imgs)
        a = (imgs, inv)
        self.validate(a)
        return a

    def _invert_images(self, imgs):
        # express the automorphism as a product of generators by Nielsen
        # reduction is heavy; recover the inverse by breadth-first search over
        # short words instead, which suffices for serialized elements of balls
        target = imgs
        if target == self.identity[0]:
            return self.identity[1]
        frontier = {self.identity: ()}
        seen = {self.identity[0]}
        for _ in range(12):
            nxt = {}
            for el in frontier:
                for s in self.generators:
                    x = self._mul(el, s)
                    if x[0] in seen:
                        continue
                    if x[0] == target:
                        return x[1]
                    seen.add(x[0])
                    nxt[x] = None
            frontier = nxt
            if len(seen) > 2_000_000:
                break
        raise GroupError("could not invert serialized automorphism")

    # -- symmetry -------------------------------------------------------------
    def signed_permutations(self) -> list[SignedPermutation]:
        if self._signed_perms is None:
            self._signed_perms = [
                SignedPermutation(p, s)
                for p in itertools.permutations(range(self.n))
                for s in itertools.product((1, -1), repeat=self.n)
            ]
        return self._signed_perms

    def as_element(self, sp: SignedPermutation) -> tuple:
        imgs = tuple((s * (p + 1),) for p, s in zip(sp.perm, sp.signs))
        inv = sp.inverse()
        invs = tuple((s * (p + 1),) for p, s in zip(inv.perm, inv.signs))
        return (imgs, invs)

    def normalizer_seed(self) -> list:
        return [self.as_element(sp) for sp in self.signed_permutations() if sp.det == 1]

    def automorphism_generators(self) -> list[tuple[str, Callable]]:
        gens = []
        n = self.n
        for k in range(n - 1):
            p = list(range(n))
            p[k], p[k + 1] = p[k + 1], p[k]
            sp = SignedPermutation(tuple(p), (1,) * n)
            gens.append((f"conj(swap{k + 1}{k + 2})", self._conjugator(sp)))
        sp = SignedPermutation(tuple(range(n)), (-1,) + (1,) * (n - 1))
        gens.append(("conj(flip1)", self._conjugator(sp)))
        return gens

    def _conjugator(self, sp: SignedPermutation):
        el = self.as_element(sp)
        eli = self._inv(el)
        return lambda x: self._mul(self._mul(el, x), eli)

    @staticmethod
    def _right_min(imgs: tuple, det: int) -> tuple:
        """Least image tuple in imgs o (signed perms of the given det), with that perm."""
        n = len(imgs)
        cands = []
        for j, w in enumerate(imgs):
            wi = invert_word(w)
            if wi < w:
                cands.append((wi, j, -1))
            else:
                cands.append((w, j, 1))
        cands.sort()
        sp = SignedPermutation(tuple(c[1] for c in cands), tuple(c[2] for c in cands))
        out = [c[0] for c in cands]
        if sp.det != det:
            # flipping the last word changes the tuple as late as possible
            out[-1] = invert_word(out[-1])
            sp = SignedPermutation(sp.perm, sp.signs[:-1] + (-sp.signs[-1],))
        return tuple(out), sp

    def fast_orbit_min(self, g, kind: str):
        if kind == "point":
            _, r = self._right_min(g[0], 1)
            return self._mul(g, self.as_element(r))
        if kind == "point-distance":
            lefts = [sp for sp in self.signed_permutations() if sp.det == 1]
        elif kind == "distance":
            lefts = self.signed_permutations()
        else:
            return None
        best = None
        for sp in lefts:
            lm = sp.letter_map()
            # conjugation by sp leaves a right factor in the coset of det(sp)
            det = sp.det if kind == "distance" else 1
            for base in (g, self._inv(g)):
                relabeled = tuple(tuple(lm[x] for x in w) for w in base[0])
                cand, r = self._right_min(relabeled, det)
                if best is None or cand < best[0]:
                    best = (cand, sp, base, r)
        _, sp, base, r = best
        out = self._mul(self._mul(self.as_element(sp), base), self.as_element(r))
        return out


# ---------------------------------------------------------------------------


FAMILIES = {
    "SL": SLEngine,
    "Steinberg": SLEngine,
    "Heisenberg": HeisenbergEngine,
    "Heisenberg3": HeisenbergEngine,
    "FreeAbelian": FreeAbelianEngine,
    "Z": FreeAbelianEngine,
    "SAut": SAutEngine,
}


def make_engine(family: str, n: int | None = None) -> GroupEngine:
    """Build an engine by family name.  ``Steinberg`` resolves to the SL engine."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise GroupError(f"unknown group family {family!r}") from None
    if n is None:
        n = {"SL": 3, "Steinberg": 3, "SAut": 4, "Z": 1, "FreeAbelian": 1}.get(family, 3)
    return cls(n)


# ---------------------------------------------------------------------------
# Balls in the Cayley graph


@dataclass
class CayleyBall:
    engine: GroupEngine
    radius: int
    elements: list = field(default_factory=list)
    length: dict = field(default_factory=dict)
    word: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.length

    def sphere(self, r: int) -> list:
        return [x for x in self.elements if self.length[x] == r]


def cayley_ball(engine: GroupEngine, radius: int, cap: int = DEFAULT_BALL_CAP) -> CayleyBall:
    """Breadth-first ball; ``word[x]`` lists generator indices with x = s_1 s_2 ... s_m."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    e = engine.identity
    out = CayleyBall(engine, radius)
    out.length[e] = 0
    out.word[e] = ()
    layer = [e]
    for r in range(1, radius + 1):
        nxt = []
        for x in layer:
            wx = out.word[x]
            for idx, s in enumerate(engine.generators):
                y = engine._mul(x, s)
                if y in out.length:
                    continue
                out.length[y] = r
                out.word[y] = wx + (idx,)
                nxt.append(y)
                if len(out.length) > cap:
                    raise ResourceLimitError(f"ball exceeds {cap} elements")
        layer = nxt
    out.elements = sorted(out.length, key=lambda x: (out.length[x], engine.key(x)))
    return out


def ball(engine: GroupEngine, radius: int, cap: int = DEFAULT_BALL_CAP) -> list:
    return cayley_ball(engine, radius, cap).elements
