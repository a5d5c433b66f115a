"""The ten acceptance criteria, each at its stated tolerance.

Every criterion records one PASS/FAIL line; the lines are printed in the
pytest terminal summary and when this file is run as a script.
"""

import math
import os
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from kazhdan import (
    AlgebraElement,
    Certificate,
    assemble,
    ball,
    bound_problem,
    build_class_table,
    build_support,
    cayley_ball,
    certify,
    correct_element,
    element,
    flat_arrangement,
    flat_objective,
    gap_report,
    harper_curves,
    harper_sdp_bound,
    make_engine,
    solve,
    strict_feasibility_witnesses,
    verify,
)
from kazhdan.harper import THETA, improved_square, literature_bound, truncated_norm

RESULTS: dict = {}

NINETEEN = ["1", "e", "f", "g", "fbar", "e*", "ebar*", "e f", "e* f", "f g", "e gbar", "ebar fbar",
            "fbar gbar", "fbar gbar*", "fbar e", "f gbar", "g fbar", "gbar ebar", "f ebar*"]


class Criterion:
    def __init__(self, number: int, title: str) -> None:
        self.number, self.title = number, title
        self.details: list = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        if exc_type is pytest.skip.Exception:
            status = "SKIP"
        extra = "; ".join(self.details)
        if exc_type is not None and exc_type is not pytest.skip.Exception:
            extra = (extra + "; " if extra else "") + f"{exc_type.__name__}: {exc}"
        line = f"acceptance {self.number:2d} {status}: {self.title} ({time.time() - self.t0:.1f}s) {extra}"
        RESULTS[self.number] = line
        print(line)
        return False


# ---------------------------------------------------------------------------


def test_criterion_01_z_baseline():
    with Criterion(1, "Z end-to-end gives epsilon 0 and a flagged certificate") as c:
        t0 = time.time()
        z = make_engine("Z", 1)
        p = assemble(z, ball(z, 1))
        s = solve(p)
        cert = certify(p, s)
        res = verify(cert)
        elapsed = time.time() - t0
        c.note(f"solver eps {s.primal_objective:.2e}, certified eps' {cert.epsilon}")
        assert abs(s.primal_objective) <= 1e-6
        assert res.identity_holds and not res.accepted and cert.epsilon <= 0
        # brute force over the 2x2 block [[a, 1], [1, d]]: the row forces the off-diagonal to 1
        grid = [Fraction(k, 8) for k in range(0, 41)]
        best = max(p.value([a, 1, d]) for a in grid for d in grid if a * d >= 1)
        assert best == 0
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_02_heisenberg():
    with Criterion(2, "Heisenberg flat duals are exact with objective -2|S|; solver eps <= 1e-5") as c:
        h = make_engine("Heisenberg")
        nS = len(h.generators)
        t0 = time.time()
        for r in (1, 2, 3):
            fc = flat_arrangement(h, ball(h, r))
            assert fc.objective == -2 * nS and fc.arrangement.exact_objective() == -2 * nS
            assert fc.dual_value == 0
        flat_time = time.time() - t0
        eps = []
        for r in (1, 2, 3):
            s = solve(assemble(h, ball(h, r)))
            eps.append(s.primal_objective)
        c.note(f"flat duals {flat_time:.1f}s, solver eps {[f'{e:.1e}' for e in eps]}")
        assert max(eps) <= 1e-5
        assert flat_time < 60


def test_criterion_03_observation_one():
    with Criterion(3, "max |alpha(ef)|^2 on {1,e,f,g,fg} is the top root of 2x^3-2x^2-4x+1") as c:
        t0 = time.time()
        sl = make_engine("SL", 3)
        E = build_support(sl, elements=["1", "e", "f", "g", "f g"])
        p = bound_problem(sl, E, "e f")
        got = p.bound_from_value(solve(p).primal_objective)
        root = max(r.real for r in np.roots([2, -2, -4, 1]) if abs(r.imag) < 1e-12)
        elapsed = time.time() - t0
        c.note(f"bound {got:.7f}, root {root:.7f}")
        assert abs(got - root) <= 1e-4
        assert round(got, 2) == 1.91
        assert elapsed < 10


def test_criterion_04_observation_one_pinned():
    with Criterion(4, "pinned [ef]=v gives max |alpha(eg)|^2 <= 1 + v sqrt(2)/2") as c:
        sl = make_engine("SL", 3)
        E = build_support(sl, elements=["1", "e", "ebar", "f", "e f", "f ebar"])
        for v in (Fraction(1), Fraction(3, 2), Fraction(19, 10)):
            p = bound_problem(sl, E, "e g", fixed={"e f": v})
            got = p.bound_from_value(solve(p).primal_objective)
            lim = 1 + math.sqrt(2) / 2 * float(v)
            c.note(f"v={float(v)}: {got:.8f}, excess over 1+v/sqrt2 {got - lim:.1e}")
            assert got <= lim + 1e-6


def test_criterion_05_nineteen_points():
    with Criterion(5, "nineteen-point certificate that |alpha(ef)|^2+|alpha(eg)|^2 < 4") as c:
        t0 = time.time()
        sl = make_engine("SL", 3)
        E = build_support(sl, elements=NINETEEN)
        q = element(sl, {"e": 1, "e*": 1, "fbar": 1, "fbar*": 1, "g": 1, "g*": 1,
                         "ebar": -1, "ebar*": -1, "f": -1, "f*": -1, "gbar": -1, "gbar*": -1})
        p = assemble(sl, E, "class", objective={"e f": 1, "e g": 1}, target=4, extra=[q])
        assert len(E) == 19 and p.n_rows == 10
        cert = certify(p, solve(p))
        res = verify(Certificate.loads(cert.dumps()))
        elapsed = time.time() - t0
        c.note(f"bound {float(cert.bound):.6f}, margin {res.value}")
        assert res.accepted and isinstance(res.value, Fraction) and res.value > 0
        assert elapsed < 600


def test_criterion_06_strong_duality():
    with Criterion(6, "strict witnesses validate exactly; primal and dual values agree within 1e-5") as c:
        cases = [("Z", 1, 1), ("Z", 1, 2), ("Heisenberg", None, 2), ("SL", 3, 1)]
        for family, n, r in cases:
            g = make_engine(family, n)
            p = assemble(g, ball(g, r))
            w = strict_feasibility_witnesses(p)
            assert w.min_pivot > 0
            s = solve(p)
            rep = gap_report(p, s)
            c.note(f"{family} ball({r}): witness value {w.primal_value}, |P-D| "
                   f"{abs(s.primal_objective - s.dual_objective):.1e}")
            assert abs(s.primal_objective - s.dual_objective) <= 1e-5
            assert rep.weak_duality_ok


def _mutate(cert: Certificate, rng: random.Random) -> tuple[str, Certificate]:
    m = Certificate.loads(cert.dumps())
    e = m.engine

    def delta():
        while True:
            d = Fraction(rng.randint(-50, 50), rng.randint(1, 64))
            if d:
                return d

    kinds = ["square-weight", "square-coefficient", "drop-square", "duplicate-square", "negate-weight",
             "extra-square", "scale-weights", "tau", "objective", "target"]
    if m.corrections:
        kinds.append("correction-weight")
    kind = rng.choice(kinds)
    live = [i for i, (w, q) in enumerate(m.squares) if w and q]
    i = rng.choice(live)
    w, q = m.squares[i]
    if kind == "square-weight":
        d = delta()
        while w + d < 0:
            d = abs(d)
        m.squares[i] = (w + d, q)
    elif kind == "square-coefficient":
        g = rng.choice([x for x in q.coeffs if x != e.identity])
        d = delta()
        if d == q[e.identity] - q[g]:
            d *= 2
        m.squares[i] = (w, q + AlgebraElement.from_terms(e, [(g, d), (e.identity, -d)]))
    elif kind == "drop-square":
        del m.squares[i]
    elif kind == "duplicate-square":
        m.squares.append((w, q))
    elif kind == "negate-weight":
        m.squares[i] = (-w, q)
    elif kind == "extra-square":
        g = rng.choice(ball(e, 2)[1:])
        m.squares.append((Fraction(rng.randint(1, 9), rng.randint(1, 9)),
                          AlgebraElement.from_terms(e, [(g, 1), (e.identity, -1)])))
    elif kind == "scale-weights":
        f = 1 + Fraction(rng.randint(1, 99), 1000) * rng.choice([-1, 1])
        m.squares = [(wt * f, qq) for wt, qq in m.squares]
    elif kind == "tau":
        m.tau = m.tau + delta()
    elif kind == "objective":
        j = rng.randrange(len(m.objective))
        g, wt = m.objective[j]
        m.objective[j] = (g, wt + delta())
    elif kind == "target":
        m.target = m.bound - Fraction(rng.randint(0, 100), rng.randint(1, 100))
    elif kind == "correction-weight":
        j = rng.randrange(len(m.corrections))
        m.corrections[j].weight = m.corrections[j].weight + delta()
    return kind, m


def test_criterion_07_certifier_soundness(obs1_certificate):
    with Criterion(7, "1000 certificate mutations rejected; Z correction M = 1/2") as c:
        assert verify(obs1_certificate).accepted
        rng = random.Random(2026)
        counts: dict = {}
        unreadable = 0
        for _ in range(1000):
            kind, mutated = _mutate(obs1_certificate, rng)
            counts[kind] = counts.get(kind, 0) + 1
            # a mutant is judged only through its serialized form, as a third party would
            try:
                mutated = Certificate.loads(mutated.dumps())
            except ValueError:
                unreadable += 1  # the verify command rejects unreadable files
                continue
            assert not verify(mutated).accepted, f"mutation {kind} was accepted"
        c.note("mutations " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
               + f"; {unreadable} rejected at parse time")

        z = make_engine("Z", 1)
        x = element(z, {"t t": 1, "t^-1 t^-1": 1, "1": -2})
        M, corr = correct_element(z, x)
        q = element(z, {"1": 2, "t": -1, "t t": -1})
        assert M == Fraction(1, 2) and len(corr) == 1 and corr[0].weight == Fraction(1, 2)
        sq = corr[0].element.star() * corr[0].element
        assert sq == q.star() * q == element(z, {"1": 6, "t": -1, "t^-1": -1, "t t": -2, "t^-1 t^-1": -2})
        lap = element(z, {"1": 2, "t": -1, "t^-1": -1})
        assert x + sq.scale(Fraction(1, 2)) == lap.scale(Fraction(1, 2))


def test_criterion_08_weighted_split():
    with Criterion(8, "weighted split M <= classic M on 100 residuals in ball(6), strictly in >= 50%") as c:
        sl = make_engine("SL", 3)
        B = cayley_ball(sl, 6)
        rng = random.Random(1)
        better = worse = 0
        for _ in range(100):
            terms: dict = {}
            for _ in range(8):
                g = rng.choice(B.elements)
                terms[g] = terms.get(g, 0) + Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            terms[sl.identity] = terms.get(sl.identity, 0) - sum(terms.values())
            x = AlgebraElement(sl, terms)
            x = x + x.star()
            words = {g: B.word[g] for g in list(x.coeffs) + [sl.identity]}
            mc, _ = correct_element(sl, x, words=words, strategy="classic")
            mw, _ = correct_element(sl, x, words=words, strategy="weighted")
            better += mw < mc
            worse += mw > mc
        c.note(f"strictly better {better}/100, worse {worse}/100")
        assert worse == 0 and better >= 50


def test_criterion_09_harper():
    with Criterion(9, "Harper bounds: improvement on [0.03, 0.11], truncated norms below the known bound") as c:
        grid = np.linspace(0.03, 0.11, 81)
        curve = harper_curves(grid, window=2048)
        assert all(b < a for a, b in zip(curve.literature, curve.improved))
        lo, hi = curve.interval
        c.note(f"interval ({lo:.4f}, {hi:.4f})")
        worst = max(truncated_norm(0.05 * k, 2048) - literature_bound(0.05 * k) for k in range(1, 10))
        c.note(f"max truncated - known {worst:.2e}")
        assert worst <= 1e-6
        b = harper_sdp_bound(improved_square())
        cos = sympy.cos(2 * sympy.pi * THETA)
        assert sympy.simplify(b.bound - (44 - 40 * cos) / (13 - 12 * cos)) == 0


SAUT_TERMS = [
    # (word after E(f1,f2), coefficient in the S-flat equation at n = 4)
    ("E(f1,f2)", 1),
    ("E(f1^-1,f2)", 1),
    ("E(f1^-1,f2^-1)", 1),
    ("E(f2^-1,f1)", 1),
    ("E(f2,f1)", 2),
    ("E(f2,f3)", 2 * 2 * 2),
    ("E(f3,f1)", 2 * 2 * 2),
    ("E(f1,f3)", 2 * 2),
    ("E(f3,f2)", 2 * 2),
    ("E(f1^-1,f3)", 2 * 2),
    ("E(f3,f2^-1)", 2 * 2),
    ("E(f3,f4)", 4 * 2 * 1),
]


def test_criterion_10_saut_builder():
    with Criterion(10, "SAut(F_4) S-flat objective matches term by term") as c:
        n = 4
        g = make_engine("SAut", n)
        assert len(g.generators) == 4 * n * (n - 1)
        table = build_class_table(g, ball(g, 1), "point+distance")
        s0 = g.generator("E(f1,f2)")
        mult, const = flat_objective(g, table, s0)
        assert const == 8 * n * (n - 1) == 96
        seen = set()
        for word, coef in SAUT_TERMS:
            cid = table.classify(g.mul(s0, g.generator(word)))
            assert cid not in seen, f"{word} shares a class with an earlier term"
            seen.add(cid)
            assert mult.get(cid) == coef, f"[E(f1,f2) {word}]: {mult.get(cid)} != {coef}"
        # the remaining two terms: s0 s0^-1 = 1 (coefficient zero) and one product landing in S
        rest = {cid: k for cid, k in mult.items() if cid not in seen}
        gen_class = table.classify(s0)
        assert rest == {table.identity_class: 1, gen_class: 1}
        assert sum(mult.values()) == len(g.generators)
        c.note(f"[E12 E34] coefficient {mult[table.classify(g.mul(s0, g.generator('E(f3,f4)')))]}, constant {const}")


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("KAZHDAN_EXTENDED"), reason="extended run; set KAZHDAN_EXTENDED=1")
def test_criterion_10_extended_saut_run():
    g = make_engine("SAut", 4)
    E = ball(g, 2)
    p = assemble(g, E)
    cert = certify(p, solve(p))
    res = verify(cert)
    print(f"acceptance 10 extended: accepted={res.accepted}, epsilon'={res.value}")
    assert res.accepted and res.value > 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
