from fractions import Fraction

import pytest

from kazhdan import (
    BuilderError,
    assemble,
    ball,
    build_class_table,
    build_support,
    convolve,
    eliminate_interior,
    element,
    laplacian,
    make_engine,
    solve,
    strict_feasibility_witnesses,
)
from kazhdan.algebra import AlgebraElement
from kazhdan.builder import aggregate, pair_vector

NINETEEN = ["1", "e", "f", "g", "fbar", "e*", "ebar*", "e f", "e* f", "f g", "e gbar", "ebar fbar",
            "fbar gbar", "fbar gbar*", "fbar e", "f gbar", "g fbar", "gbar ebar", "f ebar*"]


def test_z_ball1_problem(zz):
    p = assemble(zz, ball(zz, 1))
    assert p.block_dims == [2]
    assert p.n_rows == 1
    assert p.c == [2]
    # eps = 4 - l11 - l22 - 2 l12, forced l12 = 1
    assert p.value([1, 1, 1]) == 0
    assert p.value([2, 1, 2]) == -2


def test_z_brute_force_max_is_zero(zz):
    p = assemble(zz, ball(zz, 1))
    best = max(
        p.value([a, 1, d]) for a in [Fraction(k, 4) for k in range(0, 13)] for d in [Fraction(k, 4) for k in range(0, 13)]
        if a * d >= 1
    )
    assert best == 0


def test_nineteen_point_set(sl3):
    E = build_support(sl3, elements=NINETEEN)
    assert len(E) == 19
    p = assemble(sl3, E, "class", objective={"e f": 1, "e g": 1}, target=4)
    assert p.n_rows == 10
    assert p.block_dims == [18]


@pytest.mark.parametrize("family,radius", [("SL", 2), ("Heisenberg", 2), ("Z", 3)])
def test_phi_of_feasible_point_is_laplacian_identity(family, radius):
    # the strict primal witness is an exact rational feasible point
    g = make_engine(family, 3 if family == "SL" else 1)
    p = assemble(g, ball(g, radius))
    z = strict_feasibility_witnesses(p).primal
    eps = p.offset + sum(b * v for b, v in zip(p.b, z))
    lap = laplacian(g)
    sq, one = aggregate(p.table, convolve(lap, lap)), aggregate(p.table, lap)
    ident = p.table.identity_class
    want = {k: sq.get(k, 0) - eps * one.get(k, 0) for k in set(sq) | set(one) if k != ident}
    assert p.phi(z) == {k: v for k, v in want.items() if v}


def test_pair_vectors_have_augmentation_zero(sl3):
    t = build_class_table(sl3, ball(sl3, 1), "point+distance")
    for a in t.point_reps:
        for b in t.point_reps:
            assert sum(pair_vector(t, a, b, sl3.identity).values()) == 0
    lap = laplacian(sl3)
    assert sum(aggregate(t, convolve(lap, lap)).values()) == 0


def test_columns_sum_to_zero_under_augmentation(heis):
    E = ball(heis, 1)
    t = build_class_table(heis, E, "none")
    one = AlgebraElement.one(heis)
    for a in E:
        for b in E:
            qa = AlgebraElement.basis(heis, a) - one
            qb = AlgebraElement.basis(heis, b) - one
            assert sum(aggregate(t, convolve(qa.star(), qb)).values()) == 0


def test_extra_square_adds_scalar_column(sl3):
    E = build_support(sl3, elements=NINETEEN)
    q = element(sl3, {"e": 1, "e*": 1, "fbar": 1, "fbar*": 1, "g": 1, "g*": 1,
                      "ebar": -1, "ebar*": -1, "f": -1, "f*": -1, "gbar": -1, "gbar*": -1})
    p = assemble(sl3, E, "class", objective={"e f": 1, "e g": 1}, target=4, extra=[q])
    assert p.n_scalar == 1
    assert p.columns[-1] == ("scalar", 0)


def test_epsilon_mode_needs_generators(sl3):
    with pytest.raises(BuilderError):
        assemble(sl3, build_support(sl3, elements=["1", "e"]))


def test_level_none_identity_is_literal(zz):
    p = assemble(zz, ball(zz, 2), level="none")
    assert p.level == "none"
    s = solve(p)
    assert abs(s.primal_objective) < 1e-6


def test_eliminate_interior_matches_full(zz):
    E = ball(zz, 2)
    full = assemble(zz, E, "class", objective={"t t": 1})
    elim = eliminate_interior(zz, E, 2, objective={"t t": 1})
    assert elim.n_cols <= full.n_cols
    a, b = solve(full), solve(elim)
    assert abs(a.primal_objective - b.primal_objective) < 1e-4


def test_eliminate_interior_needs_ball(zz):
    with pytest.raises(BuilderError):
        eliminate_interior(zz, build_support(zz, elements=["1", "t"]), 1)


def test_json_is_deterministic(heis):
    a = assemble(heis, ball(heis, 2)).dumps()
    b = assemble(heis, ball(heis, 2)).dumps()
    assert a == b
