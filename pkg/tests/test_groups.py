import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kazhdan import GroupError, ResourceLimitError, ball, cayley_ball, make_engine
from kazhdan.groups import invert_word, reduce_word

ENGINES = [("Z", 1), ("Z", 3), ("Heisenberg", None), ("SL", 3), ("SL", 4), ("SAut", 3)]


def _words(n_gens, max_len=6):
    return st.lists(st.integers(0, n_gens - 1), max_size=max_len)


@pytest.mark.parametrize("family,n", ENGINES)
def test_group_axioms(family, n):
    g = make_engine(family, n)

    @settings(max_examples=40, deadline=None)
    @given(_words(len(g.generators)), _words(len(g.generators)), _words(len(g.generators)))
    def check(w1, w2, w3):
        a, b, c = (g.product(g.generators[i] for i in w) for w in (w1, w2, w3))
        assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))
        assert g.mul(a, g.inv(a)) == g.identity
        assert g.mul(g.identity, a) == a
        assert g.inv(g.mul(a, b)) == g.mul(g.inv(b), g.inv(a))

    check()


@pytest.mark.parametrize("family,n", ENGINES)
def test_generators_closed_under_inverse(family, n):
    g = make_engine(family, n)
    gens = set(g.generators)
    for s, j in zip(g.generators, g.inverse_index):
        assert g.inv(s) in gens
        assert g.generators[j] == g.inv(s)


def test_sl3_ball_sizes(sl3):
    assert len(ball(sl3, 1)) == 13
    assert len(ball(sl3, 2)) == 121


def test_z_and_z2_balls():
    assert len(ball(make_engine("Z", 1), 3)) == 7
    assert len(ball(make_engine("Z", 2), 2)) == 13


def test_heisenberg_commutator(heis):
    e, f, g = (heis.generator(x) for x in "efg")
    comm = heis.product([e, g, heis.inv(e), heis.inv(g)])
    assert comm in (f, heis.inv(f))
    for s in heis.generators:
        assert heis.mul(s, f) == heis.mul(f, s)


def test_heisenberg_normal_form(heis):
    e, g = heis.generator("e"), heis.generator("g")
    # e^a g^b f^c
    assert heis.power(e, 3) == (3, 0, 0)
    assert heis.mul(e, g) == (1, 1, 0)


def test_sl_matrices_have_det_one():
    g = make_engine("SL", 3)
    for x in ball(g, 2):
        g.validate(x)


def test_saut_generator_count():
    assert len(make_engine("SAut", 3).generators) == 4 * 3 * 2
    assert len(make_engine("SAut", 4).generators) == 48


def test_free_reduction():
    assert reduce_word([1, -1, 2]) == (2,)
    assert invert_word((1, 2)) == (-2, -1)


def test_serialize_roundtrip(sl3, heis):
    for g in (sl3, heis, make_engine("SAut", 3)):
        for x in ball(g, 2)[:40]:
            assert g.deserialize(g.serialize(x)) == x


def test_cayley_ball_words(sl3):
    b = cayley_ball(sl3, 2)
    for x in b.elements:
        assert sl3.product(sl3.generators[i] for i in b.word[x]) == x
        assert len(b.word[x]) == b.length[x]


def test_errors(sl3):
    with pytest.raises(GroupError):
        sl3.generator("nope")
    with pytest.raises(GroupError):
        sl3.check((1, 2, 3))
    with pytest.raises(ResourceLimitError):
        ball(sl3, 3, cap=100)
    with pytest.raises(Exception):
        make_engine("Monster", 1)
