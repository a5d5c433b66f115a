import random
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kazhdan import (
    AlgebraElement,
    Certificate,
    CertificationError,
    assemble,
    ball,
    certify,
    convolve,
    correct_element,
    element,
    laplacian,
    linalg,
    make_engine,
    residual,
    round_to_rational_psd,
    solve,
    verify,
)

from oracles import dense_poly_square


def test_rounding_keeps_exact_psd():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    r = round_to_rational_psd([m])
    assert r.mats[0] == m and r.shifts == [0]


def test_rounding_small_negative_eigenvalue():
    q = np.linalg.qr(np.random.default_rng(1).standard_normal((4, 4)))[0]
    m = q @ np.diag([1.0, 0.5, 0.2, -1e-9]) @ q.T
    r = round_to_rational_psd([m])
    assert linalg.is_psd_exact(r.mats[0])
    assert 0 <= r.shifts[0] < Fraction(1, 10**6)


def test_rounding_respects_max_shift():
    # a rank-deficient float matrix needs a positive shift once rationalized
    v = np.random.default_rng(0).standard_normal((6, 2))
    m = v @ v.T
    assert round_to_rational_psd([m]).shifts[0] > 0
    with pytest.raises(CertificationError):
        round_to_rational_psd([m], max_shift=Fraction(1, 2**40))


def test_z_optimum_gives_rank_one_square(zz):
    p = assemble(zz, ball(zz, 1))
    cert = certify(p, SimpleNamespace(z=[1.0, 1.0, 1.0], primal_objective=0.0))
    assert len(cert.squares) == 1
    w, q = cert.squares[0]
    t, ti = zz.generator("t"), zz.generator("t^-1")
    assert q.scale(1 / q[t]) == AlgebraElement.from_terms(zz, [(t, 1), (ti, 1), (zz.identity, -2)])
    assert cert.epsilon == 0 and cert.M == 0
    res = verify(cert)
    assert res.identity_holds and not res.accepted


def test_residual_zero_for_exact_optimum(zz):
    p = assemble(zz, ball(zz, 1))
    r = residual(p, [1, 1, 1])
    assert r.x == {} and r.claimed == 0
    # perturbing the off-diagonal entry moves only the [t^2] class
    r = residual(p, [1, Fraction(1001, 1000), 1])
    t2 = p.table.classify(zz.word("t t"))
    assert set(r.x) == {t2}


def test_z_square_expansion(zz):
    q = element(zz, {"1": 2, "t": -1, "t t": -1})
    sq = convolve(q.star(), q)
    want = dense_poly_square({0: 2, 1: -1, 2: -1})
    assert {zz_exp(g): v for g, v in sq.coeffs.items()} == want


def zz_exp(g):
    return g[0]


def test_order_unit_correction_on_z(zz):
    x = element(zz, {"t t": 1, "t^-1 t^-1": 1, "1": -2})
    M, corr = correct_element(zz, x)
    assert M == Fraction(1, 2)
    assert len(corr) == 1
    c = corr[0]
    assert c.weight == Fraction(1, 2)
    q = element(zz, {"1": 2, "t": -1, "t t": -1})
    assert convolve(c.element.star(), c.element) == convolve(q.star(), q)
    lhs = x + convolve(c.element.star(), c.element).scale(c.weight)
    assert lhs == laplacian(zz).scale(M)


def test_zero_residual_needs_no_correction(sl3):
    M, corr = correct_element(sl3, AlgebraElement.zero(sl3))
    assert M == 0 and corr == []


def test_square_minus_its_expansion_needs_no_correction(heis):
    g = heis.word("e g")
    q = element(heis, {"1": 1, "e g": -1})
    expansion = AlgebraElement.from_terms(heis, [(heis.identity, 2), (g, -1), (heis.inv(g), -1)])
    M, corr = correct_element(heis, convolve(q.star(), q) - expansion)
    assert M == 0 and corr == []


def test_augmentation_required(zz):
    with pytest.raises(ValueError):
        correct_element(zz, element(zz, {"t": 1}))


SL3 = make_engine("SL", 3)
SUPPORT = ball(SL3, 2)


@st.composite
def residuals(draw):
    terms = {}
    for _ in range(draw(st.integers(1, 5))):
        g = draw(st.sampled_from(SUPPORT))
        terms[g] = terms.get(g, 0) + Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 3)))
    terms[SL3.identity] = terms.get(SL3.identity, 0) - sum(terms.values())
    x = AlgebraElement(SL3, terms)
    return x + x.star()


@settings(max_examples=40, deadline=None)
@given(residuals(), st.sampled_from(["classic", "weighted"]))
def test_correction_identity_holds(x, strategy):
    M, corr = correct_element(SL3, x, strategy=strategy)
    total = x
    for c in corr:
        assert c.weight >= 0
        total = total + convolve(c.element.star(), c.element).scale(c.weight)
    assert total == laplacian(SL3).scale(M)


@settings(max_examples=25, deadline=None)
@given(residuals(), st.integers(0, 6))
def test_classic_correction_is_homogeneous(x, k):
    M1, _ = correct_element(SL3, x, strategy="classic")
    Mk, _ = correct_element(SL3, x.scale(k), strategy="classic")
    assert Mk == k * M1


def test_obs1_certificate_roundtrip(obs1_certificate):
    cert = obs1_certificate
    res = verify(cert)
    assert res.accepted and res.value > 0
    back = Certificate.loads(cert.dumps())
    assert verify(back).accepted
    assert back.dumps() == cert.dumps()


def test_verify_rejects_flipped_correction(obs1_certificate):
    cert = Certificate.loads(obs1_certificate.dumps())
    if not cert.corrections:
        pytest.skip("no corrections to flip")
    cert.corrections[0].weight = -cert.corrections[0].weight
    assert not verify(cert).accepted


def test_verify_rejects_numerator_bump(obs1_certificate):
    cert = Certificate.loads(obs1_certificate.dumps())
    w, q = cert.squares[0]
    g = next(iter(q.coeffs))
    q2 = q + AlgebraElement.from_terms(q.engine, [(g, Fraction(1, q[g].denominator)),
                                                  (q.engine.identity, -Fraction(1, q[g].denominator))])
    cert.squares[0] = (w, q2)
    assert not verify(cert).accepted


def test_verify_rejects_float_text(obs1_certificate):
    data = obs1_certificate.to_json()
    data["tau"] = "0.5"
    with pytest.raises(ValueError):
        Certificate.from_json(data)


def test_corrupted_solution_never_certifies(sl3):
    p = assemble(sl3, ball(sl3, 1))
    s = solve(p)
    z = np.array(s.z)
    z[1] = 0.0
    try:
        cert = certify(p, SimpleNamespace(z=z, primal_objective=s.primal_objective))
    except CertificationError:
        return
    assert not verify(cert).accepted
