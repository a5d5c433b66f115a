import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from kazhdan import element, harper_curves, harper_sdp_bound
from kazhdan.harper import THETA, improved_bound, improved_square, improvement_interval, literature_bound, truncated_norm


def dense_norm(theta, window):
    n = np.arange(-(window // 2), window - window // 2)
    H = np.diag(2 * np.cos(2 * np.pi * theta * n)) + np.eye(window, k=1) + np.eye(window, k=-1)
    return float(np.max(np.abs(np.linalg.eigvalsh(H))))


@pytest.mark.parametrize("theta", [0.1, 1 / 3, 0.27])
def test_truncated_norm_matches_dense(theta):
    assert truncated_norm(theta, 256) == pytest.approx(dense_norm(theta, 256), abs=1e-10)


def test_third_below_literature():
    assert truncated_norm(1 / 3, 2048) <= literature_bound(1 / 3) + 1e-6


def test_window_doubling_converges():
    assert abs(truncated_norm(0.1, 4096) - truncated_norm(0.1, 2048)) < 1e-6


def test_endpoint_values():
    assert improved_bound(0) == pytest.approx(4)
    assert literature_bound(0) == pytest.approx(4)
    assert literature_bound(0.3) == pytest.approx(2 * math.sqrt(2))


def test_interval():
    lo, hi = improvement_interval()
    assert lo < 0.03 and hi > 0.11
    assert lo == pytest.approx(0.025, abs=2e-3) and hi == pytest.approx(0.119, abs=2e-3)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.03, 0.11))
def test_improved_wins_on_interval(theta):
    assert improved_bound(theta) < literature_bound(theta)


def test_improved_square_bound_is_closed_form():
    b = harper_sdp_bound(improved_square())
    c = sympy.cos(2 * sympy.pi * THETA)
    assert sympy.simplify(b.bound - (44 - 40 * c) / (13 - 12 * c)) == 0
    assert b(0.07) == pytest.approx(improved_bound(0.07))


def test_trivial_square(heis):
    b = harper_sdp_bound(element(heis, {"1": 1, "e": -1}))
    assert b.bound == 4


def test_needs_heisenberg(zz):
    with pytest.raises(ValueError):
        harper_sdp_bound(element(zz, {"1": 1, "t": -1}))


def test_curves_csv():
    curve = harper_curves([0.05, 0.1, 0.2], window=256, threads=2)
    text = curve.to_csv()
    assert text.splitlines()[0].startswith("theta,literature,improved")
    assert "# interval,0.0247" in text
    with pytest.raises(ValueError):
        harper_curves([0.1], window=32)
