from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kazhdan import linalg


@st.composite
def psd_matrices(draw):
    n = draw(st.integers(1, 6))
    k = draw(st.integers(0, n))
    B = [[Fraction(draw(st.integers(-4, 4))) for _ in range(n)] for _ in range(k)]
    return [[sum((B[r][i] * B[r][j] for r in range(k)), Fraction(0)) for j in range(n)] for i in range(n)]


@settings(max_examples=80, deadline=None)
@given(psd_matrices())
def test_ldl_reconstructs(a):
    perm, L, d = linalg.ldl_pivoted(a)
    n = len(a)
    assert all(v >= 0 for v in d)
    for i in range(n):
        for j in range(n):
            s = sum(L[i][k] * d[k] * L[j][k] for k in range(n))
            assert s == a[perm[i]][perm[j]]


@settings(max_examples=60, deadline=None)
@given(psd_matrices(), st.integers(0, 5))
def test_negative_direction_rejected(a, idx):
    n = len(a)
    i = idx % n
    a[i][i] -= sum(abs(v) for row in a for v in row) + 1
    assert not linalg.is_psd_exact(a)
    with pytest.raises(ValueError):
        linalg.ldl_pivoted(a)


def test_zero_pivot_with_offdiagonal():
    assert not linalg.is_psd_exact([[0, 1], [1, 0]])
    assert linalg.is_psd_exact([[0, 0], [0, 0]])


def test_inverse():
    a = linalg.to_fractions([[2, 1], [1, 1]])
    inv = linalg.inverse(a)
    assert np.allclose(np.array(inv, float) @ np.array(a, float), np.eye(2))
    assert inv == [[1, -1], [-1, 2]]
