import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfiquench.errors import InvalidArgumentError
from qfiquench.pfaffian import leading_pfaffians, pfaffian, toeplitz_leading_dets


def random_skew(rng, n, complex_=False):
    a = rng.normal(size=(n, n))
    if complex_:
        a = a + 1j * rng.normal(size=(n, n))
    return a - a.T


def test_two_by_two():
    assert np.isclose(pfaffian(np.array([[0.0, 2.5], [-2.5, 0.0]])), 2.5)


def test_four_by_four_expansion():
    a, b, c, d, e, f = 1.3, -0.7, 2.1, 0.4, 1.9, -1.1
    m = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
    assert np.isclose(pfaffian(m), a * f - b * e + c * d)


def test_empty_matrix():
    assert pfaffian(np.zeros((0, 0))) == 1.0


def test_square_equals_det(rng):
    m = random_skew(rng, 10)
    assert np.isclose(pfaffian(m) ** 2, np.linalg.det(m), rtol=1e-8)


def test_complex_square_equals_det(rng):
    m = random_skew(rng, 8, complex_=True)
    assert np.isclose(pfaffian(m) ** 2, np.linalg.det(m), rtol=1e-8)


def test_zero_column_gives_zero():
    m = np.zeros((4, 4))
    m[2, 3], m[3, 2] = 1.0, -1.0
    assert pfaffian(m) == 0.0


@pytest.mark.parametrize("m", [np.zeros((3, 3)), np.ones((4, 4)), np.zeros((2, 3))])
def test_rejects_bad_input(m):
    with pytest.raises(InvalidArgumentError):
        pfaffian(m)


def test_leading_pfaffians_match_blocks(rng):
    m = random_skew(rng, 12)
    out = leading_pfaffians(m)
    ref = [pfaffian(m[: 2 * j, : 2 * j]) for j in range(1, 7)]
    assert np.allclose(out, ref)


def test_leading_pfaffians_small_pivot(rng):
    m = random_skew(rng, 8)
    m[0, 1], m[1, 0] = 0.0, 0.0
    out = leading_pfaffians(m)
    ref = [pfaffian(m[: 2 * j, : 2 * j]) for j in range(1, 5)]
    assert np.allclose(out, ref)


def test_toeplitz_dets(rng):
    from scipy.linalg import toeplitz

    c = rng.normal(size=9)
    r = rng.normal(size=9)
    r[0] = c[0] = 2.0
    full = toeplitz(c, r)
    ref = [np.linalg.det(full[:n, :n]) for n in range(1, 10)]
    assert np.allclose(toeplitz_leading_dets(c, r), ref)


def test_toeplitz_breakdown_negligible():
    # vanishing first entry with an all-zero upper band: every minor is zero
    c = np.array([0.0, 1.0, 0.5, 0.2] + [0.0] * 80)
    r = np.zeros_like(c)
    out = toeplitz_leading_dets(c, r)
    assert np.allclose(out, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
def test_property_pf_squared(n, seed):
    m = random_skew(np.random.default_rng(seed), 2 * n)
    assert np.isclose(pfaffian(m) ** 2, np.linalg.det(m), rtol=1e-7, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31 - 1))
def test_property_congruence(n, seed):
    # Pf(B M B^T) = det(B) Pf(M)
    rng = np.random.default_rng(seed)
    m = random_skew(rng, 2 * n)
    b = rng.normal(size=(2 * n, 2 * n))
    assert np.isclose(pfaffian(b @ m @ b.T), np.linalg.det(b) * pfaffian(m), rtol=1e-6, atol=1e-9)
