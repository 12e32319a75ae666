from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from delaymsf.spectral import eigen_symmetric, eigvals_symmetric


def charpoly_roots(m):
    # Faddeev-LeVerrier in exact arithmetic, then roots of the polynomial
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        prev = [[mk[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        mk = [[sum(a[i][l] * prev[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(mk[i][i] for i in range(n)) / k)
    return np.sort(np.roots([float(c) for c in coeffs]).real)


def laplacian(w):
    return np.diag(w.sum(axis=1)) - w


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5).flatmap(
    lambda n: arrays(float, (n, n), elements=st.integers(0, 9).map(float))))
def test_matches_characteristic_polynomial(w):
    w = np.triu(w, 1)
    lap = laplacian(w + w.T)
    got = eigvals_symmetric(lap)
    expect = charpoly_roots(lap)
    scale = max(1.0, np.abs(expect).max())
    np.testing.assert_allclose(got, expect, atol=1e-8 * scale)


def test_unweighted_star():
    w = np.zeros((4, 4))
    w[0, 1:] = w[1:, 0] = 1.0
    np.testing.assert_allclose(eigvals_symmetric(laplacian(w)), [0, 1, 1, 4], atol=1e-14)


def test_ring_spectrum():
    n = 12
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i + 1) % n] = w[(i + 1) % n, i] = 1.0
    expect = np.sort(2 - 2 * np.cos(2 * np.pi * np.arange(n) / n))
    np.testing.assert_allclose(eigvals_symmetric(laplacian(w)), expect, atol=1e-12)


def test_eigenvectors_orthonormal_and_residual(rng):
    m = rng.normal(size=(30, 30))
    m = m + m.T
    spec = eigen_symmetric(m, vectors=True)
    v = spec.eigenvectors
    np.testing.assert_allclose(v.T @ v, np.eye(30), atol=1e-12)
    np.testing.assert_allclose(m @ v, v * spec.eigenvalues, atol=1e-11)
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_diagonal_and_one_by_one():
    np.testing.assert_array_equal(eigvals_symmetric(np.diag([3.0, -1.0, 2.0])), [-1, 2, 3])
    np.testing.assert_array_equal(eigvals_symmetric([[5.0]]), [5.0])


def test_spectrum_properties():
    w = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.0]])
    spec = eigen_symmetric(laplacian(w))
    assert spec.lambda_max == pytest.approx(3.0)
    assert spec.algebraic_connectivity == pytest.approx(1.0)


@pytest.mark.parametrize("m", [
    np.ones((2, 3)),
    np.array([[0.0, 1.0], [2.0, 0.0]]),
    np.array([[np.nan, 0.0], [0.0, 1.0]]),
])
def test_rejects_bad_input(m):
    with pytest.raises(ValueError):
        eigvals_symmetric(m)
