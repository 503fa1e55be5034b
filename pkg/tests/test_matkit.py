"""Characteristic polynomials, minors, and Aberth eigenvalues."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from obliquestab import matkit


def det_cofactor(m):
    """Reference determinant by direct cofactor expansion (oracle)."""
    m = np.asarray(m)
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = 0.0
    for j in range(n):
        sub = np.delete(m[1:], j, axis=1)
        total += (-1) ** j * m[0, j] * det_cofactor(sub)
    return total


def principal_minor_sums(m):
    """Reference r_i by enumerating every principal index subset (oracle)."""
    m = np.asarray(m)
    n = m.shape[0]
    r = [1.0]
    for i in range(1, n + 1):
        total = 0.0
        for subset in itertools.combinations(range(n), i):
            idx = np.ix_(subset, subset)
            total += det_cofactor(m[idx])
        r.append(total)
    return np.array(r)


def swe_advection(gh0=10.0):
    return np.array([[0.0, 1.0, 0.0], [gh0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class TestCharPoly:
    def test_swe_advection_matrix(self):
        # trace 0, principal-minor sum -10, det 0 -> lam^3 - 10 lam
        cp = matkit.char_poly(swe_advection())
        np.testing.assert_allclose(cp.coeffs, [1.0, 0.0, -10.0, 0.0], atol=1e-12)

    def test_identity_n2(self):
        cp = matkit.char_poly(np.eye(2))
        np.testing.assert_allclose(cp.coeffs, [1.0, 2.0, 1.0], atol=1e-14)

    def test_random_integer_matches_minor_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            m = rng.integers(-5, 6, size=(3, 3)).astype(float)
            cp = matkit.char_poly(m)
            np.testing.assert_allclose(cp.coeffs, principal_minor_sums(m), atol=1e-9)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_random_sizes_match_enumeration(self, n):
        rng = np.random.default_rng(n)
        m = rng.standard_normal((n, n))
        np.testing.assert_allclose(
            matkit.char_poly(m).coeffs, principal_minor_sums(m), rtol=1e-9, atol=1e-9
        )

    def test_complex_matrix(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        np.testing.assert_allclose(
            matkit.char_poly(m).coeffs, principal_minor_sums(m), rtol=1e-9, atol=1e-9
        )

    def test_triangular_gives_elementary_symmetric(self):
        d = np.array([2.0, -1.0, 3.0, 0.5])
        m = np.diag(d)
        m[0, 2] = 4.0
        m[1, 3] = -2.0
        cp = matkit.char_poly(m)
        e1 = d.sum()
        e2 = sum(d[i] * d[j] for i in range(4) for j in range(i + 1, 4))
        e3 = sum(
            d[i] * d[j] * d[k]
            for i in range(4)
            for j in range(i + 1, 4)
            for k in range(j + 1, 4)
        )
        e4 = d.prod()
        np.testing.assert_allclose(cp.coeffs, [1.0, e1, e2, e3, e4], rtol=1e-12)

    def test_dimension_errors(self):
        with pytest.raises(matkit.DimensionError):
            matkit.char_poly(np.zeros((2, 3)))
        with pytest.raises(matkit.DimensionError):
            matkit.char_poly(np.zeros((9, 9)))
        with pytest.raises(matkit.DimensionError):
            matkit.char_poly(np.zeros((1, 1)))

    @settings(max_examples=50, deadline=None)
    @given(
        m=arrays(
            np.float64,
            (3, 3),
            elements=st.floats(min_value=-10, max_value=10, allow_nan=False),
        )
    )
    def test_transpose_invariance(self, m):
        np.testing.assert_allclose(
            matkit.char_poly(m).coeffs, matkit.char_poly(m.T).coeffs, rtol=1e-9, atol=1e-9
        )


class TestMinor:
    def test_swe_m33(self):
        assert matkit.minor(swe_advection(), 2, 2) == pytest.approx(-10.0)

    def test_identity_m11(self):
        assert matkit.minor(np.eye(3), 0, 0) == pytest.approx(1.0)

    def test_random_matches_adjugate(self):
        # adjugate oracle: adj(M)[j, i] = (-1)^(i+j) * minor(M, i, j)
        rng = np.random.default_rng(11)
        m = rng.standard_normal((4, 4))
        det = det_cofactor(m)
        adj = det * np.linalg.inv(m)  # adj = det * inv for invertible m
        for i in range(4):
            for j in range(4):
                expected = (-1) ** (i + j) * adj[j, i]
                assert matkit.minor(m, i, j) == pytest.approx(expected, rel=1e-9)

    def test_index_range(self):
        with pytest.raises(IndexError):
            matkit.minor(np.eye(3), 3, 0)
        with pytest.raises(IndexError):
            matkit.minor(np.eye(3), 0, -1)


class TestEigenvalues:
    def test_swe_advection_roots(self):
        sp = matkit.eigenvalues(swe_advection())
        got = sorted(sp.values, key=lambda z: z.real)
        s = np.sqrt(10.0)
        np.testing.assert_allclose(got, [-s, 0.0, s], atol=1e-9)

    def test_diagonal(self):
        # residual tol 1e-10 with (1+|lam|)^n normalization bounds the
        # eigenvalue error near 1e-8, not 1e-10
        sp = matkit.eigenvalues(np.diag([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(sorted(sp.values.real), [1.0, 2.0, 3.0], atol=1e-8)
        np.testing.assert_allclose(sp.values.imag, 0.0, atol=1e-8)

    def test_residual_bound(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 5, 8):
            m = rng.standard_normal((n, n))
            sp = matkit.eigenvalues(m)
            assert sp.residuals.max() <= matkit.RESIDUAL_TOL

    def test_trace_det_identity(self):
        rng = np.random.default_rng(19)
        for n in (2, 3, 4, 5):
            for _ in range(10):
                m = rng.standard_normal((n, n))
                sp = matkit.eigenvalues(m)
                trace = np.trace(m)
                det = det_cofactor(m)
                scale = 1.0 + np.abs(sp.values).max()
                assert abs(sp.values.sum() - trace) <= 1e-8 * scale
                assert abs(np.prod(sp.values) - det) <= 1e-8 * (1.0 + abs(det))

    def test_complex_matrix_roots(self):
        m = np.array([[1.0 + 1j, 2.0], [0.0, -1.0 - 0.5j]])
        sp = matkit.eigenvalues(m)
        got = sorted(sp.values, key=lambda z: z.real)
        np.testing.assert_allclose(got, [-1.0 - 0.5j, 1.0 + 1j], atol=1e-10)

    def test_nonconvergence_reports_residuals(self):
        with pytest.raises(matkit.RootConvergenceError) as err:
            matkit.eigenvalues(np.diag([1.0, 2.0, 3.0]), max_iter=1)
        assert err.value.residuals is not None


class TestSpectralAbscissa:
    def test_diagonal(self):
        assert matkit.spectral_abscissa(np.diag([-1.0, -2.0])) == pytest.approx(-1.0, abs=1e-9)

    def test_zero_matrix(self):
        assert matkit.spectral_abscissa(np.zeros((3, 3))) == pytest.approx(0.0, abs=1e-10)
