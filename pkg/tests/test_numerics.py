import math

import numpy as np
import pytest

from risopt.errors import NoConvergence, NotHermitian, NotPositiveDefinite
from risopt.numerics import herm, hpd_inverse, logdet_and_inverse, logdet_hpd, spectral_norm

from .conftest import crandn


def random_hpd(rng, n):
    b = crandn(rng, n, n)
    return np.eye(n) + herm(b) @ b


class TestLogdet:
    def test_identity(self):
        assert logdet_hpd(np.eye(3, dtype=complex)) == 0.0

    def test_diagonal(self):
        assert logdet_hpd(np.diag([2.0, 2.0]).astype(complex)) == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_matches_eigenvalues(self, rng):
        a = random_hpd(rng, 4)
        expected = float(np.sum(np.log(np.linalg.eigvalsh(a))))
        assert logdet_hpd(a) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exp_matches_determinant(self, rng, n):
        a = random_hpd(rng, n)
        det = np.linalg.det(a).real
        assert math.exp(logdet_hpd(a)) == pytest.approx(det, rel=1e-9)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            logdet_hpd(np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex))

    def test_rejects_non_square(self):
        with pytest.raises(NotHermitian):
            logdet_hpd(np.ones((2, 3), dtype=complex))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            logdet_hpd(np.diag([1.0, -1.0]).astype(complex))

    def test_tolerates_roundoff_asymmetry(self):
        a = np.array([[2.0, 1.0 + 1e-14], [1.0, 2.0]], dtype=complex)
        assert logdet_hpd(a) == pytest.approx(math.log(3.0), abs=1e-12)


class TestInverse:
    def test_identity(self):
        np.testing.assert_allclose(hpd_inverse(np.eye(2, dtype=complex)), np.eye(2), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(hpd_inverse(np.diag([2.0, 4.0]).astype(complex)), np.diag([0.5, 0.25]), atol=1e-15)

    def test_multiply_back(self, rng):
        a = random_hpd(rng, 3)
        assert np.linalg.norm(a @ hpd_inverse(a) - np.eye(3)) < 1e-9

    def test_rejects_singular(self):
        with pytest.raises(NotPositiveDefinite):
            hpd_inverse(np.zeros((2, 2), dtype=complex))

    def test_single_factorization_agrees(self, rng):
        a = random_hpd(rng, 4)
        value, inverse = logdet_and_inverse(a)
        assert value == pytest.approx(logdet_hpd(a), abs=1e-12)
        np.testing.assert_allclose(inverse, hpd_inverse(a), atol=1e-12)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, 1.0]).astype(complex), 1e-12) == pytest.approx(3.0, rel=1e-10)

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 2), dtype=complex)) == 0.0

    @pytest.mark.parametrize("shape", [(5, 3), (3, 7), (1, 4)])
    def test_matches_svd(self, rng, shape):
        a = crandn(rng, *shape)
        expected = np.linalg.svd(a, compute_uv=False)[0]
        assert spectral_norm(a, 1e-14) == pytest.approx(expected, rel=1e-8)

    def test_empty_matrix(self):
        with pytest.raises(ValueError):
            spectral_norm(np.zeros((0, 3), dtype=complex))

    def test_non_positive_tol(self):
        with pytest.raises(ValueError):
            spectral_norm(np.eye(2, dtype=complex), 0.0)

    def test_start_vector_in_null_space(self):
        # all-ones lies in the null space of A^H A here
        a = np.array([[1.0, -1.0], [-1.0, 1.0]], dtype=complex)
        assert spectral_norm(a) == pytest.approx(2.0, rel=1e-12)
        with pytest.raises(NoConvergence):
            spectral_norm(a, fallback_svd=False)

    def test_norm_inequalities(self, rng):
        for _ in range(20):
            a = crandn(rng, 4, 3)
            b = crandn(rng, 3, 5)
            assert spectral_norm(a @ b) <= spectral_norm(a) * spectral_norm(b) * (1 + 1e-9)
            assert spectral_norm(a) <= np.linalg.norm(a) * (1 + 1e-9)
            assert np.linalg.norm(a @ b) <= spectral_norm(a) * np.linalg.norm(b) * (1 + 1e-9)

    def test_diagonal_with_close_top_values(self):
        a = np.diag([1.0, 0.999, 0.5]).astype(complex)
        assert spectral_norm(a, 1e-10) == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("gap", [1e-2, 1e-4, 1e-6])
    def test_nearly_degenerate_top_pair(self, rng, gap):
        u, _ = np.linalg.qr(crandn(rng, 4, 4))
        w, _ = np.linalg.qr(crandn(rng, 4, 4))
        a = u @ np.diag([1.0, 1.0 - gap, 0.3, 0.1]).astype(complex) @ herm(w)
        assert spectral_norm(a, 1e-10) == pytest.approx(1.0, rel=1e-9)

    def test_start_vector_on_minor_eigenvector(self):
        # all-ones is the eigenvector of A^H A for eigenvalue 1; the top one is 9
        a = np.array([[2.0, -1.0], [-1.0, 2.0]], dtype=complex)
        assert spectral_norm(a) == pytest.approx(3.0, rel=1e-12)
        with pytest.raises(NoConvergence):
            spectral_norm(a, fallback_svd=False)
