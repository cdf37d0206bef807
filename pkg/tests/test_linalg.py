"""Eigensolver and covariance tests against hand-derived and brute-force oracles."""

import numpy as np
import pytest

from driftcast.errors import InvalidInput
from driftcast.linalg import (
    covariance_matrix,
    leading_eigenpair,
    off_diagonal_norm,
    sym_eigen,
)

from _oracles import eig2x2, eig3x3


def random_symmetric(rng, n):
    b = rng.normal(size=(n, n))
    return (b + b.T) / 2.0


class TestSymEigen:
    def test_diagonal_matrix(self):
        values, vectors = sym_eigen(np.diag([2.0, 1.0]))
        assert np.allclose(values, [2.0, 1.0])
        assert np.allclose(np.abs(vectors), np.eye(2))

    def test_identity(self):
        values, _ = sym_eigen(np.eye(3))
        assert np.allclose(values, [1.0, 1.0, 1.0])

    def test_offdiagonal_pair(self):
        # characteristic polynomial of [[0,1],[1,0]]: lambda^2 - 1
        values, vectors = sym_eigen([[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(values, [1.0, -1.0], atol=1e-12)
        assert np.allclose(np.abs(vectors[:, 0]), [1, 1] / np.sqrt(2), atol=1e-12)
        assert np.allclose(np.abs(vectors[:, 1]), [1, 1] / np.sqrt(2), atol=1e-12)

    def test_matches_characteristic_polynomial(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            m2 = random_symmetric(rng, 2)
            assert np.allclose(sym_eigen(m2)[0], eig2x2(m2), atol=1e-10)
            m3 = random_symmetric(rng, 3)
            assert np.allclose(sym_eigen(m3)[0], eig3x3(m3), atol=1e-10)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(7)
        for n in range(2, 13):
            m = random_symmetric(rng, n)
            values, vectors = sym_eigen(m)
            rebuilt = vectors @ np.diag(values) @ vectors.T
            assert np.linalg.norm(rebuilt - m) < 1e-6

    def test_eigen_equation_and_orthonormality(self):
        rng = np.random.default_rng(11)
        m = random_symmetric(rng, 9)
        values, vectors = sym_eigen(m)
        for i in range(9):
            assert np.abs(m @ vectors[:, i] - values[i] * vectors[:, i]).max() < 1e-7
        assert np.abs(vectors.T @ vectors - np.eye(9)).max() < 1e-7

    def test_values_sorted_descending(self):
        rng = np.random.default_rng(3)
        values, _ = sym_eigen(random_symmetric(rng, 8))
        assert np.all(np.diff(values) <= 1e-12)

    def test_single_entry(self):
        values, vectors = sym_eigen([[4.0]])
        assert values[0] == 4.0 and vectors[0, 0] == 1.0

    def test_zero_matrix(self):
        values, vectors = sym_eigen(np.zeros((4, 4)))
        assert np.all(values == 0.0)
        assert np.allclose(vectors, np.eye(4))

    def test_rejects_non_square(self):
        with pytest.raises(InvalidInput):
            sym_eigen(np.ones((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInput):
            sym_eigen([[0.0, 1.0], [0.0, 0.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInput):
            sym_eigen([[np.nan, 0.0], [0.0, 1.0]])


class TestLeadingEigenpair:
    def test_matches_jacobi_on_psd(self):
        rng = np.random.default_rng(5)
        for n in (4, 12, 40):
            b = rng.normal(size=(n, n))
            m = b @ b.T
            lam, vec = leading_eigenpair(m)
            values, vectors = sym_eigen(m)
            assert lam == pytest.approx(values[0], rel=1e-9)
            assert abs(float(vec @ vectors[:, 0])) == pytest.approx(1.0, abs=1e-8)

    def test_zero_matrix(self):
        lam, _ = leading_eigenpair(np.zeros((3, 3)))
        assert lam == 0.0

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        b = rng.normal(size=(20, 20))
        m = b @ b.T
        lam1, v1 = leading_eigenpair(m)
        lam2, v2 = leading_eigenpair(m)
        assert lam1 == lam2
        assert np.array_equal(v1, v2)


class TestCovariance:
    def test_hand_example(self):
        # sample covariance of identical columns [1,2,3]: var = 1
        cov = covariance_matrix([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        assert np.allclose(cov, [[1.0, 1.0], [1.0, 1.0]])

    def test_constant_column_zeroes_row_and_column(self):
        cov = covariance_matrix([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        assert np.all(cov[1, :] == 0.0) and np.all(cov[:, 1] == 0.0)

    def test_identical_columns_equal_entries(self):
        cov = covariance_matrix([[1.0, 1.0], [4.0, 4.0], [2.0, 2.0]])
        assert cov[0, 0] == pytest.approx(cov[0, 1])
        assert cov[0, 0] == pytest.approx(cov[1, 1])

    def test_rejects_single_row(self):
        with pytest.raises(InvalidInput):
            covariance_matrix([[1.0, 2.0]])


def test_off_diagonal_norm_no_cancellation():
    m = np.diag([1e6, 1e6, 1e6]) + np.full((3, 3), 1e-9) - np.diag([1e-9] * 3)
    assert off_diagonal_norm(m) == pytest.approx(np.sqrt(6) * 1e-9, rel=1e-9)
