import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povm_support.exceptions import NotComplete, NotHermitian, NotPsd, ValidationError
from povm_support.operators import (
    PAULI_X,
    PAULI_Z,
    Povm,
    random_povm,
    rank_one_split,
    spectral_decompose,
    validate_povm,
)

from conftest import random_psd

I2 = np.eye(2)


class TestValidatePovm:
    def test_identity(self):
        M = validate_povm([I2])
        assert isinstance(M, Povm)
        assert M.size == 1 and M.dim == 2

    def test_projective(self):
        M = validate_povm([(I2 + PAULI_X) / 2, (I2 - PAULI_X) / 2])
        assert M.size == 2

    def test_incomplete(self):
        with pytest.raises(NotComplete):
            validate_povm([(I2 + PAULI_X) / 2, (I2 - PAULI_X) / 4])

    def test_not_hermitian_names_index(self):
        bad = np.array([[0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(NotHermitian) as err:
            validate_povm([I2 / 2, bad])
        assert err.value.index == 1

    def test_not_psd(self):
        with pytest.raises(NotPsd) as err:
            validate_povm([I2 + PAULI_Z, -PAULI_Z])
        assert err.value.min_eigenvalue < 0

    def test_input_untouched(self):
        A = (I2 + PAULI_X) / 2
        before = A.copy()
        M = validate_povm([A, I2 - A])
        assert np.array_equal(A, before)
        assert not M[0].flags.writeable

    def test_permuted(self, rng):
        M = random_povm(3, 5, rng)
        P = M.permuted([4, 3, 2, 1, 0])
        assert np.array_equal(P[0], M[4])


class TestSpectral:
    def test_identity(self):
        assert [lam for lam, _ in spectral_decompose(I2)] == pytest.approx([1, 1])

    def test_pauli_x(self):
        (l1, v1), (l2, v2) = spectral_decompose(PAULI_X)
        assert (l1, l2) == pytest.approx((1, -1))
        assert abs(abs(v1 @ np.array([1, 1]) / np.sqrt(2)) - 1) < 1e-12
        assert abs(abs(v2 @ np.array([1, -1]) / np.sqrt(2)) - 1) < 1e-12

    def test_diagonal(self):
        assert [lam for lam, _ in spectral_decompose(np.diag([0.25, 0.75]))] == pytest.approx([0.75, 0.25])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 6))
    def test_reconstruction(self, seed, dim):
        rng = np.random.default_rng(seed)
        G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        A = G + G.conj().T
        pairs = spectral_decompose(A)
        lams = [lam for lam, _ in pairs]
        V = np.stack([v for _, v in pairs], axis=1)
        assert lams == sorted(lams, reverse=True)
        assert np.max(np.abs(V.conj().T @ V - np.eye(dim))) <= 1e-10
        assert np.max(np.abs(A - (V * lams) @ V.conj().T)) <= 1e-10


class TestRankOneSplit:
    def test_projector_is_kept(self):
        P = np.diag([1.0, 0.0])
        pieces = rank_one_split(P)
        assert len(pieces) == 1
        assert np.allclose(pieces[0], P, atol=1e-12)

    def test_scalar_matrix(self):
        pieces = rank_one_split(I2 / 2)
        assert len(pieces) == 2
        assert [np.trace(p).real for p in pieces] == pytest.approx([0.5, 0.5])

    def test_zero_eigenvalue_dropped(self):
        pieces = rank_one_split(np.diag([0.75, 0.25, 0.0]))
        assert [np.trace(p).real for p in pieces] == pytest.approx([0.75, 0.25])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 5), st.booleans())
    def test_sum_reconstructs(self, seed, dim, real):
        rng = np.random.default_rng(seed)
        X = random_psd(rng, dim, rank=max(1, dim - 1), real=real)
        pieces = rank_one_split(X)
        assert all(np.linalg.matrix_rank(p, tol=1e-9) == 1 for p in pieces)
        assert np.max(np.abs(sum(pieces) - X)) <= 1e-10


def test_random_povm_is_valid(rng):
    for real in (False, True):
        M = random_povm(4, 7, rng, real=real)
        assert M.completeness_deviation() <= 1e-10
        if real:
            assert all(np.max(np.abs(E.imag)) == 0 for E in M)


def test_random_povm_too_few_rank_one_elements():
    with pytest.raises(ValidationError):
        random_povm(4, 3, 0, rank=1)
    assert random_povm(4, 4, 0, rank=1).size == 4
