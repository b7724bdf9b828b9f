"""Dense operator primitives: Hermitian/PSD checks, POVMs, spectral splitting."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DimensionMismatch, NotComplete, NotHermitian, NotPsd, NumericalError, ValidationError

TOL_HERM = 1e-12
TOL_PSD = 1e-10
TOL_COMPLETE = 1e-10
RANK_CUT = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_square(A, name="matrix"):
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a nonempty square matrix, got shape {A.shape}")
    return A


def hermitian_deviation(A):
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def hermitize(A):
    return 0.5 * (A + A.conj().T)


def check_hermitian(A, index=0, tol=TOL_HERM):
    """Return a Hermitian copy of ``A`` or raise :class:`NotHermitian`."""
    A = as_square(A)
    dev = hermitian_deviation(A)
    if dev > tol:
        raise NotHermitian(index, dev)
    return hermitize(A)


def check_density(rho, tol=TOL_PSD):
    """Validate a density matrix: Hermitian, PSD, unit trace."""
    rho = check_psd(rho, tol=tol)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix has trace {tr:.12g}")
    return rho


def check_psd(A, index=0, tol=TOL_PSD):
    A = check_hermitian(A, index)
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if lam_min < -tol:
        raise NotPsd(index, lam_min)
    return A


@dataclass(frozen=True, eq=False)
class Povm:
    """A validated finite-outcome POVM.

    Use :func:`validate_povm` to construct one; the elements are stored as
    read-only complex arrays.
    """

    elements: tuple

    @property
    def dim(self):
        return self.elements[0].shape[0]

    @property
    def size(self):
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, index):
        return self.elements[index]

    def as_array(self):
        return np.stack(self.elements)

    def permuted(self, order):
        order = list(order)
        if sorted(order) != list(range(self.size)):
            raise ValidationError(f"{order} is not a permutation of {self.size} outcomes")
        return Povm(tuple(self.elements[i] for i in order))

    def completeness_deviation(self):
        total = np.sum(self.as_array(), axis=0)
        return float(np.max(np.abs(total - np.eye(self.dim))))


def _frozen(A):
    A = np.array(A, dtype=complex)
    A.setflags(write=False)
    return A


def validate_povm(candidate: Sequence, tol_complete=TOL_COMPLETE) -> Povm:
    """Check Hermiticity, positivity and completeness of a list of matrices.

    The input is copied, never modified.  Raises :class:`NotHermitian`,
    :class:`NotPsd` or :class:`NotComplete` naming the first offending element.
    """
    if isinstance(candidate, Povm):
        candidate = candidate.elements
    mats = [as_square(M, f"element {i}") for i, M in enumerate(candidate)]
    if not mats:
        raise ValidationError("a POVM needs at least one element")
    dim = mats[0].shape[0]
    for i, M in enumerate(mats):
        if M.shape != (dim, dim):
            raise DimensionMismatch(f"element {i} has shape {M.shape}, expected {(dim, dim)}")
    elements = []
    for i, M in enumerate(mats):
        elements.append(_frozen(check_psd(M, index=i)))
    deviation = float(np.max(np.abs(sum(elements) - np.eye(dim))))
    if deviation > tol_complete:
        raise NotComplete(deviation)
    return Povm(tuple(elements))


def spectral_decompose(A):
    """Eigenpairs of a Hermitian matrix, eigenvalues in descending order.

    Returns a list of ``(eigenvalue, eigenvector)`` tuples with unit
    eigenvectors.
    """
    A = check_hermitian(A)
    lam, vecs = np.linalg.eigh(A)
    order = np.argsort(lam, kind="stable")[::-1]
    return [(float(lam[k]), vecs[:, k].copy()) for k in order]


def rank_one_split(X, rank_cut=RANK_CUT):
    """Split a PSD operator into rank-one pieces ``lam * v v^*``.

    Spectral components with eigenvalue at or below ``rank_cut`` are dropped.
    """
    X = check_psd(X)
    return [lam * np.outer(v, v.conj()) for lam, v in spectral_decompose(X) if lam > rank_cut]


def inv_sqrt_psd(T):
    """Inverse square root of a positive definite Hermitian matrix."""
    lam, vecs = np.linalg.eigh(hermitize(T))
    if lam[0] <= 0:
        raise NumericalError("frame operator is not positive definite")
    return (vecs / np.sqrt(lam)) @ vecs.conj().T


def normalize_frame(ops):
    """Map PSD operators ``B_x`` to the POVM ``T^{-1/2} B_x T^{-1/2}`` with ``T = sum B_x``."""
    ops = np.asarray(ops, dtype=complex)
    S = inv_sqrt_psd(ops.sum(axis=0))
    return np.einsum("ab,xbc,cd->xad", S, ops, S)


def random_povm(dim, size, rng=None, real=False, rank=None):
    """Random POVM with ``size`` outcomes built from Gaussian frame operators.

    ``rank`` sets the rank of each unnormalized element (defaults to full
    rank); ``real=True`` gives real symmetric elements.
    """
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    if size * rank < dim:
        raise ValidationError(f"{size} elements of rank {rank} cannot sum to the identity on C^{dim}")
    G = rng.standard_normal((size, dim, rank))
    if not real:
        G = G + 1j * rng.standard_normal((size, dim, rank))
    ops = G @ np.conj(np.swapaxes(G, 1, 2))
    elements = [hermitize(M) for M in normalize_frame(ops)]
    if real:
        elements = [M.real.astype(complex) for M in elements]
    return validate_povm(elements)
