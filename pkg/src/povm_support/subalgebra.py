"""Real matrix subalgebras in block form.

A subalgebra is described, after a unitary change of basis ``U``, as a direct
sum of blocks ``M_n(K) (x) I_m`` with ``K`` real, complex or quaternionic.
Within a block the ``m`` identical ``n x n`` copies sit consecutively on the
diagonal, i.e. the block looks like ``diag(A, A, ..., A)``.  The columns of
``U`` are the adapted basis vectors written in the computational basis, so an
operator ``B`` has adapted representation ``U^* B U``.

The projection :func:`project` pinches to the block diagonal, averages the
``m`` repeated copies and, on real blocks, takes the entrywise real part.  It
is positive and unital.  Quaternionic blocks only enter :func:`dim_h`.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DimensionMismatch, NotInSubalgebra, UnsupportedRing, ValidationError
from .operators import RANK_CUT, as_square, hermitize

MEMBERSHIP_TOL = 1e-10
UNITARY_TOL = 1e-10


class Ring(enum.Enum):
    REAL = "R"
    COMPLEX = "C"
    QUATERNION = "H"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        for ring in cls:
            if key in (ring.value, ring.name):
                return ring
        raise ValidationError(f"unknown ring {value!r}; expected one of R, C, H")


@dataclass(frozen=True)
class BlockSpec:
    ring: Ring
    n: int
    m: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ring", Ring.parse(self.ring))
        if int(self.n) != self.n or self.n < 1 or int(self.m) != self.m or self.m < 1:
            raise ValidationError(f"block sizes must be positive integers, got n={self.n}, m={self.m}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))

    @property
    def copy_size(self):
        """Rows occupied by one copy of the block in the ambient space."""
        return 2 * self.n if self.ring is Ring.QUATERNION else self.n

    @property
    def rows(self):
        return self.copy_size * self.m

    @property
    def dim_h(self):
        n = self.n
        if self.ring is Ring.REAL:
            return n * (n + 1) // 2
        if self.ring is Ring.COMPLEX:
            return n * n
        return 2 * n * n - n


@dataclass(eq=False)
class SubalgebraSpec:
    """Block decomposition of a real subalgebra of ``B(H)``."""

    blocks: tuple
    ambient_dim: Optional[int] = None
    basis_change: Optional[np.ndarray] = None
    _basis_cache: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.blocks = tuple(b if isinstance(b, BlockSpec) else BlockSpec(*b) for b in self.blocks)
        if not self.blocks:
            raise ValidationError("a subalgebra needs at least one block")
        total = sum(b.rows for b in self.blocks)
        if self.ambient_dim is None:
            self.ambient_dim = total
        if total != self.ambient_dim:
            raise ValidationError(
                f"blocks occupy {total} rows but the ambient dimension is {self.ambient_dim}"
            )
        if self.basis_change is not None:
            U = as_square(self.basis_change, "basis_change")
            if U.shape[0] != self.ambient_dim:
                raise DimensionMismatch("basis_change does not match the ambient dimension")
            dev = float(np.max(np.abs(U.conj().T @ U - np.eye(self.ambient_dim))))
            if dev > UNITARY_TOL:
                raise ValidationError(f"basis_change is not unitary (deviation {dev:.3e})")
            U.setflags(write=False)
            self.basis_change = U

    @classmethod
    def full(cls, dim):
        """The whole of ``B(H)``: a single complex block."""
        return cls((BlockSpec(Ring.COMPLEX, dim, 1),))

    @property
    def dim_h(self):
        return dim_h(self)

    @property
    def has_quaternion(self):
        return any(b.ring is Ring.QUATERNION for b in self.blocks)

    def offsets(self):
        out, pos = [], 0
        for b in self.blocks:
            out.append(pos)
            pos += b.rows
        return out

    def to_adapted(self, B):
        U = self.basis_change
        return B if U is None else U.conj().T @ B @ U

    def from_adapted(self, B):
        U = self.basis_change
        return B if U is None else U @ B @ U.conj().T

    def require_supported(self):
        if self.has_quaternion:
            raise UnsupportedRing("quaternionic blocks are only supported by dim_h")


def dim_h(spec: SubalgebraSpec) -> int:
    """Real dimension of the Hermitian part; multiplicities do not contribute."""
    return sum(b.dim_h for b in spec.blocks)


def _check_dim(spec, B):
    B = as_square(B)
    if B.shape[0] != spec.ambient_dim:
        raise DimensionMismatch(
            f"operator has dimension {B.shape[0]}, subalgebra lives in dimension {spec.ambient_dim}"
        )
    return B


def project(spec: SubalgebraSpec, B):
    """Positive unital projection of ``B`` onto the subalgebra."""
    spec.require_supported()
    Bp = spec.to_adapted(_check_dim(spec, B))
    out = np.zeros_like(Bp)
    for b, off in zip(spec.blocks, spec.offsets()):
        n = b.n
        avg = sum(Bp[off + k * n: off + (k + 1) * n, off + k * n: off + (k + 1) * n] for k in range(b.m)) / b.m
        if b.ring is Ring.REAL:
            avg = avg.real.astype(complex)
        for k in range(b.m):
            out[off + k * n: off + (k + 1) * n, off + k * n: off + (k + 1) * n] = avg
    return spec.from_adapted(out)


def membership_deviation(spec, X):
    X = _check_dim(spec, X)
    return float(np.max(np.abs(X - project(spec, X))))


def _embed(spec, block_index, A):
    """Place ``I_m (x) A`` into block ``block_index`` and rotate back."""
    b = spec.blocks[block_index]
    off = spec.offsets()[block_index]
    out = np.zeros((spec.ambient_dim, spec.ambient_dim), dtype=complex)
    n = b.n
    for k in range(b.m):
        out[off + k * n: off + (k + 1) * n, off + k * n: off + (k + 1) * n] = A
    return spec.from_adapted(out)


@dataclass(frozen=True, eq=False)
class ExtremeElement:
    """``scale`` times a minimal projection of the subalgebra."""

    operator: np.ndarray
    block_index: int
    scale: float


def extreme_decompose(spec: SubalgebraSpec, X, rank_cut=RANK_CUT):
    """Split a positive element of the subalgebra into extremal pieces.

    Every piece is a positive multiple of a minimal projection
    ``(v v^*) (x) I_m`` of one block, with ``v`` real on real blocks.
    """
    spec.require_supported()
    X = _check_dim(spec, X)
    dev = float(np.max(np.abs(X - project(spec, X))))
    if dev > MEMBERSHIP_TOL:
        raise NotInSubalgebra(dev)
    Xp = spec.to_adapted(X)
    pieces = []
    for idx, (b, off) in enumerate(zip(spec.blocks, spec.offsets())):
        A = hermitize(Xp[off: off + b.n, off: off + b.n])
        if b.ring is Ring.REAL:
            lam, vecs = np.linalg.eigh(A.real)
        else:
            lam, vecs = np.linalg.eigh(A)
        for k in np.argsort(lam, kind="stable")[::-1]:
            if lam[k] <= rank_cut:
                continue
            v = vecs[:, k]
            P = _embed(spec, idx, np.outer(v, v.conj()).astype(complex))
            pieces.append(ExtremeElement(float(lam[k]) * P, idx, float(lam[k])))
    return pieces


def hermitian_basis(spec: SubalgebraSpec):
    """Hilbert-Schmidt orthonormal basis of the Hermitian part, ``dim_h`` elements."""
    spec.require_supported()
    basis = []
    for idx, b in enumerate(spec.blocks):
        n, scale = b.n, 1.0 / np.sqrt(b.m)
        for a in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[a, a] = scale
            basis.append(_embed(spec, idx, E))
        for a in range(n):
            for c in range(a + 1, n):
                E = np.zeros((n, n), dtype=complex)
                E[a, c] = E[c, a] = scale / np.sqrt(2)
                basis.append(_embed(spec, idx, E))
                if b.ring is Ring.COMPLEX:
                    E = np.zeros((n, n), dtype=complex)
                    E[a, c] = -1j * scale / np.sqrt(2)
                    E[c, a] = 1j * scale / np.sqrt(2)
                    basis.append(_embed(spec, idx, E))
    return basis


def _basis_array(spec):
    if spec._basis_cache is None:
        arr = np.stack(hermitian_basis(spec))
        arr.setflags(write=False)
        spec._basis_cache = arr
    return spec._basis_cache


def hermitian_coordinates(spec: SubalgebraSpec, ops):
    """Real coordinates of Hermitian elements of ``A_h`` in :func:`hermitian_basis`.

    ``ops`` may be one matrix or a stack; the result has shape ``(..., dim_h)``.
    """
    basis = _basis_array(spec)
    ops = np.asarray(ops, dtype=complex)
    return np.einsum("kab,...ba->...k", basis, ops).real


def sufficiency_residual(spec: SubalgebraSpec, operators, samples=200, rng=None):
    """Largest violation of ``Re tr(S Gamma(B)) = Re tr(S B)`` over random ``B``.

    ``operators`` are the model states (and, for local sufficiency, their
    derivatives) against which the projection must be invisible.
    """
    rng = np.random.default_rng(rng)
    ops = [as_square(S) for S in operators]
    worst = 0.0
    n = spec.ambient_dim
    for _ in range(samples):
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        G = project(spec, B)
        for S in ops:
            worst = max(worst, abs(np.trace(S @ G).real - np.trace(S @ B).real))
    return worst
