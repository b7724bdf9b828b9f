"""Parametric state families, SLDs and the SLD Fisher matrix."""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .exceptions import DimensionMismatch, InvalidStep, OutOfDomain, ValidationError
from .operators import PAULI_I, PAULI_X, PAULI_Z, as_square, check_density, hermitize
from .subalgebra import BlockSpec, Ring, SubalgebraSpec

SLD_CUT = 1e-10
DOMAIN_MARGIN = 1e-9
STATE_TOL = 1e-10


class Tangent(NamedTuple):
    """A state and its parameter derivatives at one point."""

    rho: np.ndarray
    drho: tuple

    @property
    def d(self):
        return len(self.drho)

    @property
    def dim(self):
        return self.rho.shape[0]


def make_tangent(rho, drho):
    rho = hermitize(as_square(rho, "rho"))
    drho = tuple(hermitize(as_square(D, "drho")) for D in drho)
    for D in drho:
        if D.shape != rho.shape:
            raise DimensionMismatch("derivative shape does not match the state")
    if not drho:
        raise ValidationError("a tangent needs at least one derivative")
    return Tangent(rho, drho)


@dataclass(frozen=True, eq=False)
class StateModel:
    """Rule ``theta -> rho_theta`` together with its first derivatives.

    ``derivative_fn`` returns the list of all ``d`` partial derivatives; when
    omitted, central finite differences are used.  ``state_fn`` is expected
    to raise :class:`OutOfDomain` outside the parameter domain.
    """

    hilbert_dim: int
    param_dim: int
    state_fn: Callable
    derivative_fn: Optional[Callable] = None
    name: str = "model"

    def _theta(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.param_dim,):
            raise DimensionMismatch(f"expected {self.param_dim} parameters, got {theta.size}")
        return theta

    def state(self, theta):
        rho = as_square(self.state_fn(self._theta(theta)))
        if rho.shape[0] != self.hilbert_dim:
            raise DimensionMismatch("state dimension does not match hilbert_dim")
        return check_density(rho, tol=STATE_TOL)

    def derivatives(self, theta):
        theta = self._theta(theta)
        if self.derivative_fn is None:
            return finite_difference_derivatives(self.state, theta)
        return [hermitize(as_square(D)) for D in self.derivative_fn(theta)]

    def derivative(self, theta, i):
        return self.derivatives(theta)[i]

    def tangent(self, theta):
        return Tangent(self.state(theta), tuple(self.derivatives(theta)))


def qubit_xz():
    """Real qubit family ``(I + xX + zZ)/2`` on the open unit disk."""

    def state(theta):
        x, z = theta
        if np.hypot(x, z) >= 1.0 - DOMAIN_MARGIN:
            raise OutOfDomain(f"theta={tuple(theta)} lies outside the open unit disk")
        return 0.5 * (PAULI_I + x * PAULI_X + z * PAULI_Z)

    def derivs(theta):
        state(theta)
        return [0.5 * PAULI_X, 0.5 * PAULI_Z]

    return StateModel(2, 2, state, derivs, name="qubit-xz")


def tensor_power(base: StateModel, copies: int) -> StateModel:
    """i.i.d. ``copies``-fold extension; derivatives follow the product rule."""
    if int(copies) != copies or copies < 1:
        raise ValidationError("copies must be a positive integer")
    copies = int(copies)

    def kron_all(mats):
        out = mats[0]
        for A in mats[1:]:
            out = np.kron(out, A)
        return out

    def state(theta):
        return kron_all([base.state(theta)] * copies)

    def derivs(theta):
        rho = base.state(theta)
        out = []
        for D in base.derivatives(theta):
            terms = [kron_all([D if j == k else rho for j in range(copies)]) for k in range(copies)]
            out.append(sum(terms))
        return out

    name = base.name if copies == 1 else f"{base.name}-{copies}copy"
    return StateModel(base.hilbert_dim**copies, base.param_dim, state, derivs, name=name)


def point_model(rho, drho):
    """Model frozen at a single point: the same tangent is returned for every theta."""
    tangent = make_tangent(rho, drho)
    return StateModel(
        tangent.dim,
        tangent.d,
        lambda theta: tangent.rho,
        lambda theta: list(tangent.drho),
        name="point",
    )


def finite_difference_derivatives(state_at, theta0, step=1e-5):
    """Central differences ``(rho(theta + h e_i) - rho(theta - h e_i)) / 2h``, Hermitized."""
    if not step > 0:
        raise InvalidStep(f"finite-difference step must be positive, got {step}")
    theta0 = np.asarray(theta0, dtype=float).reshape(-1)
    out = []
    for i in range(theta0.size):
        e = np.zeros_like(theta0)
        e[i] = step
        plus = np.asarray(state_at(theta0 + e), dtype=complex)
        minus = np.asarray(state_at(theta0 - e), dtype=complex)
        out.append(hermitize((plus - minus) / (2 * step)))
    return out


class SldSet(NamedTuple):
    sld: tuple
    fisher: np.ndarray


def sld_from_tangent(tangent: Tangent, sld_cut=SLD_CUT) -> SldSet:
    """Solve ``d_i rho = (L_i rho + rho L_i)/2`` in the eigenbasis of ``rho``.

    Entries with ``lam_a + lam_b <= sld_cut`` are set to zero, which picks
    the minimal-norm solution on rank-deficient states.
    """
    lam, V = np.linalg.eigh(tangent.rho)
    denom = lam[:, None] + lam[None, :]
    mask = denom > sld_cut
    safe = np.where(mask, denom, 1.0)
    slds = []
    for D in tangent.drho:
        Dp = V.conj().T @ D @ V
        Lp = np.where(mask, 2.0 * Dp / safe, 0.0)
        slds.append(hermitize(V @ Lp @ V.conj().T))
    d = tangent.d
    J = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            J[i, j] = np.trace(tangent.drho[i] @ slds[j]).real
    return SldSet(tuple(slds), 0.5 * (J + J.T))


def sld(model: StateModel, theta0) -> SldSet:
    return sld_from_tangent(model.tangent(theta0))


def qfi_matrix(model: StateModel, theta0):
    return sld(model, theta0).fisher


def two_copy_basis():
    """Columns ``|00>, |11>, (|10>+|01>)/sqrt2, (|10>-|01>)/sqrt2`` in the computational basis."""
    s = 1 / np.sqrt(2)
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = 1
    U[3, 1] = 1
    U[2, 2] = U[1, 2] = s
    U[2, 3] = s
    U[1, 3] = -s
    return U


def qubit_xz_subalgebra():
    return SubalgebraSpec((BlockSpec(Ring.REAL, 2, 1),))


def qubit_xz_2copy_subalgebra():
    return SubalgebraSpec(
        (BlockSpec(Ring.REAL, 3, 1), BlockSpec(Ring.REAL, 1, 1)),
        basis_change=two_copy_basis(),
    )


BUILTIN_MODELS = {
    "qubit-xz": qubit_xz,
    "qubit-xz-2copy": lambda: tensor_power(qubit_xz(), 2),
}

BUILTIN_SUBALGEBRAS = {
    "qubit-xz": qubit_xz_subalgebra,
    "qubit-xz-2copy": qubit_xz_2copy_subalgebra,
}


def get_model(name):
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ValidationError(f"unknown builtin model {name!r}; choose from {sorted(BUILTIN_MODELS)}") from None
