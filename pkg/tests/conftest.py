import numpy as np
import pytest

from povm_support import disk_prior, qubit_xz, qubit_xz_2copy_subalgebra, qubit_xz_subalgebra, tensor_power


def random_psd(rng, dim, rank=None, real=False):
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank))
    if not real:
        G = G + 1j * rng.standard_normal((dim, rank))
    return G @ G.conj().T


def bloch_fisher(theta):
    theta = np.asarray(theta, dtype=float)
    return np.eye(2) + np.outer(theta, theta) / (1 - theta @ theta)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def qubit():
    return qubit_xz()


@pytest.fixture(scope="session")
def two_copy():
    return tensor_power(qubit_xz(), 2)


@pytest.fixture(scope="session")
def real_qubit_spec():
    return qubit_xz_subalgebra()


@pytest.fixture(scope="session")
def two_copy_spec():
    return qubit_xz_2copy_subalgebra()


@pytest.fixture(scope="session")
def disk():
    return disk_prior(5)


@pytest.fixture(scope="session")
def disk_2copy():
    return disk_prior(5, copies=2)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
