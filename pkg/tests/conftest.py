import numpy as np
import pytest

from phaseqec.channels import Correlated, Independent

TCE_T2 = (1.1, 0.6, 3.0)

IX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
IY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
IZ = np.diag([0.5, -0.5]).astype(complex)
ONE = np.eye(2, dtype=complex)


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def random_state(rng, dim=8, rank=None):
    """Random full-trace density matrix."""
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim=8):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_qubit(rng):
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=["correlated", "independent"])
def model(request):
    if request.param == "correlated":
        return Correlated(1.0)
    return Independent(TCE_T2)
