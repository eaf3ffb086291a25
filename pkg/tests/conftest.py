import numpy as np
import pytest

from trotterqpe.pauli_model import generate_spin_glass
from trotterqpe.spectral_oracle import exact_diagonalize

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_string(axes):
    """Site 0 is the least significant bit, so it is the rightmost factor."""
    m = np.eye(1, dtype=complex)
    for a in reversed(axes):
        m = np.kron(m, PAULI[a])
    return m


def kron_dense(h):
    return sum(t.coefficient * kron_string(t.axes) for t in h.terms)


@pytest.fixture(scope="session")
def glass0():
    return generate_spin_glass(3, 0)


@pytest.fixture(scope="session")
def spectrum0(glass0):
    return exact_diagonalize(glass0)


@pytest.fixture(scope="session")
def glass7():
    return generate_spin_glass(3, 7)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
