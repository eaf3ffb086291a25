"""Statevector simulation of Trotterized quantum phase estimation on
random Heisenberg spin-glass Hamiltonians, with exact-diagonalization
references for every sampled quantity."""

from trotterqpe.errors import (
    InvalidArgumentError,
    InvariantViolationError,
    PhaseWrapError,
    ResourceLimitError,
)
from trotterqpe.pauli_model import (
    PauliHamiltonian,
    PauliTerm,
    SpinGlassHamiltonian,
    coefficient_one_norm,
    generate_spin_glass,
    to_dense_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidArgumentError",
    "InvariantViolationError",
    "PhaseWrapError",
    "ResourceLimitError",
    "PauliHamiltonian",
    "PauliTerm",
    "SpinGlassHamiltonian",
    "coefficient_one_norm",
    "generate_spin_glass",
    "to_dense_matrix",
]
