"""Exact-diagonalization references: eigensystem, ground space, overlap,
heuristic evolution time and digitization error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trotterqpe.circuit_core import initial_statevector
from trotterqpe.errors import (
    InvalidArgumentError,
    InvariantViolationError,
    ResourceLimitError,
)
from trotterqpe.pauli_model import (
    PauliHamiltonian,
    generate_spin_glass,
    to_dense_matrix,
)

DEGENERACY_TOL = 1e-12
MAX_DIAG_SITES = 10
GROUND_KIND = "ground"


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tolerance: float = DEGENERACY_TOL

    @property
    def e0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def spectral_norm(self) -> float:
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    def ground_space(self) -> np.ndarray:
        return ground_space(self)

    def propagator(self, t: float) -> np.ndarray:
        """exp(-iHt) assembled from the eigensystem."""
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T


@dataclass(frozen=True)
class OverlapReport:
    state_kind: str
    chi: float
    ground_degeneracy: int
    E0: float


def exact_diagonalize(h: PauliHamiltonian | np.ndarray,
                      tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """Full Hermitian eigensystem with eigenvalues ascending."""
    if isinstance(h, PauliHamiltonian):
        if h.n > MAX_DIAG_SITES:
            raise ResourceLimitError(f"exact diagonalization limited to n <= {MAX_DIAG_SITES}")
        m = to_dense_matrix(h)
    else:
        m = np.asarray(h, dtype=complex)
    if not np.allclose(m, m.conj().T, rtol=0, atol=1e-12):
        raise InvariantViolationError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    return SpectralDecomposition(w, v, tol)


def ground_space(s: SpectralDecomposition) -> np.ndarray:
    """Columns spanning every eigenvector within tolerance of E0."""
    mask = np.abs(s.eigenvalues - s.eigenvalues[0]) <= s.degeneracy_tolerance
    return s.eigenvectors[:, mask]


def overlap_chi(state: np.ndarray, ground: np.ndarray | Sequence[np.ndarray]) -> float:
    """Squared projection of ``state`` onto the span of ``ground``.

    ``ground`` is either a matrix with orthonormal columns or a list of
    vectors.
    """
    state = np.asarray(state, dtype=complex)
    if abs(np.linalg.norm(state) - 1.0) > 1e-10:
        raise InvalidArgumentError("state is not normalized")
    if isinstance(ground, np.ndarray) and ground.ndim == 2:
        g = ground
    else:
        g = np.column_stack([np.asarray(v, dtype=complex) for v in ground])
    amps = g.conj().T @ state
    return float(min(1.0, max(0.0, np.sum(np.abs(amps) ** 2))))


def heuristic_time(h: PauliHamiltonian) -> float:
    """pi / (3 |E| |J|) with |E| the interaction-graph edge count."""
    edges = getattr(h, "edge_count", 0) or len(h.interaction_edges())
    coupling = h.max_abs_coefficient()
    if edges == 0 or coupling == 0:
        raise InvalidArgumentError("Hamiltonian has no two-site couplings")
    return math.pi / (3 * edges * coupling)


def _check_bits(m: int) -> None:
    if not 1 <= m <= 22:
        raise InvalidArgumentError(f"phase bits must be in 1..22, got {m}")


def decode_grid_energy(x: int | np.ndarray, t: float, m: int):
    """Energy decoded from integer readout ``x`` of an ``m``-bit register."""
    return -(2 * math.pi / t) * (np.asarray(x) / 2**m)


def digitization_error(e0: float, t: float, m: int) -> float:
    """Distance from ``e0`` to the nearest energy an ``m``-bit readout decodes to."""
    _check_bits(m)
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if t * abs(e0) >= 2 * math.pi:
        raise InvalidArgumentError("ground phase wraps: t*|E0| >= 2 pi")
    target = -e0 * t / (2 * math.pi) * 2**m
    base = math.floor(target)
    cand = np.clip(np.array([base - 1, base, base + 1, base + 2]), 0, 2**m - 1)
    return float(np.min(np.abs(e0 - decode_grid_energy(cand, t, m))))


def state_for_kind(kind: str, n: int, seed: int,
                   spectrum: SpectralDecomposition | None = None) -> np.ndarray:
    if kind == GROUND_KIND:
        if spectrum is None:
            raise InvalidArgumentError("ground-state kind needs a spectrum")
        return spectrum.eigenvectors[:, 0]
    return initial_statevector(kind, n, seed)


def overlap_report(h: PauliHamiltonian, kind: str, seed: int = 0,
                   spectrum: SpectralDecomposition | None = None) -> OverlapReport:
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    g = ground_space(spectrum)
    chi = overlap_chi(state_for_kind(kind, h.n, seed, spectrum), g)
    return OverlapReport(kind, chi, g.shape[1], spectrum.e0)


def instance_seeds(master_seed: int, index: int) -> tuple[int, int]:
    """(Hamiltonian seed, state seed) for instance ``index`` of a batch."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)


def averaged_overlap(n: int, kinds: Sequence[str], instances: int = 100,
                     seed: int = 0) -> dict[str, float]:
    """Mean overlap per state kind over seeded random spin glasses."""
    if n > MAX_DIAG_SITES:
        raise ResourceLimitError(f"averaged overlap limited to n <= {MAX_DIAG_SITES}")
    totals = {k: 0.0 for k in kinds}
    for idx in range(instances):
        h_seed, s_seed = instance_seeds(seed, idx)
        h = generate_spin_glass(n, h_seed)
        spec = exact_diagonalize(h)
        g = ground_space(spec)
        for k in kinds:
            totals[k] += overlap_chi(state_for_kind(k, n, s_seed, spec), g)
    return {k: totals[k] / instances for k in kinds}
