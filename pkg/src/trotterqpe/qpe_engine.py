"""Textbook quantum phase estimation with Trotterized or exact controlled
evolutions.

Register layout: phase qubits ``0..m-1`` then system qubits ``m..m+n-1``.
Phase qubit ``j`` controls the evolution for time ``t * 2**j``. The inverse
QFT is emitted without the trailing swaps, so after it phase qubit ``j``
holds bit ``phi_{j+1}`` of ``phi = 0.phi_1 phi_2 ...``; reading the phase
qubits in the order ``0..m-1`` therefore spells ``phi_1 phi_2 ... phi_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from trotterqpe.circuit_core import (
    QuantumCircuit,
    ShotHistogram,
    build_initial_state,
    histogram_from_indices,
    marginal_probabilities,
    run_circuit,
    sample_indices,
)
from trotterqpe.errors import InvalidArgumentError, PhaseWrapError, ResourceLimitError
from trotterqpe.pauli_model import PauliHamiltonian, coefficient_one_norm
from trotterqpe.spectral_oracle import SpectralDecomposition, exact_diagonalize
from trotterqpe.trotter_synth import TrotterPlan, controlled_trotter_circuit

MODES = ("trotterized", "exact_unitary")
MAX_PHASE_BITS = 11
MAX_REGISTER = 14
MAX_EXACT_SITES = 6


@dataclass(frozen=True)
class QpeConfig:
    m_prec: int
    t: float
    plan: TrotterPlan = field(default_factory=lambda: TrotterPlan(2, 1))
    initial_state_kind: str = "all_zero"
    state_seed: int = 0
    shots: int = 10_000
    shot_seed: int = 0
    mode: str = "trotterized"

    def __post_init__(self):
        if not 1 <= self.m_prec <= MAX_PHASE_BITS:
            raise InvalidArgumentError(f"m_prec must be in 1..{MAX_PHASE_BITS}")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise InvalidArgumentError("evolution time must be positive and finite")
        if self.shots < 1:
            raise InvalidArgumentError("shots must be >= 1")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}")

    def check_register(self, n: int) -> None:
        if self.m_prec + n > MAX_REGISTER:
            raise ResourceLimitError(
                f"register of {self.m_prec} + {n} qubits exceeds {MAX_REGISTER}"
            )

    def to_dict(self) -> dict:
        return {
            "m_prec": self.m_prec, "t": self.t, "k": self.plan.order,
            "r": self.plan.steps, "state": self.initial_state_kind,
            "shots": self.shots, "mode": self.mode,
            "seeds": {"state": self.state_seed, "shots": self.shot_seed},
        }


@dataclass(frozen=True)
class PhaseSample:
    bits: str
    phi: float
    energy: float


def decode_phase(bits: str, t: float) -> PhaseSample:
    """Binary fraction ``0.bits`` and its energy ``-(2 pi / t) * phi``."""
    if not bits or any(b not in "01" for b in bits):
        raise InvalidArgumentError(f"not a bitstring: {bits!r}")
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    phi = int(bits, 2) / 2 ** len(bits)
    return PhaseSample(bits, phi, -(2 * math.pi / t) * phi)


def optimal_phase_bitstring(e0: float, t: float, m: int) -> str:
    """The ``m``-bit readout closest to the ground phase; ties round up."""
    if t * abs(e0) >= 2 * math.pi:
        raise PhaseWrapError(f"t*|E0| = {t * abs(e0):.6g} aliases the ground phase")
    phase = (-e0 * t / (2 * math.pi)) % 1.0
    x = math.floor(2**m * phase + 0.5) % 2**m
    return format(x, f"0{m}b")


def inverse_qft_circuit(m: int) -> QuantumCircuit:
    """Inverse QFT on qubits ``0..m-1`` with output bit order reversed
    (qubit 0 ends up with the most significant phase bit)."""
    if not 1 <= m <= MAX_PHASE_BITS:
        raise InvalidArgumentError(f"m must be in 1..{MAX_PHASE_BITS}")
    c = QuantumCircuit(m)
    for j in range(m - 1, -1, -1):
        for l in range(m - 1, j, -1):
            c.cp(-2 * math.pi / 2 ** (l - j + 1), l, j)
        c.h(j)
    return c


def qft_circuit(m: int) -> QuantumCircuit:
    return inverse_qft_circuit(m).inverse()


def phase_qubits(m: int) -> list[int]:
    return list(range(m))


def system_qubits(m: int, n: int) -> list[int]:
    return list(range(m, m + n))


def _prologue(h: PauliHamiltonian, cfg: QpeConfig) -> QuantumCircuit:
    m, n = cfg.m_prec, h.n
    c = QuantumCircuit(m + n)
    c.compose(build_initial_state(cfg.initial_state_kind, n, cfg.state_seed),
              system_qubits(m, n))
    for q in phase_qubits(m):
        c.h(q)
    return c


def controlled_block(h: PauliHamiltonian, cfg: QpeConfig, j: int) -> QuantumCircuit:
    m = cfg.m_prec
    return controlled_trotter_circuit(h, cfg.t * 2**j, cfg.plan, control=j,
                                      system=system_qubits(m, h.n), num_qubits=m + h.n)


def build_qpe_circuit(h: PauliHamiltonian, cfg: QpeConfig) -> QuantumCircuit:
    """Full Trotterized QPE circuit (measurement of the phase qubits is
    implied by :func:`run_qpe`)."""
    if cfg.mode != "trotterized":
        raise InvalidArgumentError("circuit synthesis requires trotterized mode")
    cfg.check_register(h.n)
    c = _prologue(h, cfg)
    for j in range(cfg.m_prec):
        c.compose(controlled_block(h, cfg, j))
    c.compose(inverse_qft_circuit(cfg.m_prec), phase_qubits(cfg.m_prec))
    return c


def _apply_controlled_dense(psi: np.ndarray, u: np.ndarray, control: int, m: int) -> None:
    # system qubits occupy the high bits, so rows index the system register
    grid = psi.reshape(u.shape[0], 1 << m)
    cols = np.flatnonzero((np.arange(1 << m) >> control) & 1)
    grid[:, cols] = u @ grid[:, cols]


def final_state(h: PauliHamiltonian, cfg: QpeConfig,
                spectrum: SpectralDecomposition | None = None) -> np.ndarray:
    """Statevector just before the phase register is measured."""
    cfg.check_register(h.n)
    if cfg.mode == "trotterized":
        return run_circuit(build_qpe_circuit(h, cfg))
    if h.n > MAX_EXACT_SITES:
        raise ResourceLimitError(f"exact_unitary mode limited to n <= {MAX_EXACT_SITES}")
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    m = cfg.m_prec
    psi = run_circuit(_prologue(h, cfg))
    for j in range(m):
        _apply_controlled_dense(psi, spectrum.propagator(cfg.t * 2**j), j, m)
    iqft = QuantumCircuit(m + h.n).compose(inverse_qft_circuit(m), phase_qubits(m))
    return run_circuit(iqft, psi)


def phase_distribution(h: PauliHamiltonian, cfg: QpeConfig,
                       spectrum: SpectralDecomposition | None = None) -> np.ndarray:
    """Exact probability of each integer readout ``x`` (``phi = x / 2^m``)."""
    psi = final_state(h, cfg, spectrum)
    return marginal_probabilities(psi, phase_qubits(cfg.m_prec))


@dataclass(frozen=True)
class QpeResult:
    histogram: ShotHistogram
    samples: list[PhaseSample]
    probabilities: np.ndarray

    def rate(self, bits: str) -> float:
        return self.histogram.frequency(bits)


def sample_phases(probs: np.ndarray, cfg: QpeConfig) -> QpeResult:
    m = cfg.m_prec
    idx = sample_indices(probs, cfg.shots, cfg.shot_seed)
    hist = histogram_from_indices(idx, phase_qubits(m))
    decoded = {}
    samples = []
    for i in idx:
        s = decoded.get(i)
        if s is None:
            s = decoded[i] = decode_phase(format(int(i), f"0{m}b"), cfg.t)
        samples.append(s)
    return QpeResult(hist, samples, probs)


def run_qpe(h: PauliHamiltonian, cfg: QpeConfig,
            spectrum: SpectralDecomposition | None = None) -> QpeResult:
    """Simulate once to a final state, then draw ``cfg.shots`` readouts."""
    return sample_phases(phase_distribution(h, cfg, spectrum), cfg)


def exact_unitary_qpe(h: PauliHamiltonian, cfg: QpeConfig,
                      spectrum: SpectralDecomposition | None = None) -> QpeResult:
    if cfg.mode != "exact_unitary":
        raise InvalidArgumentError("exact_unitary_qpe requires mode='exact_unitary'")
    return run_qpe(h, cfg, spectrum)


def nonphysical_floor(h: PauliHamiltonian) -> float:
    """Energies below this cannot be eigenvalues of ``h``."""
    return -coefficient_one_norm(h)


def run_record(h: PauliHamiltonian, cfg: QpeConfig, result: QpeResult,
               e0: float, zeta: float) -> dict:
    optimal = optimal_phase_bitstring(e0, cfg.t, cfg.m_prec)
    return {
        "hamiltonian": {"n": h.n, "seed": getattr(h, "seed", None)},
        "config": cfg.to_dict(),
        "results": {
            "histogram": result.histogram.sorted_counts(),
            "optimal_bits": optimal,
            "optimal_rate": result.rate(optimal),
            "E0_ref": e0,
            "zeta_ref": zeta,
        },
    }
