"""Product-formula circuits for exp(-iHt) and their controlled versions.

Orders 2, 4, 6, 8 and 10 are built from symmetric second-order passes via
Suzuki's fractal recursion; order 1 is a single Lie-Trotter sweep. Each
pass is a forward half-sweep over the canonical term order followed by the
reversed half-sweep, with no merging of the adjacent middle exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from trotterqpe.circuit_core import QuantumCircuit, circuit_unitary
from trotterqpe.errors import InvalidArgumentError, ResourceLimitError
from trotterqpe.pauli_model import PauliHamiltonian, PauliTerm
from trotterqpe.spectral_oracle import exact_diagonalize

SUPPORTED_ORDERS = (1, 2, 4, 6, 8, 10)
MAX_ERROR_SITES = 6


def suzuki_p(kappa: int) -> float:
    """Fractal weight for building order 2*kappa from order 2*kappa - 2."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * kappa - 1)))


@lru_cache(maxsize=None)
def _stages(k: int) -> tuple[float, ...]:
    if k in (1, 2):
        return (1.0,)
    p = suzuki_p(k // 2)
    inner = _stages(k - 2)
    outer = (p, p, 1.0 - 4.0 * p, p, p)
    return tuple(w * c for w in outer for c in inner)


def suzuki_stages(k: int) -> list[float]:
    """Time fractions of the passes making up one order-``k`` step."""
    if k not in SUPPORTED_ORDERS:
        raise InvalidArgumentError(f"unsupported Trotter order {k}; use {SUPPORTED_ORDERS}")
    return list(_stages(k))


@dataclass(frozen=True)
class TrotterPlan:
    order: int
    steps: int

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise InvalidArgumentError(f"unsupported Trotter order {self.order}")
        if self.steps < 1:
            raise InvalidArgumentError("Trotter steps must be >= 1")

    @property
    def stage_coefficients(self) -> list[float]:
        return suzuki_stages(self.order)

    @property
    def sweeps_per_step(self) -> int:
        """Full sweeps over the term list in one step."""
        passes = len(_stages(self.order))
        return passes if self.order == 1 else 2 * passes

    def gadget_count(self, num_terms: int) -> int:
        return self.sweeps_per_step * num_terms * self.steps


def _gadget(c: QuantumCircuit, term: PauliTerm, theta: float, qubits, control=None):
    support = term.support
    if not support:
        raise InvalidArgumentError("cannot exponentiate an all-identity term")
    wires = [qubits[s] for s in support]
    for s, w in zip(support, wires):
        if term.axes[s] == "X":
            c.h(w)
        elif term.axes[s] == "Y":
            c.rz(-math.pi / 2, w)
            c.h(w)
    for a, b in zip(wires, wires[1:]):
        c.cx(a, b)
    if control is None:
        c.rz(2 * theta, wires[-1])
    else:
        c.crz(2 * theta, control, wires[-1])
    for a, b in reversed(list(zip(wires, wires[1:]))):
        c.cx(a, b)
    for s, w in zip(support, wires):
        if term.axes[s] == "X":
            c.h(w)
        elif term.axes[s] == "Y":
            c.h(w)
            c.rz(math.pi / 2, w)


def pauli_gadget(term: PauliTerm, theta: float) -> QuantumCircuit:
    """Circuit for exp(-i theta P) on ``term.n`` qubits."""
    c = QuantumCircuit(term.n)
    _gadget(c, term, theta, list(range(term.n)))
    return c


def _emit(c: QuantumCircuit, h: PauliHamiltonian, t: float, plan: TrotterPlan,
          qubits, control) -> None:
    dt = t / plan.steps
    terms = h.terms
    for _ in range(plan.steps):
        for stage in _stages(plan.order):
            if plan.order == 1:
                for term in terms:
                    _gadget(c, term, term.coefficient * stage * dt, qubits, control)
                continue
            half = 0.5 * stage * dt
            for term in terms:
                _gadget(c, term, term.coefficient * half, qubits, control)
            for term in reversed(terms):
                _gadget(c, term, term.coefficient * half, qubits, control)


def trotter_circuit(h: PauliHamiltonian, t: float, plan: TrotterPlan) -> QuantumCircuit:
    """Product-formula approximation of exp(-iHt) on ``h.n`` qubits."""
    if not math.isfinite(t):
        raise InvalidArgumentError("t must be finite")
    c = QuantumCircuit(h.n)
    _emit(c, h, t, plan, list(range(h.n)), None)
    return c


def controlled_trotter_circuit(h: PauliHamiltonian, t: float, plan: TrotterPlan,
                               control: int, system=None,
                               num_qubits: int | None = None) -> QuantumCircuit:
    """Controlled product formula; only each gadget's RZ core is controlled.

    ``system`` lists the register wires for sites ``0..n-1`` (default: the
    first ``n`` wires other than ``control``).
    """
    if system is None:
        system = [q for q in range(h.n + 1) if q != control][: h.n]
    system = list(system)
    if len(system) != h.n:
        raise InvalidArgumentError("system wire list must cover every site")
    if control in system:
        raise InvalidArgumentError(f"control qubit {control} collides with system wires")
    if num_qubits is None:
        num_qubits = max(system + [control]) + 1
    c = QuantumCircuit(num_qubits)
    _emit(c, h, t, plan, system, control)
    return c


def trotter_error(h: PauliHamiltonian, t: float, plan: TrotterPlan, spectrum=None) -> float:
    """Frobenius distance between exp(-iHt) and the product-formula unitary."""
    if h.n > MAX_ERROR_SITES:
        raise ResourceLimitError(f"Trotter error limited to n <= {MAX_ERROR_SITES}")
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    ideal = spectrum.propagator(t)
    approx = circuit_unitary(trotter_circuit(h, t, plan))
    return float(np.linalg.norm(ideal - approx))
