"""Gate-level circuits, a statevector engine, sampling and initial states.

Qubit 0 is the least-significant bit of an amplitude index. For
two-qubit matrices (``TWO_QUBIT_UNITARY``) the first listed qubit is the
more significant bit of the 4x4 row/column index.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from trotterqpe.errors import InvalidArgumentError, ResourceLimitError

ONE_QUBIT_KINDS = frozenset({"H", "X", "RZ", "U3"})
TWO_QUBIT_KINDS = frozenset({"CX", "CZ", "CRZ", "CP", "TWO_QUBIT_UNITARY"})
N_PARAMS = {"H": 0, "X": 0, "CX": 0, "CZ": 0, "RZ": 1, "CRZ": 1, "CP": 1, "U3": 3,
            "TWO_QUBIT_UNITARY": 0}
MAX_UNITARY_QUBITS = 6
INITIAL_STATE_KINDS = (
    "all_zero", "ghz", "clique_graph", "quantum_volume_su4", "random_u3", "staggered_x",
)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """One gate. ``params`` are angles in radians; ``matrix`` is only set
    for ``TWO_QUBIT_UNITARY``."""

    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind not in N_PARAMS:
            raise InvalidArgumentError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT_KINDS else 2
        if len(self.qubits) != arity or len(set(self.qubits)) != arity:
            raise InvalidArgumentError(f"{self.kind} needs {arity} distinct qubits")
        if len(self.params) != N_PARAMS[self.kind]:
            raise InvalidArgumentError(f"{self.kind} takes {N_PARAMS[self.kind]} angles")
        if not all(math.isfinite(p) for p in self.params):
            raise InvalidArgumentError("gate angles must be finite")
        if self.kind == "TWO_QUBIT_UNITARY":
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (4, 4):
                raise InvalidArgumentError("TWO_QUBIT_UNITARY needs a 4x4 matrix")
            object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def inverse(self) -> GateOp:
        if self.kind in ("H", "X", "CX", "CZ"):
            return self
        if self.kind in ("RZ", "CRZ", "CP"):
            return GateOp(self.kind, self.qubits, (-self.params[0],))
        if self.kind == "U3":
            theta, phi, lam = self.params
            return GateOp("U3", self.qubits, (-theta, -lam, -phi))
        return GateOp(self.kind, self.qubits, matrix=self.matrix.conj().T)

    def to_line(self) -> str:
        line = f"{self.kind} {','.join(str(q) for q in self.qubits)}"
        if self.kind == "TWO_QUBIT_UNITARY":
            flat = self.matrix.reshape(-1)
            vals = [v for z in flat for v in (z.real, z.imag)]
            line += ";" + ",".join(repr(float(v)) for v in vals)
        elif self.params:
            line += ";" + ",".join(repr(p) for p in self.params)
        return line

    @classmethod
    def from_line(cls, line: str) -> GateOp:
        head, _, tail = line.strip().partition(";")
        kind, _, qs = head.partition(" ")
        qubits = tuple(int(q) for q in qs.split(","))
        vals = tuple(float(v) for v in tail.split(",")) if tail else ()
        if kind == "TWO_QUBIT_UNITARY":
            arr = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
            return cls(kind, qubits, matrix=arr.reshape(4, 4))
        return cls(kind, qubits, vals)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def rz_phases(theta: float) -> tuple[complex, complex]:
    return complex(np.exp(-0.5j * theta)), complex(np.exp(0.5j * theta))


@dataclass
class QuantumCircuit:
    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidArgumentError("circuit needs at least one qubit")
        self.ops = list(self.ops)
        for op in self.ops:
            self._check(op)

    def _check(self, op: GateOp) -> None:
        if any(not 0 <= q < self.num_qubits for q in op.qubits):
            raise InvalidArgumentError(
                f"{op.kind} on {op.qubits} outside register of {self.num_qubits}"
            )

    def append(self, kind: str, qubits: Sequence[int], params: Sequence[float] = (),
               matrix: np.ndarray | None = None) -> QuantumCircuit:
        op = GateOp(kind, tuple(qubits), tuple(params), matrix)
        self._check(op)
        self.ops.append(op)
        return self

    def h(self, q):
        return self.append("H", (q,))

    def x(self, q):
        return self.append("X", (q,))

    def rz(self, theta, q):
        return self.append("RZ", (q,), (theta,))

    def u3(self, theta, phi, lam, q):
        return self.append("U3", (q,), (theta, phi, lam))

    def cx(self, c, t):
        return self.append("CX", (c, t))

    def cz(self, a, b):
        return self.append("CZ", (a, b))

    def crz(self, theta, c, t):
        return self.append("CRZ", (c, t), (theta,))

    def cp(self, theta, a, b):
        return self.append("CP", (a, b), (theta,))

    def unitary(self, matrix, a, b):
        return self.append("TWO_QUBIT_UNITARY", (a, b), matrix=matrix)

    def compose(self, other: QuantumCircuit, qubits: Sequence[int] | None = None) -> QuantumCircuit:
        """Append ``other`` in place, mapping its qubit ``i`` to ``qubits[i]``."""
        if qubits is None:
            qubits = range(other.num_qubits)
        qubits = list(qubits)
        if len(qubits) != other.num_qubits:
            raise InvalidArgumentError("qubit map length differs from circuit width")
        for op in other.ops:
            mapped = GateOp(op.kind, tuple(qubits[q] for q in op.qubits), op.params, op.matrix)
            self._check(mapped)
            self.ops.append(mapped)
        return self

    def inverse(self) -> QuantumCircuit:
        return QuantumCircuit(self.num_qubits, [op.inverse() for op in reversed(self.ops)])

    def __len__(self):
        return len(self.ops)

    def to_text(self) -> str:
        return "".join(op.to_line() + "\n" for op in self.ops)

    @classmethod
    def from_text(cls, num_qubits: int, text: str) -> QuantumCircuit:
        ops = [GateOp.from_line(line) for line in text.splitlines() if line.strip()]
        return cls(num_qubits, ops)


@dataclass(frozen=True)
class GateCensus:
    one_qubit_count: int
    two_qubit_count: int

    @property
    def total(self) -> int:
        return self.one_qubit_count + self.two_qubit_count

    def __add__(self, other: GateCensus) -> GateCensus:
        return GateCensus(self.one_qubit_count + other.one_qubit_count,
                          self.two_qubit_count + other.two_qubit_count)

    def as_dict(self) -> dict:
        return {"one_qubit_count": self.one_qubit_count,
                "two_qubit_count": self.two_qubit_count, "total": self.total}


def gate_census(c: QuantumCircuit) -> GateCensus:
    ones = sum(1 for op in c.ops if op.arity == 1)
    return GateCensus(ones, len(c.ops) - ones)


# --- statevector engine -----------------------------------------------------
#
# A state is a flat complex array of length 2^q * B where B >= 1 is a batch of
# independent columns stored innermost. Qubit p then has stride 2^p * B, so a
# reshape to (high, 2, low) exposes it as the middle axis.

def _view1(psi, q, p, batch):
    return psi.reshape(1 << (q - p - 1), 2, (1 << p) * batch)


def _view2(psi, q, a, b, batch):
    hi, lo = (a, b) if a > b else (b, a)
    v = psi.reshape(1 << (q - hi - 1), 2, 1 << (hi - lo - 1), 2, (1 << lo) * batch)
    return v, a > b


def _apply_1q_matrix(v, m):
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = m[0, 0] * a + m[0, 1] * b
    v[:, 1, :] = m[1, 0] * a + m[1, 1] * b


def _sub(v, a_first, bit_a, bit_b):
    # index the (high, 2, mid, 2, low) view with a value for each listed qubit
    if a_first:
        return v[:, bit_a, :, bit_b, :]
    return v[:, bit_b, :, bit_a, :]


def apply_gate(psi: np.ndarray, op: GateOp, q: int, batch: int = 1) -> None:
    """Apply ``op`` in place to a flat batched state of ``q`` qubits."""
    k = op.kind
    if op.arity == 1:
        v = _view1(psi, q, op.qubits[0], batch)
        if k == "RZ":
            d0, d1 = rz_phases(op.params[0])
            v[:, 0, :] *= d0
            v[:, 1, :] *= d1
        elif k == "X":
            v[:, [0, 1], :] = v[:, [1, 0], :]
        elif k == "H":
            a = v[:, 0, :].copy()
            b = v[:, 1, :]
            v[:, 0, :] = (a + b) * _H[0, 0]
            v[:, 1, :] = (a - b) * _H[0, 0]
        else:
            _apply_1q_matrix(v, u3_matrix(*op.params))
        return

    a, b = op.qubits
    v, a_first = _view2(psi, q, a, b, batch)
    if k == "CX":
        s10 = _sub(v, a_first, 1, 0)
        s11 = _sub(v, a_first, 1, 1)
        tmp = s10.copy()
        s10[...] = s11
        s11[...] = tmp
    elif k == "CZ":
        _sub(v, a_first, 1, 1)[...] *= -1
    elif k == "CP":
        _sub(v, a_first, 1, 1)[...] *= np.exp(1j * op.params[0])
    elif k == "CRZ":
        d0, d1 = rz_phases(op.params[0])
        _sub(v, a_first, 1, 0)[...] *= d0
        _sub(v, a_first, 1, 1)[...] *= d1
    else:
        m = op.matrix
        blocks = [_sub(v, a_first, i >> 1, i & 1).copy() for i in range(4)]
        for row in range(4):
            out = _sub(v, a_first, row >> 1, row & 1)
            out[...] = (m[row, 0] * blocks[0] + m[row, 1] * blocks[1]
                        + m[row, 2] * blocks[2] + m[row, 3] * blocks[3])


def run_circuit(c: QuantumCircuit, initial: np.ndarray | None = None) -> np.ndarray:
    """Return the state after applying ``c`` to ``initial`` (default |0...0>).

    ``initial`` may be a vector of length ``2^q`` or a ``2^q x B`` matrix whose
    columns are evolved independently. The input is not modified.
    """
    dim = 1 << c.num_qubits
    if initial is None:
        initial = np.zeros(dim, dtype=complex)
        initial[0] = 1.0
    initial = np.asarray(initial)
    if initial.shape[0] != dim or initial.ndim > 2:
        raise InvalidArgumentError(
            f"state of shape {initial.shape} does not fit {c.num_qubits} qubits"
        )
    batch = 1 if initial.ndim == 1 else initial.shape[1]
    psi = np.array(initial, dtype=complex, order="C").reshape(-1)
    for op in c.ops:
        apply_gate(psi, op, c.num_qubits, batch)
    return psi.reshape(initial.shape)


def basis_state(num_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << num_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def circuit_unitary(c: QuantumCircuit) -> np.ndarray:
    """Dense unitary of ``c``; column ``j`` is the circuit applied to |j>."""
    if c.num_qubits > MAX_UNITARY_QUBITS:
        raise ResourceLimitError(
            f"dense unitary for {c.num_qubits} qubits exceeds {MAX_UNITARY_QUBITS}"
        )
    return run_circuit(c, np.eye(1 << c.num_qubits, dtype=complex))


# --- measurement ----------------------------------------------------------

@dataclass(frozen=True)
class ShotHistogram:
    """Counts keyed by bitstring; the first measured qubit is the leftmost
    character."""

    qubits: tuple[int, ...]
    counts: dict[str, int]
    total_shots: int

    @property
    def width(self) -> int:
        return len(self.qubits)

    def frequency(self, bits: str) -> float:
        return self.counts.get(bits, 0) / self.total_shots

    def sorted_counts(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))


def marginal_probabilities(state: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Born-rule distribution over the integer read off ``qubits``.

    Entry ``x`` is the probability that the listed qubits, with the first one
    as the most-significant bit, spell the integer ``x``.
    """
    qubits = list(qubits)
    if not qubits:
        raise InvalidArgumentError("empty qubit list")
    q = int(round(math.log2(state.shape[0])))
    probs = np.abs(state) ** 2
    # tensor axis for qubit p is q - 1 - p
    t = probs.reshape((2,) * q)
    keep = [q - 1 - p for p in qubits]
    drop = tuple(ax for ax in range(q) if ax not in keep)
    marg = t.sum(axis=drop) if drop else t
    remaining = sorted(keep)
    marg = np.transpose(marg, [remaining.index(ax) for ax in keep])
    out = marg.reshape(-1)
    return out / out.sum()


def sample_indices(probs: np.ndarray, shots: int, seed) -> np.ndarray:
    if shots < 1:
        raise InvalidArgumentError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.choice(probs.shape[0], size=shots, p=probs)


def histogram_from_indices(indices: Iterable[int], qubits: Sequence[int]) -> ShotHistogram:
    width = len(qubits)
    tally = Counter(int(i) for i in indices)
    counts = {format(i, f"0{width}b"): c for i, c in sorted(tally.items())}
    return ShotHistogram(tuple(qubits), counts, sum(tally.values()))


def sample_measurements(state: np.ndarray, qubits: Sequence[int], shots: int,
                        seed) -> ShotHistogram:
    """Sample ``shots`` readouts of ``qubits`` from the exact marginal."""
    probs = marginal_probabilities(state, qubits)
    return histogram_from_indices(sample_indices(probs, shots, seed), qubits)


# --- initial states -------------------------------------------------------

def haar_su4(rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SU(4) from a QR-orthonormalized Ginibre matrix."""
    z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q / np.linalg.det(q) ** 0.25


def build_initial_state(kind: str, n: int, seed: int = 0) -> QuantumCircuit:
    """State-preparation circuit on ``n`` qubits for one of the named kinds.

    ``staggered_x`` flips every odd-indexed qubit. ``quantum_volume_su4``
    uses ``n`` layers of randomly paired Haar SU(4) blocks.
    """
    if n < 1:
        raise InvalidArgumentError("need n >= 1")
    c = QuantumCircuit(n)
    if kind == "all_zero":
        return c
    if kind == "ghz":
        c.h(0)
        for q in range(n - 1):
            c.cx(q, q + 1)
        return c
    if kind == "clique_graph":
        for q in range(n):
            c.h(q)
        for a, b in combinations(range(n), 2):
            c.cz(a, b)
        return c
    if kind == "staggered_x":
        for q in range(1, n, 2):
            c.x(q)
        return c
    rng = np.random.Generator(np.random.PCG64(seed))
    if kind == "random_u3":
        for q in range(n):
            c.u3(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi),
                 rng.uniform(0, 2 * math.pi), q)
        return c
    if kind == "quantum_volume_su4":
        for _ in range(n):
            perm = rng.permutation(n)
            for a, b in zip(perm[0::2], perm[1::2]):
                c.unitary(haar_su4(rng), int(a), int(b))
        return c
    raise InvalidArgumentError(f"unknown initial state kind {kind!r}")


def initial_statevector(kind: str, n: int, seed: int = 0) -> np.ndarray:
    return run_circuit(build_initial_state(kind, n, seed))
