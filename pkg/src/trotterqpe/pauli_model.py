"""Pauli-string Hamiltonians and seeded random Heisenberg spin glasses.

Site ``k`` of a Pauli string acts on bit ``k`` of a computational-basis
index (site 0 is the least-significant bit), matching the statevector
convention in :mod:`trotterqpe.circuit_core`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from trotterqpe.errors import InvalidArgumentError, ResourceLimitError

PAULI_AXES = "IXYZ"
HEISENBERG_AXES = ("X", "Y", "Z")
MAX_DENSE_SITES = 12


@dataclass(frozen=True)
class PauliTerm:
    """A real-weighted Pauli string; ``axes[k]`` is the label on site ``k``."""

    axes: str
    coefficient: float

    def __post_init__(self):
        if not self.axes or any(a not in PAULI_AXES for a in self.axes):
            raise InvalidArgumentError(f"bad Pauli axes {self.axes!r}")
        if not math.isfinite(self.coefficient):
            raise InvalidArgumentError("coefficient must be finite")

    @classmethod
    def from_sites(cls, n: int, sites: dict[int, str], coefficient: float) -> PauliTerm:
        labels = ["I"] * n
        for site, axis in sites.items():
            if not 0 <= site < n:
                raise InvalidArgumentError(f"site {site} outside 0..{n - 1}")
            labels[site] = axis
        return cls("".join(labels), float(coefficient))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def support(self) -> tuple[int, ...]:
        """Sites carrying a non-identity label, ascending."""
        return tuple(k for k, a in enumerate(self.axes) if a != "I")

    @property
    def is_identity(self) -> bool:
        return not self.support

    def masks(self) -> tuple[int, int, int]:
        """Bit masks ``(x_mask, z_mask, y_count)`` of the string.

        ``x_mask`` marks sites that flip (X or Y), ``z_mask`` sites that
        contribute a sign (Y or Z).
        """
        x_mask = z_mask = 0
        y_count = 0
        for k, a in enumerate(self.axes):
            if a in "XY":
                x_mask |= 1 << k
            if a in "YZ":
                z_mask |= 1 << k
            if a == "Y":
                y_count += 1
        return x_mask, z_mask, y_count


@dataclass(frozen=True)
class PauliHamiltonian:
    """An ordered sum of Pauli terms on ``n`` sites."""

    n: int
    terms: tuple[PauliTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n < 1:
            raise InvalidArgumentError("need at least one site")
        for term in self.terms:
            if term.n != self.n:
                raise InvalidArgumentError(
                    f"term {term.axes!r} has {term.n} sites, expected {self.n}"
                )

    @classmethod
    def from_terms(cls, terms: Sequence[PauliTerm]) -> PauliHamiltonian:
        if not terms:
            raise InvalidArgumentError("empty term list")
        return cls(terms[0].n, tuple(terms))

    def interaction_edges(self) -> set[tuple[int, int]]:
        """Unordered site pairs coupled by at least one term."""
        edges = set()
        for term in self.terms:
            for pair in combinations(term.support, 2):
                edges.add(pair)
        return edges

    def max_abs_coefficient(self) -> float:
        return max((abs(t.coefficient) for t in self.terms), default=0.0)


@dataclass(frozen=True)
class SpinGlassHamiltonian(PauliHamiltonian):
    """All-to-all XX + YY + ZZ model with independent +/-1 couplings."""

    seed: int = 0
    edge_count: int = field(default=0)

    def to_dict(self) -> dict:
        rows = []
        for term in self.terms:
            i, j = term.support
            rows.append(
                {"sites": [i, j], "axis": term.axes[i], "coeff": int(term.coefficient)}
            )
        return {"n": self.n, "seed": self.seed, "terms": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> SpinGlassHamiltonian:
        n = int(data["n"])
        terms = []
        for row in data["terms"]:
            i, j = row["sites"]
            axis = row["axis"]
            if axis not in HEISENBERG_AXES:
                raise InvalidArgumentError(f"bad axis {axis!r}")
            terms.append(PauliTerm.from_sites(n, {i: axis, j: axis}, float(row["coeff"])))
        return cls(n, tuple(terms), seed=int(data["seed"]), edge_count=n * (n - 1) // 2)

    @classmethod
    def from_json(cls, text: str) -> SpinGlassHamiltonian:
        return cls.from_dict(json.loads(text))


def _pair_signs(seed: int, i: int, j: int) -> np.ndarray:
    # one PCG64 sub-stream per site pair; the draw order is X, Y, Z
    ss = np.random.SeedSequence(seed, spawn_key=(i, j))
    rng = np.random.Generator(np.random.PCG64(ss))
    return 2 * rng.integers(0, 2, size=3) - 1


def generate_spin_glass(n: int, seed: int) -> SpinGlassHamiltonian:
    """Draw a Heisenberg spin glass on the ``n``-site clique.

    Every coupling ``J^a_ij`` for ``i < j`` and ``a`` in X, Y, Z is an
    independent fair +/-1 draw. Terms are ordered by the pair ``(i, j)``
    lexicographically, then X, Y, Z within the pair. The result depends
    only on ``(n, seed)``.
    """
    if n < 2:
        raise InvalidArgumentError(f"spin glass needs n >= 2, got {n}")
    if not 0 <= seed < 2**64:
        raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
    terms = []
    for i, j in combinations(range(n), 2):
        signs = _pair_signs(seed, i, j)
        for axis, s in zip(HEISENBERG_AXES, signs):
            terms.append(PauliTerm.from_sites(n, {i: axis, j: axis}, float(s)))
    return SpinGlassHamiltonian(n, tuple(terms), seed=seed, edge_count=n * (n - 1) // 2)


def pauli_string_matrix(term: PauliTerm) -> np.ndarray:
    """Dense matrix of ``coefficient * P`` for a single Pauli string."""
    dim = 1 << term.n
    out = np.zeros((dim, dim), dtype=complex)
    _accumulate(out, term)
    return out


def _accumulate(out: np.ndarray, term: PauliTerm) -> None:
    x_mask, z_mask, y_count = term.masks()
    cols = np.arange(out.shape[0])
    parity = np.zeros(cols.shape, dtype=np.int64)
    bits = cols & z_mask
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    phase = (1j) ** y_count * (1 - 2 * parity)
    out[cols ^ x_mask, cols] += term.coefficient * phase


def to_dense_matrix(h: PauliHamiltonian | Iterable[PauliTerm]) -> np.ndarray:
    """Sum of ``coefficient * P`` over all terms as a ``2^n x 2^n`` array."""
    if not isinstance(h, PauliHamiltonian):
        h = PauliHamiltonian.from_terms(list(h))
    if h.n > MAX_DENSE_SITES:
        raise ResourceLimitError(f"dense matrix for n={h.n} exceeds n <= {MAX_DENSE_SITES}")
    dim = 1 << h.n
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        _accumulate(out, term)
    return out


def coefficient_one_norm(h: PauliHamiltonian) -> float:
    """Sum of absolute coefficients, an upper bound on the spectral norm."""
    return float(sum(abs(t.coefficient) for t in h.terms))
