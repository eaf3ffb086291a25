"""Sampling-rate formulas and the parameter sweeps built on them."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from trotterqpe.circuit_core import gate_census
from trotterqpe.errors import InvalidArgumentError
from trotterqpe.pauli_model import PauliHamiltonian
from trotterqpe.qpe_engine import (
    PhaseSample,
    QpeConfig,
    build_qpe_circuit,
    decode_phase,
    optimal_phase_bitstring,
    phase_distribution,
    sample_phases,
)
from trotterqpe.spectral_oracle import (
    SpectralDecomposition,
    exact_diagonalize,
    ground_space,
    heuristic_time,
    overlap_chi,
    state_for_kind,
)
from trotterqpe.trotter_synth import MAX_ERROR_SITES, TrotterPlan, trotter_error

DEFAULT_TIME_POINTS = 64


def phase_line_probability(phi: float, x: int, m: int) -> float:
    """Probability that an ideal ``m``-bit QPE on an exact eigenphase ``phi``
    reads out the integer ``x``.

    Normalized with ``1 / 4^m`` so that the values over ``x`` sum to one and
    an on-grid phase gives exactly 1.
    """
    if not 0 <= x < 2**m:
        raise InvalidArgumentError(f"x={x} outside 0..{2**m - 1}")
    delta = phi - x / 2**m
    den = math.sin(math.pi * delta)
    if abs(den) < 1e-15:
        return 1.0
    return math.sin(math.pi * (2**m * phi - x)) ** 2 / (4**m * den**2)


def steady_state_rate(chi: float, p_opt: float) -> float:
    if not (0 <= chi <= 1 and 0 <= p_opt <= 1):
        raise InvalidArgumentError("chi and p_opt must lie in [0, 1]")
    return chi * p_opt


def ground_phase(e0: float, t: float) -> float:
    return (-e0 * t / (2 * math.pi)) % 1.0


@dataclass(frozen=True)
class RateReference:
    """Oracle values that predict the converged optimal-phase rate."""

    e0: float
    chi: float
    optimal_bits: str
    p_opt: float
    zeta: float


def rate_reference(spectrum: SpectralDecomposition, state: np.ndarray, t: float,
                   m: int, chi: float | None = None) -> RateReference:
    if chi is None:
        chi = overlap_chi(state, ground_space(spectrum))
    bits = optimal_phase_bitstring(spectrum.e0, t, m)
    p_opt = phase_line_probability(ground_phase(spectrum.e0, t), int(bits, 2), m)
    return RateReference(spectrum.e0, chi, bits, p_opt, steady_state_rate(chi, p_opt))


def leakage_rate(spectrum: SpectralDecomposition, state: np.ndarray, t: float,
                 m: int) -> float:
    """Ideal-evolution probability of the optimal readout including leakage
    from every eigenvalue, not only the ground level."""
    bits = optimal_phase_bitstring(spectrum.e0, t, m)
    x = int(bits, 2)
    weights = np.abs(spectrum.eigenvectors.conj().T @ state) ** 2
    return float(sum(w * phase_line_probability(ground_phase(e, t), x, m)
                     for w, e in zip(weights, spectrum.eigenvalues)))


@dataclass(frozen=True)
class SweepRecord:
    axis: str
    value: float
    optimal_rate: float
    zeta: float
    p_opt: float
    chi: float
    trotter_error: float | None
    gates_1q: int | None
    gates_2q: int | None
    optimal_bits: str = ""

    def row(self) -> dict:
        return asdict(self)


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Order-preserving map, fanned out to ``jobs`` worker processes."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


def default_jobs() -> int:
    return os.cpu_count() or 1


def job_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _qpe_point(args):
    h, cfg, spectrum = args
    probs = phase_distribution(h, cfg, spectrum)
    if cfg.mode == "trotterized":
        census = gate_census(build_qpe_circuit(h, cfg))
        return probs, census.one_qubit_count, census.two_qubit_count
    return probs, None, None


def sweep_trotter_steps(h: PauliHamiltonian, m_prec: int, t: float, k: int,
                        r_list: Iterable[int], state: str = "all_zero",
                        shots: int = 10_000, state_seed: int = 0, shot_seed: int = 0,
                        mode: str = "trotterized", jobs: int = 1,
                        spectrum: SpectralDecomposition | None = None) -> list[SweepRecord]:
    """Optimal-phase rate as a function of Trotter steps at fixed order."""
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    r_list = sorted(r_list)
    psi = state_for_kind(state, h.n, state_seed, spectrum)
    ref = rate_reference(spectrum, psi, t, m_prec)
    cfgs = [QpeConfig(m_prec, t, TrotterPlan(k, r), state, state_seed, shots,
                      job_seed(shot_seed, i), mode) for i, r in enumerate(r_list)]
    points = parallel_map(_qpe_point, [(h, c, spectrum) for c in cfgs], jobs)
    out = []
    for r, cfg, (probs, g1, g2) in zip(r_list, cfgs, points):
        res = sample_phases(probs, cfg)
        err = None
        if h.n <= MAX_ERROR_SITES:
            err = trotter_error(h, t * 2 ** (m_prec - 1), cfg.plan, spectrum)
        out.append(SweepRecord("r", r, res.rate(ref.optimal_bits), ref.zeta, ref.p_opt,
                               ref.chi, err, g1, g2, ref.optimal_bits))
    return out


def time_grid(t0: float, m_prec: int, points: int = DEFAULT_TIME_POINTS) -> np.ndarray:
    """``points`` evenly spaced times from ``t0 - 8 t0 / 2^m`` up to ``t0``."""
    start = t0 - 8 * t0 / 2**m_prec
    if start <= 0:
        raise InvalidArgumentError(f"time grid reaches t <= 0 for m_prec={m_prec}; need m_prec >= 4")
    if points < 2:
        raise InvalidArgumentError("time grid needs at least two points")
    return np.linspace(start, t0, points)


def sweep_time_grid(h: PauliHamiltonian, m_prec: int, k: int, r: int,
                    state: str = "all_zero", shots: int = 10_000, state_seed: int = 0,
                    shot_seed: int = 0, points: int = DEFAULT_TIME_POINTS,
                    t0: float | None = None, mode: str = "trotterized", jobs: int = 1,
                    spectrum: SpectralDecomposition | None = None) -> list[SweepRecord]:
    """Optimal-phase rate over a uniform time grid ending at ``t0``.

    The optimal readout is recomputed at every time since it moves with ``t``.
    """
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    if t0 is None:
        t0 = heuristic_time(h)
    times = time_grid(t0, m_prec, points)
    psi = state_for_kind(state, h.n, state_seed, spectrum)
    chi = overlap_chi(psi, ground_space(spectrum))
    cfgs = [QpeConfig(m_prec, float(t), TrotterPlan(k, r), state, state_seed, shots,
                      job_seed(shot_seed, i), mode) for i, t in enumerate(times)]
    points_out = parallel_map(_qpe_point, [(h, c, spectrum) for c in cfgs], jobs)
    out = []
    for cfg, (probs, g1, g2) in zip(cfgs, points_out):
        ref = rate_reference(spectrum, psi, cfg.t, m_prec, chi)
        res = sample_phases(probs, cfg)
        out.append(SweepRecord("t", cfg.t, res.rate(ref.optimal_bits), ref.zeta,
                               ref.p_opt, chi, None, g1, g2, ref.optimal_bits))
    return out


@dataclass(frozen=True)
class TrotterErrorRow:
    k: int
    r: int
    t_scale: float
    t: float
    error: float


def trotter_error_sweep(h: PauliHamiltonian, k_list: Iterable[int], r_list: Iterable[int],
                        t_scales: Iterable[float] = (1.0,), t0: float | None = None,
                        spectrum: SpectralDecomposition | None = None) -> list[TrotterErrorRow]:
    """Frobenius Trotter error over an order x steps x time-scale grid."""
    if spectrum is None:
        spectrum = exact_diagonalize(h)
    if t0 is None:
        t0 = heuristic_time(h)
    rows = []
    for scale in t_scales:
        for k in k_list:
            for r in r_list:
                t = t0 * scale
                rows.append(TrotterErrorRow(k, r, scale, t,
                                            trotter_error(h, t, TrotterPlan(k, r), spectrum)))
    return rows


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass(frozen=True)
class EnergyReport:
    energies: dict[float, int]
    e0: float
    optimal_energy: float
    nonphysical_fraction: float
    optimal_fraction: float


def energy_distribution_report(samples: Sequence[PhaseSample], e0: float, t: float,
                               m: int) -> EnergyReport:
    """Decoded-energy histogram with the true and digitized ground markers.

    ``nonphysical_fraction`` counts samples strictly below the digitized
    optimum.
    """
    if not samples:
        raise InvalidArgumentError("no samples")
    optimal = decode_phase(optimal_phase_bitstring(e0, t, m), t).energy
    counts: dict[float, int] = {}
    below = at = 0
    for s in samples:
        counts[s.energy] = counts.get(s.energy, 0) + 1
        if s.energy < optimal:
            below += 1
        elif s.energy == optimal:
            at += 1
    total = len(samples)
    return EnergyReport(dict(sorted(counts.items())), e0, optimal, below / total, at / total)


@dataclass(frozen=True)
class GateCountRow:
    k: int
    r: int
    m_prec: int
    gates_1q: int
    gates_2q: int

    @property
    def total(self) -> int:
        return self.gates_1q + self.gates_2q


def gate_count_sweep(h: PauliHamiltonian, m_prec: int, k_list: Iterable[int],
                     r_list: Iterable[int], state: str = "all_zero",
                     state_seed: int = 0) -> list[GateCountRow]:
    """Gate census of the full QPE circuit per (k, r); nothing is simulated."""
    rows = []
    for k in k_list:
        for r in r_list:
            cfg = QpeConfig(m_prec, 1.0, TrotterPlan(k, r), state, state_seed)
            c = gate_census(build_qpe_circuit(h, cfg))
            rows.append(GateCountRow(k, r, m_prec, c.one_qubit_count, c.two_qubit_count))
    return rows


SWEEP_COLUMNS = ("axis", "value", "optimal_rate", "zeta", "p_opt", "chi",
                 "trotter_error", "gates_1q", "gates_2q")


def sweep_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rec in records:
        row = rec.row()
        w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                    for c in SWEEP_COLUMNS])
    return buf.getvalue()
