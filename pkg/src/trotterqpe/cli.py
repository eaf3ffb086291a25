"""Command-line front end.

Every subcommand writes its data files into ``--out`` (default
``$TROTTERQPE_OUT`` or ``./out``). Data files are a pure function of the
resolved configuration; the wall-clock timestamp goes to a ``.meta.json``
sidecar next to each file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from trotterqpe import __version__
from trotterqpe.analysis import (
    default_jobs,
    energy_distribution_report,
    gate_count_sweep,
    job_seed,
    rate_reference,
    sweep_csv,
    sweep_time_grid,
    sweep_trotter_steps,
    trotter_error_sweep,
)
from trotterqpe.circuit_core import INITIAL_STATE_KINDS
from trotterqpe.errors import (
    InvalidArgumentError,
    InvariantViolationError,
    ResourceLimitError,
)
from trotterqpe.pauli_model import SpinGlassHamiltonian, generate_spin_glass
from trotterqpe.qpe_engine import QpeConfig, run_qpe, run_record
from trotterqpe.spectral_oracle import (
    averaged_overlap,
    digitization_error,
    exact_diagonalize,
    heuristic_time,
    overlap_report,
    state_for_kind,
)
from trotterqpe.trotter_synth import TrotterPlan

OUT_ENV = "TROTTERQPE_OUT"

EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_IO = 4
EXIT_INTERNAL = 5


def parse_int_list(text: str) -> list[int]:
    """``"3..10"``, ``"1,2,4"`` or a mix such as ``"1,4..6"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(p) for p in str(text).split(",") if p.strip()]


def _time_arg(text: str) -> str | float:
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--t must be 'auto' or a number, got {text!r}")


def resolve_time(args, h) -> float:
    t = heuristic_time(h) if args.t == "auto" else float(args.t)
    args.t_resolved = t
    return t


# --- output ---------------------------------------------------------------

class Sink:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def _write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            meta = {"file": name, "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                    "version": __version__}
            (self.out_dir / f"{name}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
        self.written.append(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        return self._write(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def csv(self, name: str, config: dict, header, rows) -> Path:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return self._write(name, buf.getvalue())

    def raw_csv(self, name: str, config: dict, body: str) -> Path:
        return self._write(name, "# config: " + json.dumps(config, sort_keys=True) + "\n" + body)


class OutputError(Exception):
    pass


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "out", "jobs"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return cfg


def _instance(args) -> SpinGlassHamiltonian:
    if getattr(args, "hamiltonian", None):
        return SpinGlassHamiltonian.from_json(Path(args.hamiltonian).read_text())
    return generate_spin_glass(args.n, args.seed)


def _tag(h) -> str:
    return f"n{h.n}_seed{h.seed}"


# --- subcommands ----------------------------------------------------------

def cmd_generate(args, sink: Sink) -> str:
    h = _instance(args)
    sink._write(f"hamiltonian_{_tag(h)}.json", h.to_json())
    return f"instance n={h.n} seed={h.seed} terms={len(h.terms)}"


def cmd_diag(args, sink: Sink) -> str:
    h = _instance(args)
    s = exact_diagonalize(h)
    g = s.ground_space().shape[1]
    sink.json(f"spectrum_{_tag(h)}.json", {
        "config": _config(args),
        "eigenvalues": [float(e) for e in s.eigenvalues],
        "E0": s.e0, "ground_degeneracy": g, "spectral_norm": s.spectral_norm,
    })
    return f"instance n={h.n} seed={h.seed} E0={s.e0:.12g} degeneracy={g}"


def cmd_overlap(args, sink: Sink) -> str:
    h = _instance(args)
    s = exact_diagonalize(h)
    rows = []
    for kind in args.states:
        rep = overlap_report(h, kind, args.state_seed, s)
        rows.append((h.n, kind, rep.chi, rep.ground_degeneracy, rep.E0))
    sink.csv(f"overlap_{_tag(h)}.csv", _config(args),
             ("n", "state_kind", "chi", "ground_degeneracy", "E0"), rows)
    best = max(rows, key=lambda r: r[2])
    return f"instance n={h.n} seed={h.seed} E0={s.e0:.12g} best={best[1]} chi={best[2]:.6f}"


def cmd_overlap_avg(args, sink: Sink) -> str:
    rows = []
    for n in args.n:
        means = averaged_overlap(n, args.states, args.instances, args.master_seed)
        rows.extend((n, kind, means[kind], args.instances) for kind in args.states)
    sink.csv("overlap_avg.csv", _config(args), ("n", "state_kind", "mean_chi", "instances"), rows)
    return f"averaged overlap over {args.instances} instances for n={args.n[0]}..{args.n[-1]}"


def cmd_digitization(args, sink: Sink) -> str:
    rows = []
    for n in args.n:
        h = generate_spin_glass(n, args.seed)
        t = heuristic_time(h) if args.t == "auto" else float(args.t)
        e0 = exact_diagonalize(h).e0
        rows.extend((n, m, t, digitization_error(e0, t, m)) for m in args.m)
    sink.csv("digitization.csv", _config(args), ("n", "m", "t", "error"), rows)
    return f"digitization error for n={args.n[0]}..{args.n[-1]}, m={args.m[0]}..{args.m[-1]}"


def cmd_trotter_error(args, sink: Sink) -> str:
    h = _instance(args)
    t0 = resolve_time(args, h)
    table = trotter_error_sweep(h, args.k, args.r, args.t_scale, t0)
    sink.csv(f"trotter_error_{_tag(h)}.csv", _config(args),
             ("k", "r", "t_scale", "t", "error"),
             [(row.k, row.r, row.t_scale, row.t, row.error) for row in table])
    worst = max(row.error for row in table)
    return f"instance n={h.n} seed={h.seed} t0={t0:.6g} max_error={worst:.3g}"


def _qpe_cfg(args, h, t) -> QpeConfig:
    return QpeConfig(args.m, t, TrotterPlan(args.k, args.r), args.state,
                     job_seed(args.master_seed, 0), args.shots,
                     job_seed(args.master_seed, 1), args.mode)


def cmd_qpe_run(args, sink: Sink) -> str:
    h = _instance(args)
    t = resolve_time(args, h)
    cfg = _qpe_cfg(args, h, t)
    s = exact_diagonalize(h)
    res = run_qpe(h, cfg, s)
    ref = rate_reference(s, state_for_kind(cfg.initial_state_kind, h.n, cfg.state_seed, s),
                         t, cfg.m_prec)
    record = run_record(h, cfg, res, s.e0, ref.zeta)
    report = energy_distribution_report(res.samples, s.e0, t, cfg.m_prec)
    record["results"]["nonphysical_fraction"] = report.nonphysical_fraction
    record["results"]["optimal_energy"] = report.optimal_energy
    record["resolved"] = _config(args)
    sink.json(f"qpe_{_tag(h)}_m{cfg.m_prec}_k{args.k}_r{args.r}_{args.state}.json", record)
    return (f"instance n={h.n} seed={h.seed} E0={s.e0:.12g} "
            f"optimal_rate={record['results']['optimal_rate']:.4f} zeta={ref.zeta:.4f}")


def _sweep_summary(args, h, s, records, t) -> dict:
    return {
        "config": _config(args),
        "reference": {"E0": s.e0, "t0": t, "chi": records[0].chi},
        "points": [rec.row() for rec in records],
    }


def cmd_sweep_r(args, sink: Sink) -> str:
    h = _instance(args)
    t = resolve_time(args, h)
    s = exact_diagonalize(h)
    recs = sweep_trotter_steps(h, args.m, t, args.k, args.r, args.state, args.shots,
                               job_seed(args.master_seed, 0), job_seed(args.master_seed, 1),
                               args.mode, args.jobs, s)
    stem = f"sweep_r_{_tag(h)}_m{args.m}_k{args.k}_{args.state}"
    sink.raw_csv(stem + ".csv", _config(args), sweep_csv(recs))
    sink.json(stem + ".json", _sweep_summary(args, h, s, recs, t))
    last = recs[-1]
    return (f"instance n={h.n} seed={h.seed} E0={s.e0:.12g} r={last.value} "
            f"optimal_rate={last.optimal_rate:.4f} zeta={last.zeta:.4f}")


def cmd_sweep_t(args, sink: Sink) -> str:
    h = _instance(args)
    t0 = resolve_time(args, h)
    s = exact_diagonalize(h)
    recs = sweep_time_grid(h, args.m, args.k, args.r, args.state, args.shots,
                           job_seed(args.master_seed, 0), job_seed(args.master_seed, 1),
                           args.points, t0, args.mode, args.jobs, s)
    stem = f"sweep_t_{_tag(h)}_m{args.m}_k{args.k}_r{args.r}_{args.state}"
    sink.raw_csv(stem + ".csv", _config(args), sweep_csv(recs))
    sink.json(stem + ".json", _sweep_summary(args, h, s, recs, t0))
    best = max(recs, key=lambda rec: rec.optimal_rate)
    return (f"instance n={h.n} seed={h.seed} E0={s.e0:.12g} best_t={best.value:.6g} "
            f"optimal_rate={best.optimal_rate:.4f}")


def cmd_gate_count(args, sink: Sink) -> str:
    h = _instance(args)
    rows = gate_count_sweep(h, args.m, args.k, args.r, args.state)
    sink.csv(f"gate_count_{_tag(h)}_m{args.m}.csv", _config(args),
             ("k", "r", "m_prec", "gates_1q", "gates_2q", "total"),
             [(row.k, row.r, row.m_prec, row.gates_1q, row.gates_2q, row.total)
              for row in rows])
    return f"instance n={h.n} seed={h.seed} max_total={max(row.total for row in rows)}"


# --- parser ---------------------------------------------------------------

def _add_instance(p, n_list=False):
    if n_list:
        p.add_argument("--n", type=parse_int_list, default=[3], help="site counts, e.g. 3..10")
    else:
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--hamiltonian", help="load the instance from a JSON file instead")
    p.add_argument("--seed", type=int, default=0, help="instance seed")


def _add_qpe(p, r_list=False):
    p.add_argument("--m", type=int, default=3, help="phase bits")
    p.add_argument("--t", type=_time_arg, default="auto")
    p.add_argument("--k", type=int, default=2, help="Trotter order")
    if r_list:
        p.add_argument("--r", type=parse_int_list, default=[1, 2, 4, 8, 16, 32, 64])
    else:
        p.add_argument("--r", type=int, default=8)
    p.add_argument("--state", choices=INITIAL_STATE_KINDS, default="all_zero")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--mode", choices=("trotterized", "exact_unitary"), default="trotterized")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotterqpe",
        description="Trotterized QPE experiments on random Heisenberg spin glasses.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get(OUT_ENV, "out"),
                        help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--master-seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=default_jobs())
    common.add_argument("--config", help="JSON file with option values")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    _add_instance(add("generate", cmd_generate, "write a spin-glass instance as JSON"))
    _add_instance(add("diag", cmd_diag, "exact spectrum of an instance"))

    p = add("overlap", cmd_overlap, "initial-state overlaps with the ground space")
    _add_instance(p)
    p.add_argument("--states", type=lambda s: s.split(","),
                   default=list(INITIAL_STATE_KINDS))
    p.add_argument("--state-seed", type=int, default=0)

    p = add("overlap-avg", cmd_overlap_avg, "overlap averaged over random instances")
    p.add_argument("--n", type=parse_int_list, default=[3])
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--states", type=lambda s: s.split(","),
                   default=list(INITIAL_STATE_KINDS))

    p = add("digitization", cmd_digitization, "closest-readout energy error vs phase bits")
    _add_instance(p, n_list=True)
    p.add_argument("--m", type=parse_int_list, default=list(range(1, 23)))
    p.add_argument("--t", type=_time_arg, default="auto")

    p = add("trotter-error", cmd_trotter_error, "Frobenius Trotter error table")
    _add_instance(p)
    p.add_argument("--k", type=parse_int_list, default=[1, 2, 4])
    p.add_argument("--r", type=parse_int_list, default=[1, 2, 4, 8, 16, 32, 64])
    p.add_argument("--t", type=_time_arg, default="auto")
    p.add_argument("--t-scale", type=parse_float_list, default=[1.0])

    p = add("qpe-run", cmd_qpe_run, "one QPE configuration")
    _add_instance(p)
    _add_qpe(p)

    p = add("sweep-r", cmd_sweep_r, "optimal-phase rate vs Trotter steps")
    _add_instance(p)
    _add_qpe(p, r_list=True)

    p = add("sweep-t", cmd_sweep_t, "optimal-phase rate over a time grid ending at t0")
    _add_instance(p)
    _add_qpe(p)
    p.add_argument("--points", type=int, default=64)

    p = add("gate-count", cmd_gate_count, "gate census of QPE circuits (no simulation)")
    _add_instance(p)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k", type=parse_int_list, default=[1, 2, 4, 6])
    p.add_argument("--r", type=parse_int_list, default=[1, 2, 4])
    p.add_argument("--state", choices=INITIAL_STATE_KINDS, default="all_zero")
    return parser


_LIST_OPTIONS = {"n", "m", "k", "r"}


def _apply_config_file(parser, argv: list[str]) -> list[str]:
    """Splice values from ``--config`` in as flags ahead of the explicit ones."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        data = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    sub = data.pop("subcommand", None)
    flags = []
    for key, value in data.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        flags += [flag, str(value)]
    has_sub = any(a in _SUBCOMMANDS for a in argv)
    head = [] if has_sub or sub is None else [sub]
    if has_sub:
        i = next(i for i, a in enumerate(argv) if a in _SUBCOMMANDS)
        return argv[: i + 1] + flags + argv[i + 1:]
    return head + flags + argv


_SUBCOMMANDS = ("generate", "diag", "overlap", "overlap-avg", "digitization",
                "trotter-error", "qpe-run", "sweep-r", "sweep-t", "gate-count")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _apply_config_file(parser, argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    sink = Sink(Path(args.out))
    try:
        summary = args.func(args, sink)
    except ResourceLimitError as exc:
        print(f"error: size guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InvalidArgumentError as exc:
        print(f"error: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as exc:
        print(f"error: output: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolationError as exc:
        print(f"error: internal consistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
