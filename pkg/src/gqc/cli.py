"""Command-line front end.

    gqc qfi --state psi.json --hamiltonian h.json
    gqc gqc --state rho.json --hamiltonian h.json
    gqc coherence --state rho.json [--hamiltonian h.json]
    gqc verify --mode mixed --dim 6 --trials 500 --seed 7
    gqc simulate --phi 0.785 --shots 10000 --trials 200
    gqc experiment --shots 10000 --theta-grid 0:3.14159:20 --out fig2.csv
    gqc bench --dims 4,16,64 --reps 5
    gqc sample --mode mixed --dim 4 --rank 2

Exit status: 0 ok, 1 usage, 2 parse, 3 shape, 4 I/O, 5 identity check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import estimation, metrology
from .io import (
    FormatError,
    hamiltonian_to_dict,
    load_hamiltonian,
    load_state,
    matrix_to_dict,
    state_to_dict,
)
from .linalg import LinalgError
from .states import PureState, StateError, pure_to_density, random_haar_pure, random_mixed

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_SHAPE, EXIT_IO, EXIT_IDENTITY = range(6)
DEFAULT_SEED = 0
DEFAULT_THETA_GRID = "0:3.141592653589793:20"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


def fmt(x: float) -> str:
    """12 significant digits, always with a decimal point or exponent."""
    s = f"{float(x):.12g}"
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GQC_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise CliError(f"GQC_SEED must be an integer, got {env!r}", EXIT_USAGE) from None


def _load_inputs(args, need_h: bool = True):
    if args.state is None:
        raise CliError("--state is required", EXIT_USAGE)
    if need_h and args.hamiltonian is None:
        raise CliError("--hamiltonian is required", EXIT_USAGE)
    try:
        state = load_state(args.state)
        h = load_hamiltonian(args.hamiltonian) if args.hamiltonian else None
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}", EXIT_IO) from exc
    except (FormatError, StateError, LinalgError) as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc
    if h is not None and (state.dim != h.dim):
        raise CliError(f"dimension mismatch: state is {state.dim}, Hamiltonian is {h.dim}", EXIT_SHAPE)
    return state, h


def _positive(name):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {v}")
        return v

    return parse


def _nonnegative_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def parse_theta_grid(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        n = int(count)
        grid = np.linspace(float(start), float(stop), n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta grid must be start:stop:count, got {spec!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("theta grid count must be >= 1")
    return grid


def parse_dims(spec: str) -> list[int]:
    try:
        dims = [int(d) for d in spec.split(",") if d.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be a comma-separated list, got {spec!r}") from None
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("every dim must be >= 2")
    return dims


# --------------------------------------------------------------------------- #
# subcommands


def cmd_qfi(args) -> int:
    state, h = _load_inputs(args)
    rho = pure_to_density(state) if isinstance(state, PureState) else state
    if isinstance(state, PureState):
        f, method = metrology.qfi_pure(state, h), "variance"
    else:
        f, method = metrology.qfi_mixed(rho, h), "eigen_sum"
    f_sld, sld = metrology.sld_qfi(rho, h)
    rel = metrology.relative_deviation(f, f_sld)
    report = {"f_q": f, "sld": f_sld, "rel_dev": rel, "method": method, "sld_residual": sld.residual}
    if args.format == "csv":
        _emit(csv_text(["f_q", "sld", "rel_dev"], [(f, f_sld, rel)]), args.out)
    else:
        _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_gqc(args) -> int:
    state, h = _load_inputs(args)
    if isinstance(state, PureState):
        report = metrology.gqc_pure(state, h)
    else:
        report = metrology.gqc_mixed(state, h)
    if args.format == "csv":
        rows = [(p.i, p.j, p.weight, p.m2) for p in report.pair_terms]
        _emit(csv_text(["i", "j", "weight", "m2"], rows), args.out)
    else:
        _emit(dumps(report.to_dict()), args.out)
    return EXIT_OK


def cmd_coherence(args) -> int:
    state, h = _load_inputs(args, need_h=False)
    c = metrology.l1_coherence(state, h)
    basis = "storage" if h is None else h.basis_label
    if args.format == "csv":
        _emit(csv_text(["coherence_l1", "basis"], [(c, basis)]), args.out)
    else:
        _emit(dumps({"coherence_l1": c, "basis": basis}), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.dim < 2:
        raise CliError("--dim must be >= 2", EXIT_USAGE)
    if args.rank is not None and not 1 <= args.rank <= args.dim:
        raise CliError("--rank must lie in [1, dim]", EXIT_USAGE)
    seed = _seed(args)
    summary = metrology.verify_identity(args.dim, args.trials, seed, args.mode, args.rank)
    fields = ["trial", "dim", "rank", "f_q", "m_squared", "rel_dev"]
    rows = [(r.trial, r.dim, r.rank, r.f_q, r.m_squared, r.rel_dev) for r in summary.records]
    if args.format == "json":
        doc = {
            "mode": summary.mode,
            "seed": seed,
            "max_rel_dev": summary.max_rel_dev,
            "mean_rel_dev": summary.mean_rel_dev,
            "threshold": summary.threshold,
            "passed": summary.passed,
            "trials": [dict(zip(fields, row)) for row in rows],
        }
        _emit(dumps(doc), args.out)
    else:
        _emit(csv_text(fields, rows), args.out)
    status = "PASS" if summary.passed else "FAIL"
    print(
        f"{status} mode={summary.mode} dim={summary.dim} trials={len(rows)} seed={seed} "
        f"max_rel_dev={fmt(summary.max_rel_dev)} mean_rel_dev={fmt(summary.mean_rel_dev)} "
        f"threshold={fmt(summary.threshold)}",
        file=sys.stderr,
    )
    return EXIT_OK if summary.passed else EXIT_IDENTITY


def cmd_simulate(args) -> int:
    if args.state is not None or args.hamiltonian is not None:
        state, h = _load_inputs(args)
    else:
        state = PureState.normalized([1, 1])
        h = metrology.Hamiltonian.from_matrix(estimation.PAULI["Z"] / 2)
    try:
        basis = estimation.MeasurementBasis.pauli(args.basis)
    except StateError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    if basis.dim != h.dim:
        raise CliError(f"basis {args.basis!r} has dimension {basis.dim}, state has {h.dim}", EXIT_SHAPE)
    seed = _seed(args)
    try:
        run = estimation.run_estimation(state, h, basis, args.phi, args.shots, args.trials, seed)
    except estimation.EstimationError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    if args.format == "csv":
        _emit(csv_text(["trial", "estimate"], enumerate(map(float, run.estimates))), args.out)
    else:
        _emit(dumps({**run.summary(), "seed": seed, "basis": args.basis.upper()}), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    seed = _seed(args)
    report = estimation.replicate_experiment(args.shots or None, args.theta_grid, seed)
    table = csv_text(["theta", "qfi1_reconstructed", "qfi2_reconstructed"], report.rows())
    summary = dumps(report.summary())
    if args.out is not None:
        out = Path(args.out)
        _emit(table, str(out))
        _emit(summary, str(out.with_suffix(".json")))
        sys.stdout.write(summary)
    elif args.format == "csv":
        sys.stdout.write(table)
    else:
        sys.stdout.write(summary)
    return EXIT_OK


BENCH_ROUTINES = {
    "qfi_mixed": metrology.qfi_mixed,
    "sld_qfi": metrology.sld_qfi,
    "gqc_mixed": metrology.gqc_mixed,
}


def cmd_bench(args) -> int:
    seed = _seed(args)
    rows = []
    h_rng = np.random.default_rng(seed)
    for dim in args.dims:
        rho = random_mixed(dim, max(1, dim // 2), (seed, dim))
        h = metrology.random_diagonal_hamiltonian(dim, h_rng)
        for name, fn in BENCH_ROUTINES.items():
            times = []
            for _ in range(args.reps):
                t0 = time.perf_counter()
                fn(rho, h)
                times.append(time.perf_counter() - t0)
            rows.append((dim, name, args.reps, statistics.median(times)))
    _emit(csv_text(["dim", "routine", "reps", "median_seconds"], rows), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.dim < 2:
        raise CliError("--dim must be >= 2", EXIT_USAGE)
    seed = _seed(args)
    if args.mode == "pure":
        doc = state_to_dict(random_haar_pure(args.dim, seed))
    else:
        rank = args.rank if args.rank is not None else args.dim
        if not 1 <= rank <= args.dim:
            raise CliError("--rank must lie in [1, dim]", EXIT_USAGE)
        doc = matrix_to_dict(random_mixed(args.dim, rank, seed).array)
    if args.hamiltonian_out:
        h = metrology.random_diagonal_hamiltonian(args.dim, np.random.default_rng([seed, 1]))
        _emit(json.dumps(hamiltonian_to_dict(h)) + "\n", args.hamiltonian_out)
    _emit(json.dumps(doc) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gqc", description="QFI and general quantum coherence toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="json"):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $GQC_SEED or 0)")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)

    def state_args(p):
        p.add_argument("--state", default=None, help="pure-state or density-matrix JSON file")
        p.add_argument("--hamiltonian", default=None, help="Hamiltonian JSON file")

    p = sub.add_parser("qfi", help="QFI by closed form and by the SLD")
    state_args(p)
    common(p)
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("gqc", help="general quantum coherence report")
    state_args(p)
    common(p)
    p.set_defaults(func=cmd_gqc)

    p = sub.add_parser("coherence", help="l1-norm coherence")
    state_args(p)
    common(p)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("verify", help="random sweep of QFI = GQC^2")
    p.add_argument("--mode", choices=("pure", "mixed"), default="pure")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--rank", type=int, default=None, help="fixed rank (default: cycle 1..dim)")
    p.add_argument("--trials", type=_positive("--trials"), default=100)
    common(p, fmt_default="csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte-Carlo maximum-likelihood phase estimation")
    state_args(p)
    p.add_argument("--basis", default="Y", help="Pauli measurement setting, one letter per qubit")
    p.add_argument("--phi", type=float, default=math.pi / 4)
    p.add_argument("--shots", type=_positive("--shots"), default=10_000)
    p.add_argument("--trials", type=_positive("--trials"), default=200)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="simulated two-photon QFI experiment")
    p.add_argument("--shots", type=_nonnegative_int, default=10_000,
                   help="shots per tomography setting; 0 means exact probabilities")
    p.add_argument("--theta-grid", type=parse_theta_grid, default=parse_theta_grid(DEFAULT_THETA_GRID),
                   help=f"start:stop:count, inclusive (default {DEFAULT_THETA_GRID})")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="time the three mixed-state QFI routes")
    p.add_argument("--dims", type=parse_dims, default=[4, 16, 64])
    p.add_argument("--reps", type=_positive("--reps"), default=5)
    common(p, fmt_default="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sample", help="write a random state file")
    p.add_argument("--mode", choices=("pure", "mixed"), default="pure")
    p.add_argument("--dim", type=_positive("--dim"), default=2)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--hamiltonian-out", default=None,
                   help="also write a random diagonal Hamiltonian here")
    common(p)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except metrology.DimensionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_SHAPE


def run() -> None:
    sys.exit(main())
