"""Command-line driver: ``fabricmotion {analytic,simulate,window-sweep,freq-sweep,verify}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines (keys as the long flag names), then the command line.
"""
from __future__ import annotations

import argparse
import csv
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import FabricDistParams, analytic_ks, fabric_cdf, fabric_pdf, rigid_cdf, rigid_pdf, supremum_ks
from .errors import DomainError, ExperimentError
from .experiments import DEFAULT_FREQ_OMEGAS, DEFAULT_LENGTHS, DEFAULT_WINDOWS, ExperimentSpec, parse_length
from .experiments import run_freq_sweep, run_window_sweep, summarize
from .pipeline import write_trajectories
from .simulate import generate_dataset
from .svm import SvmParams
from .verify import run_checks

OUTPUT_ENV = "FABRICMOTION_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _header(seed):
    return f"seed={seed} version={__version__}"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, rows, columns, seed):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {_header(seed)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
    return path


def _output_dir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_common(p):
    p.add_argument("--output-dir", default=os.environ.get(OUTPUT_ENV, "results"),
                   help=f"directory for CSV output (default: ${OUTPUT_ENV} or ./results)")
    p.add_argument("--master-seed", type=int, default=0)


def _add_experiment(p):
    p.add_argument("--omega-low", type=float, default=1.0, help="class-0 angular frequency (rad/s)")
    p.add_argument("--omega-high", type=float, default=2.0, help="class-1 angular frequency (rad/s)")
    p.add_argument("--lengths", type=parse_length, nargs="+", default=list(DEFAULT_LENGTHS),
                   help="fabric lengths L (fractions like 1/3 allowed)")
    p.add_argument("--include-rigid", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--sample-rate", type=float, default=40.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--window-seconds", type=float, nargs="+", default=list(DEFAULT_WINDOWS))
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--c", type=float, default=1.0, help="SVM box constraint")
    p.add_argument("--gamma", type=float, default=None, help="RBF width (default 1/window samples)")
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=1000)
    p.add_argument("--max-rows", type=int, default=4000, help="training row cap; 0 disables")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--standardize", choices=("train", "pooled", "none"), default="train")
    p.add_argument("--split", choices=("trajectory", "window"), default="trajectory")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="fabricmotion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form PDF/CDF tables and KS distances")
    _add_common(p)
    p.add_argument("--nu", type=float, nargs="+", default=[1.0])
    p.add_argument("--lengths", type=parse_length, nargs="+", default=[1.0])
    p.add_argument("--x-max", type=float, default=2.5)
    p.add_argument("--x-points", type=int, default=2001)
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--omega2-list", type=float, nargs="+", default=[1.0, 1.5, 2.0, 2.5, 3.0])
    p.add_argument("--ks-lengths", type=parse_length, nargs="+", default=list(DEFAULT_LENGTHS))

    p = sub.add_parser("simulate", help="dump a simulated trajectory dataset as CSV")
    _add_common(p)
    _add_experiment(p)

    p = sub.add_parser("window-sweep", help="accuracy versus window size")
    _add_common(p)
    _add_experiment(p)

    p = sub.add_parser("freq-sweep", help="accuracy and KS distance versus class-1 frequency")
    _add_common(p)
    _add_experiment(p)
    p.add_argument("--omega-high-list", type=float, nargs="+", default=list(DEFAULT_FREQ_OMEGAS))
    p.add_argument("--freq-window", type=float, default=0.025)
    p.add_argument("--ks-samples", type=int, default=100_000)

    p = sub.add_parser("verify", help="run the self-check suite")
    _add_common(p)
    p.add_argument("--report", default=None, help="also write the table to this CSV file")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def read_config(path):
    """Flat ``key = value`` file turned into argv tokens (``#`` starts a comment)."""
    tokens = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"{path}:{lineno}: expected key = value")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            tokens.append("--no-" + flag[2:])
        else:
            tokens.append(flag)
            tokens.extend(shlex.split(value.replace(",", " ")))
    return tokens


def _expand_config(argv):
    argv = list(argv)
    for k, tok in enumerate(argv):
        if tok == "--config" or tok.startswith("--config="):
            if tok == "--config":
                if k + 1 >= len(argv):
                    raise DomainError("--config needs a path")
                path, rest = argv[k + 1], argv[:k] + argv[k + 2:]
            else:
                path, rest = tok.split("=", 1)[1], argv[:k] + argv[k + 1:]
            cmd_at = next((i for i, t in enumerate(rest) if not t.startswith("-")), None)
            if cmd_at is None:
                raise DomainError("--config must accompany a subcommand")
            return rest[:cmd_at + 1] + read_config(path) + rest[cmd_at + 1:]
    return argv


def spec_from_args(args):
    svm = SvmParams(c=args.c, gamma=args.gamma, tolerance=args.tolerance, max_passes=args.max_passes,
                    max_rows=args.max_rows or None)
    extra = {}
    for name in ("omega_high_list", "freq_window", "ks_samples"):
        if hasattr(args, name):
            value = getattr(args, name)
            extra[name] = tuple(value) if isinstance(value, list) else value
    return ExperimentSpec(omega_low=args.omega_low, omega_high=args.omega_high, lengths=tuple(args.lengths),
                          include_rigid=args.include_rigid, duration=args.duration, sample_rate=args.sample_rate,
                          amplitude=args.amplitude, n_per_class=args.n_per_class,
                          window_seconds=tuple(args.window_seconds), trials=args.trials,
                          master_seed=args.master_seed, svm=svm, stride=args.stride,
                          train_fraction=args.train_fraction, standardize=args.standardize, split=args.split,
                          workers=args.workers, **extra)


def cmd_analytic(args):
    out = _output_dir(args)
    x = np.round(np.linspace(-args.x_max, args.x_max, args.x_points), 12)
    params = [FabricDistParams(nu, L) for nu in args.nu for L in args.lengths]
    names = [f"fabric(nu={p.nu:g};L={p.length:g})" for p in params]
    pdf_cols = {"x": x, "rigid": rigid_pdf(x), **{n: fabric_pdf(x, p) for n, p in zip(names, params)}}
    cdf_cols = {"x": x, "rigid": rigid_cdf(x), **{n: fabric_cdf(x, p) for n, p in zip(names, params)}}
    pdf_rows = [{k: float(v[i]) for k, v in pdf_cols.items()} for i in range(x.size)]
    cdf_rows = [{k: float(v[i]) for k, v in cdf_cols.items()} for i in range(x.size)]
    write_rows(out / "pdf.csv", pdf_rows, ["x", "rigid", *names], args.master_seed)
    write_rows(out / "cdf.csv", cdf_rows, ["x", "rigid", *names], args.master_seed)
    ks_rows = []
    for L in args.ks_lengths:
        for w2 in args.omega2_list:
            a = analytic_ks(args.omega1, w2, L)
            s = supremum_ks(args.omega1, w2, L)
            ks_rows.append({"omega1": args.omega1, "omega2": w2, "L": L, "D": a.statistic, "argsup": a.argsup,
                            "D_supremum": s.statistic, "argsup_supremum": s.argsup})
    write_rows(out / "ks_analytic.csv", ks_rows,
               ["omega1", "omega2", "L", "D", "argsup", "D_supremum", "argsup_supremum"], args.master_seed)
    print(f"wrote pdf.csv, cdf.csv, ks_analytic.csv to {out}")
    return EXIT_OK


def cmd_simulate(args):
    spec = spec_from_args(args)
    out = _output_dir(args)
    data = generate_dataset(spec.omega_low, spec.omega_high, spec.n_per_class, spec.sensors, spec.yoke,
                            spec.master_seed)
    trajs = [t for group in data.values() for t in group]
    path = out / "trajectories.csv"
    write_trajectories(trajs, path, comment=_header(spec.master_seed))
    print(f"wrote {len(trajs)} trajectories to {path}")
    return EXIT_OK


WINDOW_COLUMNS = ["window_seconds", "sensor", "trial", "accuracy", "window_samples", "train_rows", "test_rows",
                  "n_support", "subsampled"]
FREQ_COLUMNS = ["omega2", "sensor", "trial", "accuracy", "D_empirical", "D_analytic", "D_supremum"]


def cmd_window_sweep(args):
    spec = spec_from_args(args)
    out = _output_dir(args)
    rows = run_window_sweep(spec)
    write_rows(out / "window_sweep.csv", rows, WINDOW_COLUMNS, spec.master_seed)
    summary = summarize(rows, ["window_seconds", "sensor"])
    write_rows(out / "window_sweep_summary.csv", summary, ["window_seconds", "sensor", "mean", "std", "n"],
               spec.master_seed)
    for s in summary:
        print(f"{s['window_seconds']:>6g} s  {s['sensor']:<28} {s['mean']:6.2f} +- {s['std']:.2f}")
    return EXIT_OK


def cmd_freq_sweep(args):
    spec = spec_from_args(args)
    out = _output_dir(args)
    rows = run_freq_sweep(spec)
    write_rows(out / "freq_sweep.csv", rows, FREQ_COLUMNS, spec.master_seed)
    summary = summarize(rows, ["omega2", "sensor"])
    empirical = {(s["omega2"], s["sensor"]): s["mean"] for s in summarize(rows, ["omega2", "sensor"], "D_empirical")}
    analytic = {(r["omega2"], r["sensor"]): r["D_analytic"] for r in rows}
    for s in summary:
        s["D_empirical_mean"] = empirical[(s["omega2"], s["sensor"])]
        s["D_analytic"] = analytic[(s["omega2"], s["sensor"])]
    write_rows(out / "freq_sweep_summary.csv", summary,
               ["omega2", "sensor", "mean", "std", "n", "D_empirical_mean", "D_analytic"], spec.master_seed)
    for s in summary:
        print(f"omega2={s['omega2']:<5g} {s['sensor']:<28} acc {s['mean']:6.2f}  "
              f"D_emp {s['D_empirical_mean']:.4f}  D_an {s['D_analytic']:.4f}")
    return EXIT_OK


def cmd_verify(args):
    results = run_checks(inject_fault=args.inject_fault)
    print("check,status,seconds,detail")
    for name, passed, detail, secs in results:
        print(f"{name},{'PASS' if passed else 'FAIL'},{secs:.2f},{detail}")
    if args.report:
        rows = [{"check": n, "status": "PASS" if p else "FAIL", "seconds": round(s, 3), "detail": d}
                for n, p, d, s in results]
        write_rows(args.report, rows, ["check", "status", "seconds", "detail"], args.master_seed)
    return EXIT_OK if all(p for _, p, _, _ in results) else EXIT_FAIL


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "window-sweep": cmd_window_sweep,
    "freq-sweep": cmd_freq_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    try:
        argv = _expand_config(sys.argv[1:] if argv is None else argv)
    except (DomainError, OSError) as exc:
        print(f"fabricmotion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"fabricmotion: invalid settings: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExperimentError, OSError) as exc:
        print(f"fabricmotion: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
