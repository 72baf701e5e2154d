"""Command-line front end.

Subcommands: ``derive`` (closed-form quantities), ``threshold`` (predicted
critical ring size), ``sweep`` (Monte Carlo sweep to CSV, optionally with a
figure), ``trial`` (Monte Carlo run at the base configuration).

Exit codes: 0 success, 2 configuration error, 3 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from typing import List, Optional

from .config import Config, load_config
from .errors import ConfigError, ParameterError
from .model import derive, theorem_prediction
from .montecarlo import (
    KeyRingSweep,
    SweepResult,
    run_sweep,
    run_trials,
    sweep_threshold,
    wilson_interval,
)

CSV_COLUMNS = [
    "sweep_axis",
    "sweep_value",
    "n",
    "trials",
    "no_isolated_successes",
    "connected_successes",
    "p_no_isolated",
    "p_no_isolated_ci_low",
    "p_no_isolated_ci_high",
    "p_connected",
    "p_connected_ci_low",
    "p_connected_ci_high",
    "mean_isolated",
    "analytic_E_In",
    "mean_class_m_isolated",
    "analytic_E_Yn",
    "c_n",
    "is_predicted_threshold",
]


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _fmt_value(v) -> str:
    return str(v) if isinstance(v, int) else _fmt(v)


def csv_rows(rows: List[SweepResult]) -> List[List[str]]:
    """Render sweep rows into the fixed CSV column set."""
    out = []
    for r in rows:
        out.append(
            [
                r.sweep_axis,
                _fmt_value(r.sweep_value),
                str(r.n),
                str(r.trials),
                str(r.no_isolated_successes),
                str(r.connected_successes),
                _fmt(r.p_no_isolated),
                _fmt(r.p_no_isolated_ci[0]),
                _fmt(r.p_no_isolated_ci[1]),
                _fmt(r.p_connected),
                _fmt(r.p_connected_ci[0]),
                _fmt(r.p_connected_ci[1]),
                _fmt(r.mean_isolated),
                _fmt(r.analytic_e_in),
                _fmt(r.mean_class_m_isolated),
                _fmt(r.analytic_e_yn),
                _fmt(r.c_n),
                "true" if r.is_predicted_threshold else "false",
            ]
        )
    return out


def write_sweep_csv(rows: List[SweepResult], path: str) -> None:
    """Write the sweep CSV atomically; no partial file survives a failure."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(csv_rows(rows))
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _print_derive(config: Config, out) -> None:
    params = config.params
    dq = derive(params)
    r = params.r
    logn = math.log(params.n)
    print(f"n = {params.n}, classes r = {r}", file=out)
    print(f"pool P = {params.keys.pool_size}, "
          f"ring sizes K = {params.keys.ring_sizes.tolist()}", file=out)
    print("key-sharing probabilities p[i][j]:", file=out)
    for i in range(r):
        print("  " + "  ".join(_fmt(dq.p[i, j]) for j in range(r)), file=out)
    print("mean edge probability, key layer (lambda): "
          + "  ".join(_fmt(v) for v in dq.lam), file=out)
    print("mean edge probability, intersection (Lambda): "
          + "  ".join(_fmt(v) for v in dq.Lam), file=out)
    print(f"m = {dq.m + 1}  (class minimizing Lambda)", file=out)
    print(f"d = {dq.d + 1}  (class maximizing alpha[m][j])", file=out)
    print(f"s = {dq.s + 1}  (class maximizing alpha[m][j]*p[m][j])", file=out)
    print(f"c_n = n*Lambda_m/log(n) = {_fmt(dq.c_n)}", file=out)
    alpha = params.channel.alpha
    print(f"alpha[m][d]*log(n) = {_fmt(alpha[dq.m, dq.d] * logn)}  (side-condition diagnostic)",
          file=out)
    print(f"alpha[m][m]*log(n) = {_fmt(alpha[dq.m, dq.m] * logn)}  (side-condition diagnostic)",
          file=out)
    print(f"prediction for c ~ c_n: {theorem_prediction(dq.c_n).value}", file=out)


def cmd_derive(args) -> int:
    config = load_config(args.config)
    _print_derive(config, sys.stdout)
    return 0


def cmd_threshold(args) -> int:
    config = _with_overrides(load_config(args.config), args)
    if config.spec is None or not isinstance(config.spec.axis, KeyRingSweep):
        raise ConfigError("sweep", "threshold requires a K1 sweep family")
    t = sweep_threshold(config.spec)
    if t is None:
        print("predicted threshold: none in range")
    else:
        print(f"predicted threshold (K1): {t}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sweep_axis", "threshold"])
            writer.writerow(["K1", "" if t is None else str(t)])
    return 0


def cmd_sweep(args) -> int:
    config = _with_overrides(load_config(args.config), args)
    if config.spec is None:
        raise ConfigError("sweep", "missing required section")
    rows = run_sweep(config.spec, workers=config.run.workers)

    out_path = args.out or config.run.output_path
    if out_path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(csv_rows(rows))
        return 0

    write_sweep_csv(rows, out_path)
    print(f"wrote {len(rows)} rows to {out_path}")

    marked = [r.sweep_value for r in rows if r.is_predicted_threshold]
    if marked:
        print(f"predicted threshold ({rows[0].sweep_axis}): {_fmt_value(marked[0])}")
    else:
        print("predicted threshold: none in range")
    below = [r.sweep_value for r in rows if r.p_connected <= 0.10]
    above = [r.sweep_value for r in rows if r.p_connected >= 0.95]
    if below and above:
        print(
            "transition interval (p_connected 0.10 -> 0.95): "
            f"{_fmt_value(max(below))} .. {_fmt_value(min(above))}"
        )
    else:
        print("transition interval: not bracketed by this sweep")

    if args.plot is not None:
        from .plotting import render_sweep_figure

        plot_path = args.plot or os.path.splitext(out_path)[0] + ".png"
        render_sweep_figure(rows, plot_path)
        print(f"wrote figure to {plot_path}")
    return 0


def cmd_trial(args) -> int:
    config = _with_overrides(load_config(args.config), args)
    params = config.params
    stats = run_trials(
        params,
        config.run.trials,
        config.run.master_seed,
        workers=config.run.workers,
    )
    dq = derive(params)
    from .model import expected_class_m_isolated, expected_isolated

    t = stats.trials
    lo, hi = wilson_interval(stats.no_isolated_successes, t)
    print(f"n = {params.n}, trials = {t}, master_seed = {config.run.master_seed}")
    print(
        f"no isolated node: {stats.no_isolated_successes}/{t} "
        f"(p = {_fmt(stats.p_no_isolated)}, 95% CI [{_fmt(lo)}, {_fmt(hi)}])"
    )
    lo, hi = wilson_interval(stats.connected_successes, t)
    print(
        f"connected:        {stats.connected_successes}/{t} "
        f"(p = {_fmt(stats.p_connected)}, 95% CI [{_fmt(lo)}, {_fmt(hi)}])"
    )
    print(
        f"mean isolated = {_fmt(stats.mean_isolated)} "
        f"(analytic E = {_fmt(expected_isolated(params))})"
    )
    print(
        f"mean class-m isolated = {_fmt(stats.mean_class_m_isolated)} "
        f"(analytic E = {_fmt(expected_class_m_isolated(params))})"
    )
    print(f"c_n = {_fmt(dq.c_n)}, prediction: {theorem_prediction(dq.c_n).value}")
    return 0


def _with_overrides(config: Config, args) -> Config:
    """Apply --seed/--workers flag overrides on top of the file settings."""
    from dataclasses import replace

    run = config.run
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must fit in an unsigned 64-bit integer")
        run = replace(run, master_seed=args.seed)
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise ConfigError("--workers", "must be at least 1")
        run = replace(run, workers=args.workers)
    spec = config.spec
    if spec is not None and run.master_seed != config.run.master_seed:
        spec = replace(spec, master_seed=run.master_seed)
    return Config(params=config.params, spec=spec, run=run)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keynetsim",
        description="Secure-connectivity experiments for heterogeneous "
        "key-predistribution networks under an on/off channel model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--seed", type=int, default=None,
                       help="override run.master_seed")
        p.add_argument("--workers", type=int, default=None,
                       help="override run.workers")
        if out_help:
            p.add_argument("--out", default=None, help=out_help)

    p = sub.add_parser("derive", help="print the closed-form quantities")
    common(p, None)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("threshold", help="print the predicted critical K1")
    common(p, "also write the threshold as CSV")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="run the configured sweep and write CSV")
    common(p, "CSV output path (overrides run.output_path)")
    p.add_argument(
        "--plot", nargs="?", const="", default=None, metavar="PATH",
        help="also render the curves to PATH (default: CSV path with .png)",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trial", help="run trials at the base configuration")
    common(p, None)
    p.set_defaults(func=cmd_trial)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
