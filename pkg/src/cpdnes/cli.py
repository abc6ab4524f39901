"""Command-line front end.

Every subcommand is a thin adapter over the library: identical numbers come
out of calling the module functions directly with the same config. Heavy
imports happen inside subcommands so `ne` and `check-schedule` stay fast.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpdnes",
        description="Compression-based privacy-preserving distributed NE seeking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override base seed")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--iters", type=int, default=None, help="override iteration budget")
        p.add_argument("--parallelism", type=int, default=None, help="trial worker processes")

    p = sub.add_parser("ne", help="print the Nash equilibrium of the configured game")
    common(p)

    p = sub.add_parser("run", help="run one variant and write its CSV")
    common(p)
    p.add_argument("--variant", default=None, help="variant name (default: the only one)")
    p.add_argument("--out", default="results.csv", help="output CSV path")

    p = sub.add_parser("compare", help="run every variant; write CSV and figures")
    common(p)
    p.add_argument("--out", default="results.csv", help="output CSV path")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p = sub.add_parser("check-schedule", help="print the step-size schedule verdict")
    common(p)

    p = sub.add_parser("privacy", help="print the per-round privacy budget table")
    common(p)

    p = sub.add_parser("plot", help="render an existing CSV to figures")
    p.add_argument("csv", help="CSV written by run/compare")
    p.add_argument("--out", default=".", help="directory for the figures")
    p.add_argument("--format", default="svg", choices=("svg", "png", "pdf"))
    return parser


def _load(args):
    from .config import load_config

    config = load_config(args.config)
    # Overrides also land in the raw document so process-pool workers, which
    # rebuild their state from that document, see the same values.
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "iterations": args.iters,
        "parallelism": args.parallelism,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
            if config.raw is not None:
                config.raw[key] = value
    return config


def _cmd_ne(args) -> int:
    from .oracle import ne_linear

    config = _load(args)
    solution = ne_linear(config.game_params)
    coords = "  ".join(f"{v:.4f}" for v in solution.x_star.ravel())
    print(f"x* = [{coords}]")
    print(f"residual = {solution.residual:.3e} ({solution.method}, {solution.iterations} iterations)")
    return EXIT_OK


def _cmd_check_schedule(args) -> int:
    from .schedule import check_conditions, dp_product_check

    config = _load(args)
    schedule = config.schedule
    verdict = check_conditions(schedule)
    print(
        f"alpha_k = {schedule.c1:g}/({schedule.c2:g}k+1)^{schedule.omega1:g}  "
        f"beta_k = {schedule.c3:g}/({schedule.c2:g}k+1)^{schedule.omega2:g}"
    )
    if verdict.passes:
        print(f"pass, rate {verdict.rate_exponent:g}")
    else:
        print("fail")
        for name in verdict.failed_conditions:
            print(f"  violated: {name}")
    dp = dp_product_check(schedule)
    if dp is not None:
        print(f"privacy closed form available: c4 = {dp[0]:g}, c5 = {dp[1]:g}")
    return EXIT_OK


def _privacy_rows(config, spec):
    import numpy as np

    from .privacy import build_ledger, dsc_budget
    from .schedule import dp_product_check

    game = config.game()
    C = game.bounds.gradient_bound
    n = game.dim
    schedule = config.schedule
    horizon = config.iterations

    if spec.engine == "dsc-dnes":
        theta = spec.ymax / 2**spec.dsc_bits
        series = dsc_budget(np.arange(horizon + 1), spec.r_base, schedule, C, n, theta)
        print(f"[{spec.name}] fixed grid theta = {theta:g}, sensitivity rescaled by 1/{spec.r_base:g}^k")
        sat = int(np.argmax(series >= 1.0)) if np.any(series >= 1.0) else None
        print(f"  saturates at delta_k = 1 at k = {sat}" if sat is not None else "  never saturates")
        return series

    if (spec.compressor_doc or {}).get("type") != "stochastic-quantizer":
        print(f"[{spec.name}] no quantized broadcast, no budget to report")
        return None

    # The closed form is exact when alpha*beta is hyperbolic (exponent sum 1);
    # otherwise it is the published approximation, printed with that label next
    # to the partial sum of the actual schedule.
    theta = float(spec.compressor_doc["theta"])
    c4, c5 = schedule.effective_dp_coefficients()
    a = 2.0 * C * c4 * np.sqrt(n) / (c5 * theta)
    exact = dp_product_check(schedule) is not None
    label = "closed form" if exact else "closed form (hyperbolic approximation)"
    arg = "k+1" if c5 == 1.0 else f"{c5:g}k+1"
    print(f"[{spec.name}] {label}: delta_k = min{{1, {a:.4g} ln({arg})}}")
    ledger = build_ledger(schedule, theta, horizon, C=C, n=n)
    print(f"  ledger mode = {ledger.mode}")
    sat = ledger.saturation_iteration()
    if sat is not None:
        print(f"  saturates at delta_k = 1 at k = {sat}")
    checkpoints = [k for k in (1, 10, 100, 1000, horizon) if k <= horizon]
    for k in checkpoints:
        print(f"  k = {k:>6d}  delta_k = {ledger.delta_series[k]:.6f}")
    return ledger.delta_series


def _cmd_privacy(args) -> int:
    config = _load(args)
    for spec in config.variants:
        _privacy_rows(config, spec)
    return EXIT_OK


def _print_thresholds(config, results) -> None:
    from .harness import threshold_report

    if not config.thresholds:
        return
    print("bits to threshold:")
    for metric, level, name, bits in threshold_report(results, config.thresholds):
        reached = f"{bits}" if bits is not None else "not reached"
        print(f"  {metric} <= {level:g}  {name}: {reached}")


def _render(results, out_csv: str, fmt: str = "svg") -> None:
    from .plotting import render_all

    out = Path(out_csv)
    for fig in render_all(results, out.parent if str(out.parent) else ".", stem=out.stem, fmt=fmt):
        print(f"wrote {fig}")


def _cmd_run(args) -> int:
    from .harness import emit_csv, run_experiment

    config = _load(args)
    names = [spec.name for spec in config.variants]
    if args.variant is None:
        if len(names) != 1:
            print(f"error: --variant required, config defines {names}", file=sys.stderr)
            return EXIT_CONFIG
        args.variant = names[0]
    if args.variant not in names:
        print(f"error: unknown variant {args.variant!r}, config defines {names}", file=sys.stderr)
        return EXIT_CONFIG
    config.variants = [spec for spec in config.variants if spec.name == args.variant]
    results = run_experiment(config)
    emit_csv(results, args.out)
    print(f"wrote {args.out}")
    _print_thresholds(config, results)
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .harness import emit_csv, run_experiment

    config = _load(args)
    results = run_experiment(config)
    emit_csv(results, args.out)
    print(f"wrote {args.out}")
    for name, series in results.items():
        if series.fault:
            print(f"  note: {name} truncated at k = {series.iterations}: {series.fault}")
    _print_thresholds(config, results)
    if not args.no_figures:
        _render(results, args.out)
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .harness import read_csv
    from .plotting import render_all

    results = read_csv(args.csv)
    stem = Path(args.csv).stem
    for fig in render_all(results, args.out, stem=stem, fmt=args.format):
        print(f"wrote {fig}")
    return EXIT_OK


_COMMANDS = {
    "ne": _cmd_ne,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "check-schedule": _cmd_check_schedule,
    "privacy": _cmd_privacy,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    from .errors import CpdnesError, NumericFault

    try:
        return _COMMANDS[args.command](args)
    except NumericFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CpdnesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
