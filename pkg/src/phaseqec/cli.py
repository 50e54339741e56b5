"""Command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 configuration or input error,
3 numerical failure (fit did not converge).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .analysis import FitError, fit_exponential, fit_log_linear, initial_slope, read_curve_csv
from .config import ConfigError, ExperimentConfig, defaults_for
from .experiments import run_alanine, run_custom, run_tce

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("phaseqec")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--samples", type=int,
                   help="Monte Carlo samples; enables the Monte Carlo oracle run")
    p.add_argument("--mode", choices=("decode", "correct", "both"))
    p.add_argument("--slope-window", type=int, help="points used for initial slopes")
    p.add_argument("--workers", type=int, help="threads for delay points")
    p.add_argument("--term-by-term", action="store_true", default=None,
                   help="push each product-operator term through separately")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseqec",
        description="Simulate the three-spin phase-error-correcting code.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alanine", help="per-term curves and pseudopure recombination")
    _add_common(p)
    p = sub.add_parser("tce", help="entanglement fidelity, decode-only vs corrected")
    _add_common(p)
    p = sub.add_parser("custom", help="tce protocol with a user-supplied encoder network")
    p.add_argument("circuit", help="circuit text file (encoder; decoder is its inverse)")
    _add_common(p)

    p = sub.add_parser("fit", help="fit a delay,intensity[,sigma] CSV")
    p.add_argument("csv", help="input curve")
    p.add_argument("--method", choices=("log-linear", "exponential", "both"), default="both")
    p.add_argument("--slope-window", type=int, default=4)
    p.add_argument("--out", help="also write fit.csv into this directory")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cmd = args.command
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, cmd)
    else:
        cfg = defaults_for(cmd)
    changes = {}
    if args.out is not None:
        changes["output"] = args.out
    if args.seed is not None:
        changes["mc_seed"] = args.seed
    if args.samples is not None:
        changes["mc_samples"] = args.samples
        changes["mc_enabled"] = True
    if args.mode is not None:
        changes["mode"] = args.mode
    if args.slope_window is not None:
        changes["slope_window"] = args.slope_window
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.term_by_term:
        changes["term_by_term"] = True
    if cmd == "custom":
        changes["circuit"] = args.circuit
    return cfg.replace(**changes) if changes else cfg


def _fit_command(args) -> int:
    curve = read_curve_csv(args.csv)
    rows = []
    if args.method in ("log-linear", "both"):
        r = fit_log_linear(curve)
        rows.append([r.method, r.slope, r.intercept, r.residual_norm])
    if args.method in ("exponential", "both"):
        r = fit_exponential(curve)
        rows.append([r.method, r.slope, r.intercept, r.residual_norm])
    if len(curve) >= args.slope_window and all(curve.intensities[: args.slope_window] > 0):
        rows.append(["initial-slope", initial_slope(curve, args.slope_window), "", ""])
    header = ["method", "slope", "intercept", "residual_norm"]
    fmt = [[v if isinstance(v, str) else repr(float(v)) for v in row] for row in rows]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(fmt)
    if args.out:
        if not args.out.strip():
            raise ConfigError("output directory must be a non-empty path")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "fit.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(fmt)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "fit":
            return _fit_command(args)
        cfg = resolve_config(args)
        if args.command == "alanine":
            summary = run_alanine(cfg)
        elif args.command == "tce":
            summary = run_tce(cfg)
        else:
            summary = run_custom(cfg, args.circuit)
    except ConfigError as exc:
        print(f"phaseqec: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as exc:
        print(f"phaseqec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"phaseqec: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"phaseqec: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _report(summary)
    return EXIT_OK


def _report(summary: dict) -> None:
    slopes = summary.get("initial_slope", {})
    for name, value in slopes.items():
        print(f"initial slope [{name}]: {'n/a' if value is None else f'{value:.6g}'}")
    if summary.get("slope_ratio") is not None:
        print(f"slope ratio (decode/correct): {summary['slope_ratio']:.4g}")
    if "recombination_max_abs_diff" in summary:
        print(f"recombined vs full matrix: max |diff| = {summary['recombination_max_abs_diff']:.3g}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
