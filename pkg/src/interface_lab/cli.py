"""Command-line front end.

Subcommands: kernel-check, fpt, occupation, martingale, pde-vs-mc.
Precedence: built-in defaults < --config JSON file < explicit flags.
Exit codes: 0 all asserted diagnostics pass, 1 an asserted diagnostic
failed, 2 configuration error, 3 I/O error.  Data goes to --out (or
stdout); human-readable pass/fail lines go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .config import EXPERIMENTS, RunConfig, default_config
from .experiments import run_experiment
from .report import ExperimentReport, curve_to_csv

_FLOAT_FLAGS = {
    "d_plus": "--d-plus",
    "d_minus": "--d-minus",
    "dt": "--dt",
    "t_max": "--t-max",
    "y0": "--y0",
    "detector": "--detector",
    "half_width": "--half-width",
}
_INT_FLAGS = {
    "paths": "--paths",
    "grid_nodes": "--grid-nodes",
    "seed": "--seed",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interface-lab",
        description="Monte Carlo / PDE experiments for diffusion across a sharp interface",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        for field_name, flag in _FLOAT_FLAGS.items():
            p.add_argument(flag, dest=field_name, type=float, default=None)
        for field_name, flag in _INT_FLAGS.items():
            p.add_argument(flag, dest=field_name, type=int, default=None)
        p.add_argument("--interface", dest="interface", default=None,
                       help="flux | half | custom:<value>")
        p.add_argument("--alpha", dest="alpha_override", type=float, default=None,
                       help="override the transmission parameter (discrepancy runs)")
        p.add_argument("--lambdas", dest="lambdas", default=None,
                       help="comma-separated interface-parameter sweep")
        p.add_argument("--out", dest="out", default=None)
        p.add_argument("--format", dest="format", choices=("csv", "json"), default=None)
        p.add_argument("--config", dest="config_file", default=None,
                       help="JSON file of config defaults; explicit flags win")
    return parser


def _parse_lambdas(raw: str) -> tuple:
    try:
        values = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"--lambdas must be comma-separated numbers, got {raw!r}")
    if not values:
        raise ValueError("--lambdas must contain at least one value")
    return values


def parse(argv=None) -> RunConfig:
    """Flags (plus optional config file) to a validated RunConfig."""
    args = _build_parser().parse_args(argv)
    overrides = {}

    if args.config_file is not None:
        try:
            with open(args.config_file) as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ValueError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file is not valid JSON: {exc}")
        if not isinstance(file_values, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise ValueError(f"unknown config file fields: {sorted(unknown)}")
        file_values.pop("experiment", None)
        if "lambdas" in file_values:
            file_values["lambdas"] = tuple(file_values["lambdas"])
        if "martingale_alphas" in file_values and file_values["martingale_alphas"] is not None:
            file_values["martingale_alphas"] = tuple(file_values["martingale_alphas"])
        overrides.update(file_values)

    for field_name in list(_FLOAT_FLAGS) + list(_INT_FLAGS) + [
        "interface", "alpha_override", "out", "format",
    ]:
        value = getattr(args, field_name)
        if value is not None:
            overrides[field_name] = value
    if args.lambdas is not None:
        overrides["lambdas"] = _parse_lambdas(args.lambdas)

    return default_config(args.experiment, **overrides)


def _emit(report: ExperimentReport, cfg: RunConfig) -> None:
    if cfg.format == "json":
        text = report.to_json()
        if cfg.out is None:
            sys.stdout.write(text)
        else:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        return
    # csv: one file (or stdout section) per curve table
    if cfg.out is None:
        for name, columns in report.curves.items():
            sys.stdout.write(f"# {name}\n")
            sys.stdout.write(curve_to_csv(columns))
            sys.stdout.write("\n")
        return
    stem = cfg.out[:-4] if cfg.out.endswith(".csv") else cfg.out
    for name, columns in report.curves.items():
        with open(f"{stem}_{name}.csv", "w") as fh:
            fh.write(curve_to_csv(columns))


def run_and_emit(cfg: RunConfig) -> int:
    """Run the configured experiment, write outputs, map results to an exit code."""
    report = run_experiment(cfg)
    try:
        _emit(report, cfg)
    except OSError as exc:
        print(f"interface-lab: I/O error: {exc}", file=sys.stderr)
        return 3
    for d in report.diagnostics:
        status = "PASS" if d.passed else "FAIL"
        gate = "" if d.asserted else " (reported, not asserted)"
        print(
            f"[{status}] {d.name}: measured {d.measured:.6g} {d.comparison} "
            f"threshold {d.threshold:.6g}{gate}",
            file=sys.stderr,
        )
    return 0 if report.passed else 1


def main(argv=None) -> int:
    try:
        cfg = parse(argv)
    except ValueError as exc:
        print(f"interface-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    return run_and_emit(cfg)


if __name__ == "__main__":
    sys.exit(main())
