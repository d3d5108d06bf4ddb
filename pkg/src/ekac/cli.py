"""Batch entry point.

Subcommands: stats (window statistics as JSON), experiment (moments CSV +
fit JSON + histogram CSV), moments (moments CSV only), verify (the exact
identity suite). Exit codes: 0 success, 1 config error, 2 runtime error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, EkacError
from .experiment import (
    PRESET_NAMES,
    ExperimentConfig,
    config_hash,
    load_config,
    preset_config,
    run_experiment,
    serialize_config,
    stats_dict,
)
from .oracle import run_suite


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", help="TOML experiment config")
    sub.add_argument(
        "--preset",
        choices=PRESET_NAMES,
        help="built-in configuration (alternative to --config)",
    )
    sub.add_argument("--x", type=int, help="override x for a preset")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", metavar="DIR", help="override the output directory")
    sub.add_argument(
        "--workers",
        type=int,
        help="parallel partitions (default: EKAC_WORKERS or cpu count)",
    )


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
        if args.x is not None:
            raise ConfigError("--x only applies to --preset runs")
    elif args.preset:
        cfg = preset_config(args.preset, x=args.x or 1_000_000)
    else:
        raise ConfigError("one of --config or --preset is required")
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates).validate()
    return cfg


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"config": config_hash(cfg), "seed": cfg.seed}


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    payload = stats_dict(cfg)
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "stats.json"), "w") as fh:
            fh.write(text + "\n")
    return 0


def _write_experiment_outputs(cfg, result) -> list[str]:
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    prov = _provenance(cfg)
    paths = []

    p = os.path.join(out_dir, "moments.csv")
    with open(p, "w") as fh:
        fh.write(result.moment_report.to_csv_text(prov))
    paths.append(p)

    p = os.path.join(out_dir, "fit.json")
    payload = result.fit_report.summary_dict()
    payload.update(prov)
    payload["diagnostics"] = result.diagnostics
    payload["config_toml"] = serialize_config(cfg)
    with open(p, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    paths.append(p)

    p = os.path.join(out_dir, "histogram.csv")
    with open(p, "w") as fh:
        fh.write(result.fit_report.histogram_csv_text(prov))
    paths.append(p)
    return paths


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    result = run_experiment(cfg, workers=args.workers)
    paths = _write_experiment_outputs(cfg, result)
    print(f"z = {result.z:.6g}  elapsed = {result.elapsed:.2f}s")
    for row in result.moment_report.rows:
        print(
            f"m={row.m}  ratio={row.ratio:+.6f}  predicted={row.predicted:.1f}"
        )
    print(f"ks = {result.fit_report.ks:.6f}  n = {result.fit_report.n}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    result = run_experiment(cfg, workers=args.workers)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "moments.csv")
    with open(path, "w") as fh:
        fh.write(result.moment_report.to_csv_text(_provenance(cfg)))
    print(result.moment_report.to_csv_text(_provenance(cfg)), end="")
    print(f"wrote {path}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    report = run_suite(
        seed=args.seed if args.seed is not None else 20_260_810,
        inject_failure=args.inject_failure,
        fast=args.fast,
    )
    text = report.to_text()
    print(text, end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.txt"), "w") as fh:
            fh.write(text)
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ekac",
        description=(
            "Empirical normal-law checks for polynomials in strongly "
            "additive functions, plus an exact identity verification suite."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("stats", help="window statistics as JSON")
    _add_config_args(s)
    s.set_defaults(fn=cmd_stats)

    s = subs.add_parser(
        "experiment", help="moments CSV, fit JSON, histogram CSV"
    )
    _add_config_args(s)
    s.set_defaults(fn=cmd_experiment)

    s = subs.add_parser("moments", help="moment table only")
    _add_config_args(s)
    s.set_defaults(fn=cmd_moments)

    s = subs.add_parser("verify", help="run the exact identity suite")
    s.add_argument("--seed", type=int, help="suite seed (default fixed)")
    s.add_argument("--out", metavar="DIR", help="also write verify.txt here")
    s.add_argument(
        "--fast", action="store_true", help="smaller random samples"
    )
    s.add_argument(
        "--inject-failure",
        action="store_true",
        help="add a deliberately perturbed check (negative control)",
    )
    s.set_defaults(fn=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (EkacError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
