"""Command-line experiment runner.

Each subcommand maps to one experiment; configuration merges three layers
(subcommand defaults <- --config file <- explicit flags).  Per-sample rows
go out as JSON lines (a leading "run" object embeds the resolved config,
summary, checks, and RNG provenance) or as CSV with a JSON summary
sidecar.  Exit status: 0 all checks passed, 1 check failure, 2 config
error.  The optional environment variable CGLAB_WORKERS caps the worker
count for per-sample concurrency; --plot renders figures next to the
delimited output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .experiments import (ExperimentConfig, run_ground_state, run_hilbert_table,
                          run_localization, run_phase_diagram, run_seba_band,
                          run_seba_direct, run_single_extended, run_verify)

__all__ = ["main"]

_EXPERIMENTS = {
    "ground-state": (run_ground_state, {
        "lam_values": (0.5, 2.0), "M_values": (100_000,), "n_samples": 200}),
    "localization": (run_localization, {
        "lam": 1.0, "center": -0.5, "M_values": (100_000,), "n_samples": 200}),
    "seba-band": (run_seba_band, {
        "lam": 1.0, "center": "E_hat_zero",
        "M_values": (1000, 10_000, 100_000), "n_samples": 100}),
    "single-extended": (run_single_extended, {
        "lam": 1.0, "center": "E_hat_minus1", "M_values": (100_000,),
        "n_samples": 100}),
    "phase-diagram": (run_phase_diagram, {
        "lam_values": (0.8, 1.0, 1.6, 2.0),
        "center_values": (-0.5, "E_hat_minus1", "E_hat_zero"),
        "M_values": (10_000,), "n_samples": 60}),
    "seba-direct": (run_seba_direct, {
        "W": 5.0, "alpha": (0.0, 5.0, 20.0, -5.0, -20.0), "n_samples": 2000}),
    "hilbert-table": (run_hilbert_table, {"n_samples": 1}),
    "verify": (run_verify, {"n_samples": 1}),
}


def _parse_center(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cglab",
        description="Monte Carlo experiments for the rank-one-plus-disorder "
                    "random operator")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH",
                       help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int, dest="n_samples")
        p.add_argument("--M", type=int, action="append", dest="M_values",
                       help="repeat for an M sweep")
        p.add_argument("--lambda", type=float, dest="lam")
        p.add_argument("--center", type=_parse_center,
                       help="number or E_hat_minus1 / E_hat_zero")
        p.add_argument("--window", type=float, dest="W")
        p.add_argument("--alpha", type=float, action="append")
        p.add_argument("--L", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=("jsonl", "csv"), dest="fmt")
        p.add_argument("--plot", action="store_true",
                       help="render figures next to the output")
    return parser


def _load_config(args) -> ExperimentConfig:
    merged = dict(_EXPERIMENTS[args.experiment][1])
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            merged.update(json.load(fh))
    for key in ("seed", "n_samples", "M_values", "lam", "center", "W",
                "alpha", "L", "tol", "out", "fmt"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged["experiment"] = args.experiment
    return ExperimentConfig.from_mapping(merged)


def _record_header(record) -> dict:
    return {"kind": "run", "experiment": record.experiment,
            "config": record.config, "summary": record.summary,
            "checks": record.checks, "passed": record.passed,
            "wall_time_s": record.wall_time_s, "rng": record.rng}


def _as_jsonl(record) -> str:
    lines = [json.dumps(_record_header(record), sort_keys=True)]
    lines += [json.dumps({"kind": "row", **row}, sort_keys=True)
              for row in record.rows]
    return "\n".join(lines) + "\n"


def _as_csv(record) -> str:
    fields: list = []
    for row in record.rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for row in record.rows:
        writer.writerow({k: (json.dumps(v) if isinstance(v, (list, dict))
                             else v) for k, v in row.items()})
    return buf.getvalue()


def _emit(record, out: str | None, fmt: str):
    text = _as_jsonl(record) if fmt == "jsonl" else _as_csv(record)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        if fmt == "csv":
            with open(out + ".summary.json", "w", encoding="utf-8") as fh:
                json.dump(_record_header(record), fh, sort_keys=True, indent=1)
    else:
        sys.stdout.write(text)
        if fmt == "csv":
            json.dump(_record_header(record), sys.stderr, sort_keys=True)
            sys.stderr.write("\n")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        runner = _EXPERIMENTS[args.experiment][0]
        record = runner(config)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"cglab: config error: {exc}", file=sys.stderr)
        return 2
    _emit(record, config.out, config.fmt)
    if args.plot:
        from .report import render
        outdir = os.path.dirname(os.path.abspath(config.out)) if config.out \
            else os.getcwd()
        for path in render(record, outdir):
            print(f"cglab: wrote {path}", file=sys.stderr)
    for check in record.checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"cglab: [{status}] {check['name']}", file=sys.stderr)
    return 0 if record.passed else 1


if __name__ == "__main__":
    sys.exit(main())
