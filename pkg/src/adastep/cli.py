"""Command-line experiment runner.

Subcommands:
  run    CONFIG.json [overrides]   - execute one experiment config
  sweep  CONFIGS.json [overrides]  - execute a list of experiment configs
  rate   -i RESULTS.{jsonl,csv}    - observed convergence rate of a result file

Failures print a machine-readable JSON object on stderr and exit nonzero.
"""

import argparse
import json
import sys

from .adaptive import observed_rate
from .bench import ConfigError, ExperimentConfig, run_experiment

__all__ = ["main", "console_main"]

_OVERRIDE_FLAGS = ("problem", "scheme", "theta", "mode", "out", "seed")


def _build_parser():
    parser = argparse.ArgumentParser(prog="adastep-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_overrides(p):
        p.add_argument("--problem", help="override the problem name")
        p.add_argument("--scheme", help="override the scheme, e.g. lobatto:2 or radau:3")
        p.add_argument("--theta", type=float, help="override the marking parameter")
        p.add_argument("--mode", help="override the mode (adaptive|uniform|classical_radau)")
        p.add_argument("--out", help="override the output path prefix")
        p.add_argument("--seed", type=int, help="override the random seed")

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    add_overrides(p_run)

    p_sweep = sub.add_parser("sweep", help="run a list of experiment configs")
    p_sweep.add_argument("configs", help="path to a JSON file holding a list of configs")
    add_overrides(p_sweep)

    p_rate = sub.add_parser("rate", help="observed rate from a result file")
    p_rate.add_argument("-i", "--input", required=True, help="result file (.jsonl or .csv)")
    p_rate.add_argument("--mode", default=None, help="only use rows of this mode")
    return parser


def _apply_overrides(data, args):
    for name in _OVERRIDE_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return data


def _run_one(data, args):
    config = ExperimentConfig.from_dict(_apply_overrides(dict(data), args))
    rows = run_experiment(config)
    summary = {
        "problem": config.problem,
        "mode": config.mode,
        "rows": len(rows),
        "final_n_intervals": rows[-1].n_intervals,
        "final_eta_total": rows[-1].eta_total,
    }
    if config.out:
        summary["csv"] = config.out + ".csv"
        summary["jsonl"] = config.out + ".jsonl"
    return summary


def _load_rows(path):
    rows = []
    if path.endswith(".csv"):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            for line in fh:
                parts = line.rstrip("\n").split(",")
                rows.append({k: (v if v != "" else None) for k, v in zip(header, parts)})
    else:
        with open(path) as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
    return rows


def _cmd_rate(args):
    rows = _load_rows(args.input)
    if args.mode:
        rows = [r for r in rows if r.get("mode") == args.mode]
    counts = [float(r["n_intervals"]) for r in rows if r.get("eta_total") not in (None, "")]
    etas = [float(r["eta_total"]) for r in rows if r.get("eta_total") not in (None, "")]
    rate = observed_rate(counts, etas)
    return {"rate": rate, "points": len(counts)}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ConfigError("run expects a single config object; use sweep for lists")
            summary = _run_one(data, args)
        elif args.command == "sweep":
            with open(args.configs) as fh:
                data = json.load(fh)
            if isinstance(data, dict):
                data = data.get("experiments", [])
            if not isinstance(data, list) or not data:
                raise ConfigError("sweep expects a nonempty list of configs")
            summary = {"experiments": [_run_one(item, args) for item in data]}
        else:
            summary = _cmd_rate(args)
    except (ConfigError, ValueError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        json.dump({"error": str(exc), "type": type(exc).__name__}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def console_main():
    raise SystemExit(main())
