"""Benchmark command line: generate instances, run solver suites, plot results.

    mco-bench generate --scenario s1 --instances 5 --max-qubits 12 --seed 7 --out problems/
    mco-bench run --scenario s2 --instances 20 --max-qubits 10 --solvers BF,SA --out results/
    mco-bench plot --records results/records.csv --out results/

``run`` also accepts ``--config FILE`` with a JSON mirror of the experiment
configuration; explicit flags override config values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig,
    export,
    generate_instance,
    plot_summary,
    records_from_jsonl,
    run_experiment,
)
from .model import problem_to_json


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=["s1", "s2"], default=None)
    parser.add_argument("--instances", type=int, default=None, metavar="N")
    parser.add_argument("--max-qubits", type=int, default=None, metavar="N",
                        help="cap on allocation qubits (missions x resources)")
    parser.add_argument("--seed", type=int, default=None, metavar="N")
    parser.add_argument("--out", type=Path, default=Path("."), metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mco-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write random problem instances as JSON")
    _add_common(gen)

    run = sub.add_parser("run", help="run the solver suite and export records")
    _add_common(run)
    run.add_argument("--lambda", dest="lam", type=float, default=None, metavar="F",
                     help="Lagrange multiplier (default 5)")
    run.add_argument("--p", type=int, default=None, metavar="N", help="QAOA layers (default 2)")
    run.add_argument("--reads", type=int, default=None, metavar="N",
                     help="annealer reads per instance (default 50)")
    run.add_argument("--shots", type=int, default=None, metavar="N",
                     help="state-vector samples per instance (default 1000)")
    run.add_argument("--solvers", default=None, metavar="LIST",
                     help="comma-separated subset of BF,SA,QAOA,QAOAH")
    run.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    run.add_argument("--config", type=Path, default=None, metavar="FILE",
                     help="JSON experiment config; flags override its values")
    run.add_argument("--full-s2-mixer", action="store_true", default=None,
                     help="use the column-swap mixer instead of the reduced one")

    plot = sub.add_parser("plot", help="render summary charts from exported records")
    plot.add_argument("--records", type=Path, required=True, metavar="FILE",
                      help="records file produced by `run` (csv or jsonl)")
    plot.add_argument("--out", type=Path, default=Path("."), metavar="DIR")
    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig()
    if getattr(args, "config", None):
        base = ExperimentConfig.from_json(args.config.read_text())
    overrides = {}
    mapping = {
        "scenario": "scenario",
        "instances": "instance_count",
        "max_qubits": "qubit_budget",
        "lam": "lam",
        "p": "p",
        "reads": "reads",
        "shots": "shots",
        "seed": "seed",
        "full_s2_mixer": "full_s2_mixer",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[field_name] = value
    if getattr(args, "solvers", None):
        overrides["solvers"] = tuple(s.strip() for s in args.solvers.split(","))
    merged = {**_config_dict(base), **overrides}
    return ExperimentConfig(**merged)


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "instance_count": cfg.instance_count,
        "qubit_budget": cfg.qubit_budget,
        "lam": cfg.lam,
        "p": cfg.p,
        "reads": cfg.reads,
        "shots": cfg.shots,
        "seed": cfg.seed,
        "solvers": cfg.solvers,
        "full_s2_mixer": cfg.full_s2_mixer,
        "optimizer_restarts": cfg.optimizer_restarts,
        "optimizer_max_evals": cfg.optimizer_max_evals,
    }


def _cmd_generate(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(cfg.instance_count):
        problem = generate_instance(cfg.scenario, cfg.qubit_budget, cfg.seed + i)
        path = args.out / f"instance_{i:04d}.json"
        path.write_text(problem_to_json(problem))
        print(f"wrote {path}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    records = run_experiment(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"records.{args.format}"
    export(records, args.format, path)
    failures = sum(1 for r in records if r.error)
    print(f"wrote {len(records)} records to {path}" + (f" ({failures} failed)" if failures else ""))
    return 0


def _load_records(path: Path):
    if path.suffix == ".jsonl":
        return records_from_jsonl(path.read_text())
    import csv as _csv

    from .harness import RunRecord

    records = []
    with open(path, newline="") as fh:
        for row in _csv.DictReader(fh):
            records.append(RunRecord(
                instance=int(row["instance"]),
                solver=row["solver"],
                scenario=row["scenario"],
                qubits=int(row["qubits"]),
                id_qubits=int(row["id_qubits"]),
                cost=float(row["cost"]),
                relative_cost=float(row["relative_cost"]),
                col_violations=int(row["col_violations"]),
                row_violations=int(row["row_violations"]),
                wall_time_build=float(row.get("wall_time_build", 0.0)),
                wall_time_solve=float(row.get("wall_time_solve", 0.0)),
                seed=int(row["seed"]),
            ))
    return records


def _cmd_plot(args: argparse.Namespace) -> int:
    records = _load_records(args.records)
    paths = plot_summary(records, args.out)
    for path in paths:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"generate": _cmd_generate, "run": _cmd_run, "plot": _cmd_plot}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
