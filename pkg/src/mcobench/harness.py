"""Random instance generation, solver pipelines, metrics, and exports.

One experiment draws seeded random mission covering instances, runs the
selected solvers on each, and scores every reported solution against the
brute-force feasible optimum (relative cost, violation counts, wall time).
Instance k derives all of its randomness from ``master seed + k``, so runs
are reproducible record-for-record; wall-clock fields are the only
non-deterministic output and can be excluded from exports.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from .model import (
    Assignment,
    McoProblem,
    Scenario,
    count_violations,
    objective,
    relative_cost,
    scenario1,
    scenario2,
)
from .optimizer import OptimizerConfig, optimize
from .pauli import QubitLayout
from .qubo import PenaltyConfig, build_qubo
from .solvers import AnnealSchedule, brute_force_constrained, simulated_anneal
from .statevector import MAX_STATE_QUBITS, QaoaParams, run_qaoa, sample, _phase_qubo

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "SOLVER_ORDER",
    "CSV_COLUMNS",
    "generate_instance",
    "run_experiment",
    "export",
    "records_to_jsonl",
    "records_from_jsonl",
    "plot_summary",
]

SOLVER_ORDER = ("BF", "SA", "QAOA", "QAOAH")

CSV_COLUMNS = (
    "instance", "solver", "scenario", "qubits", "id_qubits", "cost",
    "relative_cost", "col_violations", "row_violations",
    "wall_time_build", "wall_time_solve", "seed",
)
_TIMING_COLUMNS = ("wall_time_build", "wall_time_solve")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = Scenario.S1
    instance_count: int = 10
    qubit_budget: int = 12
    lam: float = 5.0
    p: int = 2
    reads: int = 50
    shots: int = 1000
    seed: int = 0
    solvers: tuple[str, ...] = SOLVER_ORDER
    full_s2_mixer: bool = False
    optimizer_restarts: int = 3
    optimizer_max_evals: int = 60

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        solvers = tuple(s.upper() for s in self.solvers)
        unknown = set(solvers) - set(SOLVER_ORDER)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)}")
        object.__setattr__(self, "solvers", solvers)
        if self.instance_count < 1:
            raise ValueError("need at least one instance")
        if self.qubit_budget < 4:
            raise ValueError("qubit budget below the smallest valid instance")
        uses_statevector = {"QAOA", "QAOAH"} & set(solvers)
        if uses_statevector and self.qubit_budget > MAX_STATE_QUBITS:
            raise ValueError(
                f"state-vector solvers cap the qubit budget at {MAX_STATE_QUBITS}"
            )

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario.value,
            "instance_count": self.instance_count,
            "qubit_budget": self.qubit_budget,
            "lam": self.lam,
            "p": self.p,
            "reads": self.reads,
            "shots": self.shots,
            "seed": self.seed,
            "solvers": list(self.solvers),
            "full_s2_mixer": self.full_s2_mixer,
            "optimizer_restarts": self.optimizer_restarts,
            "optimizer_max_evals": self.optimizer_max_evals,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        doc["solvers"] = tuple(doc.get("solvers", SOLVER_ORDER))
        return cls(**doc)


@dataclass(frozen=True)
class RunRecord:
    instance: int
    solver: str
    scenario: str
    qubits: int
    id_qubits: int
    cost: float
    relative_cost: float
    col_violations: int
    row_violations: int
    wall_time_build: float
    wall_time_solve: float
    seed: int
    bits: tuple[int, ...] = ()
    error: str | None = None


def generate_instance(scenario: Scenario | str, qubit_budget: int, seed: int) -> McoProblem:
    """Draw a random instance that always admits a zero-mission-cost solution.

    Mission count (incl. U) is uniform over {2, 3, 4} subject to the budget
    on allocation qubits; requirements are drawn so total demand never
    exceeds the primary supply (scenario 1) or the pair count (scenario 2).
    """
    scenario = Scenario(scenario)
    if qubit_budget < 4:
        raise ValueError("qubit budget must be at least 4")
    rng = np.random.default_rng(seed)
    min_resources = 1 if scenario is Scenario.S1 else 2
    mission_choices = [nm for nm in (2, 3, 4) if nm * min_resources <= qubit_budget]
    n_missions = int(rng.choice(mission_choices))
    max_resources = qubit_budget // n_missions

    if scenario is Scenario.S1:
        n_resources = int(rng.integers(1, max_resources + 1))
        caps = rng.integers(1, 3, size=n_resources)
        if not np.any(caps == 2):
            caps[int(rng.integers(n_resources))] = 2
        n_primary = int(np.sum(caps == 2))
        supply = n_primary
    else:
        max_pairs = max_resources // 2
        n_pairs = int(rng.integers(1, max_pairs + 1))
        n_resources = 2 * n_pairs
        supply = n_pairs

    requirements = []
    remaining = supply
    for _ in range(n_missions - 1):
        req = int(rng.integers(0, remaining + 1))
        requirements.append(req)
        remaining -= req

    if scenario is Scenario.S1:
        return scenario1(requirements, n_primary, n_resources - n_primary)
    return scenario2(requirements, n_pairs)


def _score(problem: McoProblem, bits, best_cost: float) -> dict:
    a = Assignment.from_flat(bits, problem.n_missions, problem.n_resources)
    report = count_violations(problem, a)
    return {
        "cost": objective(problem, a),
        "relative_cost": relative_cost(problem, a, best_cost),
        "col_violations": report.column_violations,
        "row_violations": report.row_violations,
        "bits": tuple(int(b) for b in a.to_flat()),
    }


def _run_qaoa_solver(problem: McoProblem, cfg: ExperimentConfig, mixer_kind: str,
                     inst_seed: int) -> tuple[tuple[int, ...], float, float]:
    """Optimize angles, sample the tuned state, return best bits + timings."""
    penalty = PenaltyConfig(cfg.lam)
    t0 = time.perf_counter()
    score_qubo = _phase_qubo(problem, mixer_kind, penalty)
    build_time = time.perf_counter() - t0

    t0 = time.perf_counter()
    ocfg = OptimizerConfig(
        restarts=cfg.optimizer_restarts,
        max_evals=cfg.optimizer_max_evals,
        seed=inst_seed,
        p=cfg.p,
    )
    trace = optimize(problem, mixer_kind, penalty, ocfg)
    best_params, _ = trace.best
    params = QaoaParams(cfg.p, best_params[: cfg.p], best_params[cfg.p:])
    final = run_qaoa(problem, mixer_kind, penalty, params)
    shots = sample(final, score_qubo, cfg.shots, seed=inst_seed)
    solve_time = time.perf_counter() - t0
    bits = shots.best[0][: problem.n_vars]
    return bits, build_time, solve_time


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run every selected solver on every generated instance.

    The brute-force optimum is always computed (it is the scoring baseline)
    but only reported when BF is among the selected solvers.  A solver
    failure on one instance produces an error record and the run continues.
    """
    records: list[RunRecord] = []
    for i in range(cfg.instance_count):
        inst_seed = cfg.seed + i
        problem = generate_instance(cfg.scenario, cfg.qubit_budget, inst_seed)
        layout = QubitLayout.for_problem(problem)
        common = {
            "instance": i,
            "scenario": problem.scenario.value,
            "qubits": problem.n_vars,
            "seed": inst_seed,
        }

        t0 = time.perf_counter()
        bf_assignment, bf_cost = brute_force_constrained(problem)
        bf_time = time.perf_counter() - t0

        for solver in (s for s in SOLVER_ORDER if s in cfg.solvers):
            id_qubits = 0
            try:
                if solver == "BF":
                    bits = bf_assignment.to_flat()
                    build_time, solve_time = 0.0, bf_time
                elif solver == "SA":
                    t0 = time.perf_counter()
                    q = build_qubo(problem, PenaltyConfig(cfg.lam))
                    build_time = time.perf_counter() - t0
                    t0 = time.perf_counter()
                    sched = AnnealSchedule(reads=cfg.reads, seed=inst_seed)
                    result = simulated_anneal(q, sched)
                    solve_time = time.perf_counter() - t0
                    bits = result.best[0]
                elif solver == "QAOA":
                    bits, build_time, solve_time = _run_qaoa_solver(
                        problem, cfg, "transverse", inst_seed
                    )
                else:  # QAOAH
                    if problem.scenario is Scenario.S1:
                        kind = "constrained_s1"
                    else:
                        kind = "constrained_s2_full" if cfg.full_s2_mixer else "constrained_s2_reduced"
                        id_qubits = layout.n_id_qubits
                    bits, build_time, solve_time = _run_qaoa_solver(
                        problem, cfg, kind, inst_seed
                    )
                scored = _score(problem, bits, bf_cost)
                records.append(RunRecord(
                    solver=solver,
                    id_qubits=id_qubits,
                    wall_time_build=build_time,
                    wall_time_solve=solve_time,
                    **common,
                    **scored,
                ))
            except Exception as exc:  # noqa: BLE001 - per-solver isolation
                records.append(RunRecord(
                    solver=solver,
                    id_qubits=id_qubits,
                    cost=float("nan"),
                    relative_cost=float("nan"),
                    col_violations=0,
                    row_violations=0,
                    wall_time_build=0.0,
                    wall_time_solve=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                    **common,
                ))
    return records


# -- exports -----------------------------------------------------------------


def _record_row(record: RunRecord, columns: tuple[str, ...]) -> list[str]:
    values = []
    for col in columns:
        v = getattr(record, col)
        values.append(repr(v) if isinstance(v, float) else str(v))
    return values


def export(records, fmt: str, path, include_timing: bool = True):
    """Write records to ``path`` as ``csv`` or ``jsonl``; returns the path.

    CSV uses the stable column order (timing columns optional, since wall
    clocks are the one non-reproducible field); JSONL carries every field
    including solution bits and round-trips losslessly.
    """
    if fmt == "csv":
        columns = CSV_COLUMNS if include_timing else tuple(
            c for c in CSV_COLUMNS if c not in _TIMING_COLUMNS
        )
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow(_record_row(record, columns))
        payload = buf.getvalue()
    elif fmt == "jsonl":
        payload = records_to_jsonl(records, include_timing=include_timing)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)
    return path


def records_to_jsonl(records, include_timing: bool = True) -> str:
    lines = []
    for record in records:
        doc = {
            "instance": record.instance,
            "solver": record.solver,
            "scenario": record.scenario,
            "qubits": record.qubits,
            "id_qubits": record.id_qubits,
            "cost": record.cost,
            "relative_cost": record.relative_cost,
            "col_violations": record.col_violations,
            "row_violations": record.row_violations,
            "wall_time_build": record.wall_time_build,
            "wall_time_solve": record.wall_time_solve,
            "seed": record.seed,
            "bits": list(record.bits),
            "error": record.error,
        }
        if not include_timing:
            for col in _TIMING_COLUMNS:
                doc.pop(col)
        lines.append(json.dumps(doc))
    return "\n".join(lines) + ("\n" if lines else "")


def records_from_jsonl(text: str) -> list[RunRecord]:
    records = []
    for line in text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        doc["bits"] = tuple(int(b) for b in doc.get("bits", ()))
        doc.setdefault("wall_time_build", 0.0)
        doc.setdefault("wall_time_solve", 0.0)
        records.append(RunRecord(**doc))
    return records


# -- plots -------------------------------------------------------------------


def plot_summary(records, out_dir) -> list:
    """Per scenario: mean relative cost, mean violations, and mean solve time
    (log scale) against allocation qubit count, one series per solver."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    if not records:
        raise ValueError("nothing to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def mean_series(rows, value):
        by_qubits: dict[int, list[float]] = {}
        for r in rows:
            v = value(r)
            if v == v:  # skip NaN from failed solvers
                by_qubits.setdefault(r.qubits, []).append(v)
        qs = sorted(by_qubits)
        return qs, [float(np.mean(by_qubits[q])) for q in qs]

    metrics = (
        ("relative_cost", "mean relative cost", lambda r: r.relative_cost, False),
        ("violations", "mean constraints violated", lambda r: r.col_violations + r.row_violations, False),
        ("solve_time", "mean solve wall time [s]", lambda r: r.wall_time_solve, True),
    )
    paths = []
    for scenario in sorted({r.scenario for r in records}):
        scenario_rows = [r for r in records if r.scenario == scenario]
        solvers = [s for s in SOLVER_ORDER if any(r.solver == s for r in scenario_rows)]
        for name, label, value, log_scale in metrics:
            fig, ax = plt.subplots(figsize=(6, 4))
            for solver in solvers:
                qs, means = mean_series([r for r in scenario_rows if r.solver == solver], value)
                if qs:
                    ax.plot(qs, means, marker="o", label=solver)
            ax.set_xlabel("allocation qubits")
            ax.set_ylabel(label)
            ax.set_title(f"{scenario}: {label}")
            if log_scale:
                ax.set_yscale("log")
            ax.legend()
            fig.tight_layout()
            path = out_dir / f"{scenario}_{name}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            paths.append(path)
    return paths
