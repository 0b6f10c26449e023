"""Classical outer loop searching QAOA angles that minimize the expectation.

Derivative-free multi-start: Nelder-Mead descent from seeded random starting
points inside the angle box, with a hard cap on objective evaluations shared
across restarts.  Every evaluation is recorded so traces can be exported and
replayed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as _sciopt

from .model import McoProblem
from .qubo import PenaltyConfig
from .statevector import QaoaParams, expectation, run_qaoa, _phase_qubo

__all__ = [
    "OptimizerConfig",
    "OptimizationTrace",
    "optimize",
    "trace_to_jsonl",
]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    max_evals: int = 400
    seed: int = 0
    p: int = 2
    gamma_box: tuple[float, float] = (0.0, 2.0 * math.pi)
    beta_box: tuple[float, float] = (0.0, math.pi)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("need at least one layer")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.max_evals < self.restarts:
            raise ValueError("evaluation budget must cover every restart")


@dataclass
class OptimizationTrace:
    evaluations: list[tuple[tuple[float, ...], float]] = field(default_factory=list)
    truncated: bool = False

    @property
    def best(self) -> tuple[tuple[float, ...], float]:
        return min(self.evaluations, key=lambda e: e[1])


class _BudgetExhausted(Exception):
    pass


def optimize(problem: McoProblem, mixer_kind: str, cfg: PenaltyConfig,
             ocfg: OptimizerConfig) -> OptimizationTrace:
    """Minimize the p-layer expectation over (gammas, betas).

    Parameters are packed as ``gammas + betas`` (length 2p).  Deterministic
    for a fixed seed; the returned best is never worse than the best starting
    point, and at most ``max_evals`` expectations are ever computed.
    """
    score_qubo = _phase_qubo(problem, mixer_kind, cfg)
    trace = OptimizationTrace()

    def objective(x: np.ndarray) -> float:
        if len(trace.evaluations) >= ocfg.max_evals:
            raise _BudgetExhausted
        params = QaoaParams(ocfg.p, tuple(x[: ocfg.p]), tuple(x[ocfg.p:]))
        value = expectation(run_qaoa(problem, mixer_kind, cfg, params), score_qubo)
        trace.evaluations.append((tuple(float(v) for v in x), value))
        return value

    rng = np.random.default_rng(ocfg.seed)
    starts = np.column_stack([
        rng.uniform(*(ocfg.gamma_box if k < ocfg.p else ocfg.beta_box), size=ocfg.restarts)
        for k in range(2 * ocfg.p)
    ])
    per_restart = ocfg.max_evals // ocfg.restarts
    try:
        for x0 in starts:
            result = _sciopt.minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={"maxfev": per_restart, "xatol": 1e-3, "fatol": 1e-7},
            )
            if result.status == 1:  # stopped by the evaluation cap, not convergence
                trace.truncated = True
    except _BudgetExhausted:
        trace.truncated = True
    return trace


def trace_to_jsonl(trace: OptimizationTrace) -> str:
    lines = [
        json.dumps({"eval_index": k, "params": list(params), "expectation": value})
        for k, (params, value) in enumerate(trace.evaluations)
    ]
    return "\n".join(lines) + ("\n" if lines else "")
