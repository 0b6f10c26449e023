"""Classical reference solvers: exact brute force and simulated annealing.

Brute force enumerates feasible assignments only (one-hot columns, plus
balanced rows in scenario 2) and is the cost baseline every other solver is
scored against.  Because resources with identical capability are
interchangeable, the default path enumerates per-class allocation counts and
expands a single canonical representative; the unpruned per-resource search
is kept as its oracle.

Simulated annealing is the desk-scale stand-in for a hardware annealer:
single-spin-flip Metropolis sweeps over a geometric inverse-temperature ramp,
vectorized across reads with per-read derived seeds.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .model import Assignment, McoProblem, Scenario, objective
from .qubo import QuboModel, evaluate

__all__ = [
    "SampleSet",
    "AnnealSchedule",
    "brute_force_constrained",
    "simulated_anneal",
    "sampleset_to_jsonl",
    "sampleset_from_jsonl",
]


@dataclass(frozen=True)
class SampleSet:
    """Solver output: unique bit-vectors with energies and multiplicities."""

    samples: tuple[tuple[tuple[int, ...], float, int], ...]
    solver_meta: dict = field(default_factory=dict)

    @property
    def best(self) -> tuple[tuple[int, ...], float, int]:
        return min(self.samples, key=lambda s: (s[1], s[0]))

    @property
    def total_reads(self) -> int:
        return sum(s[2] for s in self.samples)


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    reads: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be positive")
        if not 0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")


# -- brute force --------------------------------------------------------------


def _compositions(total: int, parts: int):
    """All ways to split ``total`` into ``parts`` non-negative ordered counts."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _expand_counts(problem: McoProblem, class_columns: list[tuple[int, ...]],
                   class_counts: list[tuple[int, ...]]) -> np.ndarray:
    """Canonical assignment for per-class mission counts.

    Rows are filled top-down; each row takes the largest-indexed still-free
    columns of every class, which yields the lexicographically smallest flat
    bit-vector within the permutation orbit.
    """
    nm, nr = problem.n_missions, problem.n_resources
    bits = np.zeros((nm, nr), dtype=np.int8)
    available = [list(cols) for cols in class_columns]
    for m in range(nm):
        for cls, counts in enumerate(class_counts):
            take = counts[m]
            if take:
                chosen = available[cls][-take:]
                del available[cls][-take:]
                bits[m, chosen] = 1
    return bits


def _feasible_count_vectors(problem: McoProblem):
    """Yield per-class count tuples covering every feasible orbit exactly once."""
    nm = problem.n_missions
    if problem.scenario is Scenario.S1:
        primaries = problem.primary_indices
        secondaries = problem.secondary_indices
        classes = [primaries, secondaries] if secondaries else [primaries]
        for combo in itertools.product(
            *(_compositions(len(cols), nm) for cols in classes)
        ):
            yield [tuple(cols) for cols in classes], list(combo)
    else:
        r1, r2 = problem.r1_indices, problem.r2_indices
        for c1 in _compositions(len(r1), nm):
            # Balanced rows force identical counts on the R2 side.
            yield [r1, r2], [c1, c1]


def _count_vector_cost(problem: McoProblem, class_counts: list[tuple[int, ...]]) -> float:
    nm = problem.n_missions
    total = 0.0
    if problem.scenario is Scenario.S1:
        n_primary = len(problem.primary_indices)
        counts_p = class_counts[0]
        counts_s = class_counts[1] if len(class_counts) > 1 else (0,) * nm
        for m in range(problem.u_index):
            row = counts_p[m] + counts_s[m]
            total += (row - int(problem.req_mission[m, 0])) ** 2
        # Precedence: a primary on U or a secondary off U each cost 1.
        n_secondary = problem.n_resources - n_primary
        pc = counts_p[-1] + (n_secondary - counts_s[-1])
        total += pc / problem.n_resources
    else:
        counts_r1 = class_counts[0]
        for m in range(problem.u_index):
            total += (counts_r1[m] - int(problem.req_mission[m, 0])) ** 2
    return total


def brute_force_constrained(problem: McoProblem, pruned: bool = True) -> tuple[Assignment, float]:
    """Exact minimum-cost feasible assignment.

    Feasibility means every column is one-hot (each resource on exactly one
    mission, possibly U) and, in scenario 2, every real row balances R1
    against R2.  Ties break toward the lexicographically smallest flat
    bit-vector.  ``pruned=False`` searches per-resource assignments directly
    and exists as the correctness oracle for the symmetry-pruned default.
    """
    if problem.scenario is Scenario.S2 and len(problem.r1_indices) != len(problem.r2_indices):
        raise ValueError("scenario 2 requires equally sized resource groups")
    best: tuple[float, tuple[int, ...], np.ndarray] | None = None
    if pruned:
        for class_columns, class_counts in _feasible_count_vectors(problem):
            cost = _count_vector_cost(problem, class_counts)
            if best is not None and cost > best[0]:
                continue
            bits = _expand_counts(problem, class_columns, class_counts)
            key = (cost, tuple(bits.reshape(-1)))
            if best is None or key < (best[0], best[1]):
                best = (cost, key[1], bits)
    else:
        nm, nr = problem.n_missions, problem.n_resources
        r1 = set(problem.r1_indices)
        r2 = set(problem.r2_indices)
        for placement in itertools.product(range(nm), repeat=nr):
            if problem.scenario is Scenario.S2:
                ok = True
                for m in range(problem.u_index):
                    ones = [r for r, pm in enumerate(placement) if pm == m]
                    if sum(r in r1 for r in ones) != sum(r in r2 for r in ones):
                        ok = False
                        break
                if not ok:
                    continue
            bits = np.zeros((nm, nr), dtype=np.int8)
            for r, m in enumerate(placement):
                bits[m, r] = 1
            cost = objective(problem, Assignment(bits))
            key = (cost, tuple(bits.reshape(-1)))
            if best is None or key < (best[0], best[1]):
                best = (cost, key[1], bits)
    assert best is not None
    return Assignment(best[2]), float(best[0])


# -- simulated annealing -------------------------------------------------------


def _dense_coefficients(q: QuboModel) -> tuple[np.ndarray, np.ndarray]:
    h = np.zeros(q.n_vars)
    for i, c in q.linear.items():
        h[i] = c
    w = np.zeros((q.n_vars, q.n_vars))
    for (i, j), c in q.quadratic.items():
        w[i, j] = c
        w[j, i] = c
    return h, w


def simulated_anneal(q: QuboModel, sched: AnnealSchedule = AnnealSchedule()) -> SampleSet:
    """Sample low-energy bit-vectors with Metropolis annealing.

    Every read starts from the all-zero state, sweeps the variables in index
    order under a geometric beta ramp, and reports the lowest-energy
    configuration it visited (so the best sample can never be worse than the
    all-zero state).  Read k draws its randomness from ``seed + k``, making
    reads independent and order-insensitive.
    """
    n, reads, sweeps = q.n_vars, sched.reads, sched.sweeps
    h, w = _dense_coefficients(q)
    betas = sched.beta_start * (sched.beta_end / sched.beta_start) ** (
        np.arange(sweeps) / max(sweeps - 1, 1)
    )
    uniforms = np.empty((reads, sweeps * n))
    for k in range(reads):
        uniforms[k] = np.random.default_rng(sched.seed + k).random(sweeps * n)

    t0 = time.perf_counter()
    state = np.zeros((reads, n), dtype=np.int8)
    fields = np.tile(h, (reads, 1))  # per-read local field h_i + sum_j w_ij b_j
    energy = np.zeros(reads)
    best_energy = energy.copy()
    best_state = state.copy()
    step = 0
    for s in range(sweeps):
        beta = betas[s]
        for i in range(n):
            delta = (1 - 2 * state[:, i]) * fields[:, i]
            accept = (delta <= 0) | (uniforms[:, step] < np.exp(-beta * np.clip(delta, 0, 700)))
            step += 1
            if accept.any():
                flip = np.where(accept)[0]
                sign = (1 - 2 * state[flip, i]).astype(np.float64)
                state[flip, i] ^= 1
                energy[flip] += delta[flip]
                fields[flip] += sign[:, None] * w[i]
                improved = flip[energy[flip] < best_energy[flip]]
                if improved.size:
                    best_energy[improved] = energy[improved]
                    best_state[improved] = state[improved]
    wall = time.perf_counter() - t0

    merged: dict[tuple[int, ...], int] = {}
    for k in range(reads):
        bits = tuple(int(b) for b in best_state[k])
        merged[bits] = merged.get(bits, 0) + 1
    samples = tuple(
        (bits, evaluate(q, bits), count) for bits, count in sorted(merged.items())
    )
    meta = {"reads": reads, "seed": sched.seed, "wall_time": wall}
    return SampleSet(samples=samples, solver_meta=meta)


# -- serialization -------------------------------------------------------------


def sampleset_to_jsonl(ss: SampleSet) -> str:
    lines = [
        json.dumps({"bits": list(bits), "energy": energy, "count": count})
        for bits, energy, count in ss.samples
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def sampleset_from_jsonl(text: str) -> SampleSet:
    samples = []
    for line in text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        samples.append((tuple(int(b) for b in doc["bits"]), float(doc["energy"]), int(doc["count"])))
    return SampleSet(samples=tuple(samples))
