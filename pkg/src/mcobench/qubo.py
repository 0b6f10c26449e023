"""Compilation of mission covering problems to quadratic binary objectives.

The hard constraints (one mission per resource, buddy balance) are folded
into the objective as Lagrange penalty terms, yielding a QUBO whose energy
over any bit-vector equals ``objective + lambda * total_penalty``.  Since the
variables are binary, squared terms collapse onto the linear part.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import Assignment, McoProblem, Scenario, flat_index

__all__ = [
    "QuboModel",
    "PenaltyConfig",
    "constraint_penalty_column",
    "constraint_penalty_buddy",
    "build_qubo",
    "objective_qubo",
    "evaluate",
    "to_ising",
    "qubo_to_json",
    "qubo_from_json",
]

DEFAULT_LAMBDA = 5.0


@dataclass(eq=False)
class QuboModel:
    """Sparse quadratic polynomial over binary variables.

    ``energy(b) = offset + sum_i linear[i]*b_i + sum_{i<j} quadratic[i,j]*b_i*b_j``

    Quadratic keys are normalized to ``i < j``; diagonal contributions are
    folded into ``linear``.  Treat instances as immutable once built.
    """

    n_vars: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError("QUBO needs at least one variable")
        for i in self.linear:
            if not 0 <= i < self.n_vars:
                raise ValueError(f"linear index {i} out of range")
        for i, j in self.quadratic:
            if i == j:
                raise ValueError("quadratic terms must pair distinct variables")
            if not (0 <= i < j < self.n_vars):
                raise ValueError(f"quadratic key ({i}, {j}) not normalized or out of range")


class _QuboBuilder:
    """Accumulates squared linear expressions into sparse QUBO coefficients."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self.linear: dict[int, float] = {}
        self.quadratic: dict[tuple[int, int], float] = {}
        self.offset = 0.0

    def add_squared(self, terms: list[tuple[int, float]], const: float, weight: float = 1.0):
        """Add ``weight * (sum_k c_k x_k + const)**2``.

        Uses x**2 = x for binaries, so squared singles land on the linear part.
        """
        self.offset += weight * const * const
        for k, (i, ci) in enumerate(terms):
            self.linear[i] = self.linear.get(i, 0.0) + weight * (ci * ci + 2.0 * const * ci)
            for j, cj in terms[k + 1 :]:
                key = (i, j) if i < j else (j, i)
                self.quadratic[key] = self.quadratic.get(key, 0.0) + weight * 2.0 * ci * cj

    def build(self) -> QuboModel:
        linear = {i: c for i, c in sorted(self.linear.items()) if c != 0.0}
        quadratic = {k: c for k, c in sorted(self.quadratic.items()) if c != 0.0}
        return QuboModel(self.n_vars, linear, quadratic, self.offset)


@dataclass(frozen=True)
class PenaltyConfig:
    """Lagrange multiplier applied to every hard-constraint penalty."""

    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("penalty multiplier must be positive")


def constraint_penalty_column(problem: McoProblem, a: Assignment, r) -> float:
    """Penalty ``(column sum - 1)**2``: resource r must sit on exactly one row."""
    ri = problem.resource_index(r)
    if a.shape != (problem.n_missions, problem.n_resources):
        raise ValueError("assignment does not match problem dimensions")
    return float((int(a.bits[:, ri].sum()) - 1) ** 2)


def constraint_penalty_buddy(problem: McoProblem, a: Assignment, m) -> float:
    """Penalty ``(R1 count - R2 count)**2`` on a real mission row (scenario 2)."""
    if problem.scenario is not Scenario.S2:
        raise ValueError("buddy penalty is defined for scenario 2 only")
    mi = problem.mission_index(m)
    if mi == problem.u_index:
        raise ValueError("the unallocated mission carries no buddy constraint")
    if a.shape != (problem.n_missions, problem.n_resources):
        raise ValueError("assignment does not match problem dimensions")
    r1 = list(problem.r1_indices)
    r2 = list(problem.r2_indices)
    return float((int(a.bits[mi, r1].sum()) - int(a.bits[mi, r2].sum())) ** 2)


def _add_objective_terms(builder: _QuboBuilder, problem: McoProblem) -> None:
    qualified = problem.capability[:, 0] > 0
    for m in range(problem.u_index):
        terms = [
            (flat_index(problem, m, r), 1.0)
            for r in range(problem.n_resources)
            if qualified[r]
        ]
        builder.add_squared(terms, -float(problem.req_mission[m, 0]))
    if problem.scenario is Scenario.S1:
        w = 1.0 / problem.n_resources
        for r in range(problem.n_resources):
            terms = [(flat_index(problem, m, r), 1.0) for m in range(problem.u_index)]
            builder.add_squared(terms, 1.0 - float(problem.capability[r, 0]), weight=w)


def objective_qubo(problem: McoProblem) -> QuboModel:
    """Quadratic form of the plain objective, without constraint penalties.

    This is the cost Hamiltonian input for pipelines that carry constraints
    in the mixer instead of the objective.
    """
    builder = _QuboBuilder(problem.n_vars)
    _add_objective_terms(builder, problem)
    return builder.build()


def build_qubo(problem: McoProblem, cfg: PenaltyConfig = PenaltyConfig()) -> QuboModel:
    """Penalized QUBO: objective plus ``lam`` times every constraint penalty.

    For every bit-vector b, ``evaluate(build_qubo(p, cfg), b)`` equals
    ``objective(p, b) + lam * (column penalties + buddy penalties)``.
    """
    builder = _QuboBuilder(problem.n_vars)
    _add_objective_terms(builder, problem)
    for r in range(problem.n_resources):
        terms = [(flat_index(problem, m, r), 1.0) for m in range(problem.n_missions)]
        builder.add_squared(terms, -1.0, weight=cfg.lam)
    if problem.scenario is Scenario.S2:
        r1 = problem.r1_indices
        r2 = problem.r2_indices
        for m in range(problem.u_index):
            terms = [(flat_index(problem, m, r), 1.0) for r in r1]
            terms += [(flat_index(problem, m, r), -1.0) for r in r2]
            builder.add_squared(terms, 0.0, weight=cfg.lam)
    return builder.build()


def evaluate(q: QuboModel, bits) -> float:
    """Energy of one bit-vector."""
    b = np.asarray(bits).reshape(-1)
    if b.size != q.n_vars:
        raise ValueError(f"expected {q.n_vars} bits, got {b.size}")
    total = q.offset
    for i, c in q.linear.items():
        if b[i]:
            total += c
    for (i, j), c in q.quadratic.items():
        if b[i] and b[j]:
            total += c
    return float(total)


def to_ising(q: QuboModel) -> tuple[dict[int, float], dict[tuple[int, int], float], float]:
    """Spin form under ``x_i = (1 - s_i)/2`` (equivalently ``s_i = 1 - 2 b_i``).

    Returns fields h, couplings J (keys i < j), and a constant offset such
    that the Ising energy of the spin image of any bit-vector equals the QUBO
    energy.
    """
    h: dict[int, float] = {}
    offset = q.offset
    for i, c in q.linear.items():
        h[i] = h.get(i, 0.0) - c / 2.0
        offset += c / 2.0
    j_out: dict[tuple[int, int], float] = {}
    for (i, j), c in q.quadratic.items():
        j_out[(i, j)] = j_out.get((i, j), 0.0) + c / 4.0
        h[i] = h.get(i, 0.0) - c / 4.0
        h[j] = h.get(j, 0.0) - c / 4.0
        offset += c / 4.0
    h = {i: c for i, c in sorted(h.items()) if c != 0.0}
    j_out = {k: c for k, c in sorted(j_out.items()) if c != 0.0}
    return h, j_out, offset


def qubo_to_json(q: QuboModel) -> str:
    doc = {
        "n_vars": q.n_vars,
        "offset": q.offset,
        "linear": [[i, c] for i, c in sorted(q.linear.items())],
        "quadratic": [[i, j, c] for (i, j), c in sorted(q.quadratic.items())],
    }
    return json.dumps(doc, indent=2)


def qubo_from_json(text: str) -> QuboModel:
    doc = json.loads(text)
    return QuboModel(
        n_vars=int(doc["n_vars"]),
        linear={int(i): float(c) for i, c in doc["linear"]},
        quadratic={(int(i), int(j)): float(c) for i, j, c in doc["quadratic"]},
        offset=float(doc["offset"]),
    )
