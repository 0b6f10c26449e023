"""Mission covering problems: data model, scenario builders, and scoring.

A mission covering problem allocates resources (columns) to missions (rows).
The last mission is always the artificial "unallocated" mission U that absorbs
idle resources, so every resource is assigned to exactly one row in a feasible
solution.  Two concrete scenario families are supported:

* Scenario 1 ("primary/secondary"): one qualification, resource capability is
  1 (secondary) or 2 (primary).  Secondaries should only be used once all
  primaries are placed, which is scored by a precedence cost.
* Scenario 2 ("buddy system"): two qualifications split the resources into two
  equal groups R1/R2, and every mission row must use equally many resources
  from each group.

Costs are squared errors; hard constraints (one mission per resource, buddy
balance) are *not* part of the objective here -- they are counted by
:func:`count_violations` and penalized in the QUBO layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Scenario",
    "McoProblem",
    "Assignment",
    "ViolationReport",
    "scenario1",
    "scenario2",
    "flat_index",
    "mission_cost",
    "precedence_cost",
    "objective",
    "count_violations",
    "relative_cost",
    "problem_to_json",
    "problem_from_json",
]


class Scenario(str, Enum):
    S1 = "s1"
    S2 = "s2"


def _frozen_int_array(values, shape=None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class McoProblem:
    """A mission covering instance.

    Attributes
    ----------
    scenario:
        Which rule set the instance follows.
    missions:
        Mission identifiers; the last entry is always the unallocated
        mission U.
    resources:
        Resource identifiers.
    qualifications:
        Qualification identifiers (one for scenario 1, two for scenario 2).
    capability:
        Integer array of shape (n_resources, n_qualifications); entry (r, q)
        scores how well resource r performs qualification q, 0 meaning
        "not qualified".
    req_mission:
        Integer array of shape (n_missions, n_qualifications); entry (m, q)
        is how many q-qualified resources mission m needs.  The U row is
        all zeros.
    req_resource:
        Integer array of shape (n_resources, n_qualifications); all zeros in
        scenario 1, the buddy pattern in scenario 2.
    """

    scenario: Scenario
    missions: tuple[str, ...]
    resources: tuple[str, ...]
    qualifications: tuple[str, ...]
    capability: np.ndarray
    req_mission: np.ndarray
    req_resource: np.ndarray

    def __post_init__(self):
        nm, nr, nq = len(self.missions), len(self.resources), len(self.qualifications)
        if nm < 2:
            raise ValueError("need at least one real mission plus the U mission")
        if nr < 1:
            raise ValueError("need at least one resource")
        object.__setattr__(self, "capability", _frozen_int_array(self.capability, (nr, nq)))
        object.__setattr__(self, "req_mission", _frozen_int_array(self.req_mission, (nm, nq)))
        object.__setattr__(self, "req_resource", _frozen_int_array(self.req_resource, (nr, nq)))
        if np.any(self.req_mission[-1] != 0):
            raise ValueError("the unallocated mission must have zero requirements")
        if self.scenario is Scenario.S1:
            if nq != 1:
                raise ValueError("scenario 1 has exactly one qualification")
            if not np.all(np.isin(self.capability, (1, 2))):
                raise ValueError("scenario 1 capabilities must be 1 or 2")
        elif self.scenario is Scenario.S2:
            if nq != 2:
                raise ValueError("scenario 2 has exactly two qualifications")
            if not np.all(np.isin(self.capability, (0, 1))):
                raise ValueError("scenario 2 capabilities must be 0 or 1")
            if np.any(self.capability.sum(axis=1) != 1):
                raise ValueError("each scenario 2 resource has exactly one qualification")
            if len(self.r1_indices) != len(self.r2_indices):
                raise ValueError("scenario 2 resource groups must have equal size")

    # -- derived dimensions -------------------------------------------------

    @property
    def n_missions(self) -> int:
        return len(self.missions)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    @property
    def n_vars(self) -> int:
        """Number of binary allocation variables (missions x resources)."""
        return self.n_missions * self.n_resources

    @property
    def u_index(self) -> int:
        """Row index of the unallocated mission (always the last row)."""
        return self.n_missions - 1

    @property
    def r1_indices(self) -> tuple[int, ...]:
        """Scenario 2 resources qualified for q1 (scenario 1: all resources)."""
        return tuple(int(r) for r in np.flatnonzero(self.capability[:, 0] > 0))

    @property
    def r2_indices(self) -> tuple[int, ...]:
        if self.scenario is Scenario.S1:
            return ()
        return tuple(int(r) for r in np.flatnonzero(self.capability[:, 1] > 0))

    @property
    def primary_indices(self) -> tuple[int, ...]:
        """Scenario 1 resources with capability 2."""
        return tuple(int(r) for r in np.flatnonzero(self.capability[:, 0] == 2))

    @property
    def secondary_indices(self) -> tuple[int, ...]:
        return tuple(int(r) for r in np.flatnonzero(self.capability[:, 0] == 1))

    def mission_index(self, m) -> int:
        if isinstance(m, (int, np.integer)):
            if not 0 <= m < self.n_missions:
                raise ValueError(f"mission index {m} out of range")
            return int(m)
        try:
            return self.missions.index(m)
        except ValueError:
            raise ValueError(f"unknown mission {m!r}") from None

    def resource_index(self, r) -> int:
        if isinstance(r, (int, np.integer)):
            if not 0 <= r < self.n_resources:
                raise ValueError(f"resource index {r} out of range")
            return int(r)
        try:
            return self.resources.index(r)
        except ValueError:
            raise ValueError(f"unknown resource {r!r}") from None


def flat_index(problem: McoProblem, m: int, r: int) -> int:
    """Flat bit position of allocation variable (mission m, resource r).

    Row-major with the U mission last: ``index = m * n_resources + r``.
    Every module shares this layout.
    """
    return m * problem.n_resources + r


# -- scenario builders -------------------------------------------------------


def scenario1(requirements, n_primary: int, n_secondary: int) -> McoProblem:
    """Build a primary/secondary instance.

    Parameters
    ----------
    requirements:
        Resource counts needed by each real mission (U is appended
        automatically).
    n_primary, n_secondary:
        How many capability-2 and capability-1 resources exist.  Primaries
        come first in the resource ordering.
    """
    req = [int(v) for v in requirements]
    if any(v < 0 for v in req):
        raise ValueError("requirements must be non-negative")
    if n_primary < 0 or n_secondary < 0 or n_primary + n_secondary < 1:
        raise ValueError("need a non-negative split with at least one resource")
    missions = tuple(f"m{i + 1}" for i in range(len(req))) + ("U",)
    n_res = n_primary + n_secondary
    resources = tuple(f"r{i + 1}" for i in range(n_res))
    capability = [[2]] * n_primary + [[1]] * n_secondary
    req_mission = [[v] for v in req] + [[0]]
    req_resource = [[0]] * n_res
    return McoProblem(
        scenario=Scenario.S1,
        missions=missions,
        resources=resources,
        qualifications=("q1",),
        capability=capability,
        req_mission=req_mission,
        req_resource=req_resource,
    )


def scenario2(requirements, n_pairs: int) -> McoProblem:
    """Build a buddy-system instance with ``n_pairs`` resources per group.

    Resources 0..n_pairs-1 form R1 (qualification q1), the rest form R2
    (qualification q2).  Every R1 resource requires one q2 buddy and vice
    versa.
    """
    req = [int(v) for v in requirements]
    if any(v < 0 for v in req):
        raise ValueError("requirements must be non-negative")
    if n_pairs < 1:
        raise ValueError("scenario 2 needs at least one resource pair")
    missions = tuple(f"m{i + 1}" for i in range(len(req))) + ("U",)
    resources = tuple(f"r{i + 1}" for i in range(2 * n_pairs))
    capability = [[1, 0]] * n_pairs + [[0, 1]] * n_pairs
    req_mission = [[v, 0] for v in req] + [[0, 0]]
    req_resource = [[0, 1]] * n_pairs + [[1, 0]] * n_pairs
    return McoProblem(
        scenario=Scenario.S2,
        missions=missions,
        resources=resources,
        qualifications=("q1", "q2"),
        capability=capability,
        req_mission=req_mission,
        req_resource=req_resource,
    )


# -- assignments -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Assignment:
    """Boolean allocation matrix; ``bits[m, r]`` means resource r works on m."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError("assignment bits must be a 2-d matrix")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("assignment bits must be 0/1")
        arr = arr.astype(np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_flat(cls, flat, n_missions: int, n_resources: int) -> "Assignment":
        arr = np.asarray(flat)
        if arr.size != n_missions * n_resources:
            raise ValueError(
                f"flat vector of length {arr.size} does not fit a "
                f"{n_missions}x{n_resources} assignment"
            )
        return cls(arr.reshape(n_missions, n_resources))

    def to_flat(self) -> np.ndarray:
        """Row-major flat 0/1 vector (U row last)."""
        return np.asarray(self.bits, dtype=np.int8).reshape(-1).copy()

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class ViolationReport:
    """Constraint violation counts for one assignment."""

    column_violations: int
    row_violations: int

    @property
    def total(self) -> int:
        return self.column_violations + self.row_violations


def _check_dimensions(problem: McoProblem, a: Assignment) -> None:
    if a.shape != (problem.n_missions, problem.n_resources):
        raise ValueError(
            f"assignment shape {a.shape} does not match problem "
            f"({problem.n_missions}, {problem.n_resources})"
        )


def _qualified_mask(problem: McoProblem) -> np.ndarray:
    # Resources that count toward the q1 requirement.  In scenario 1 everyone
    # qualifies; in scenario 2 only the R1 group does, matching how the
    # requirement column is stated per R1 head-count.
    return problem.capability[:, 0] > 0


# -- scoring -----------------------------------------------------------------


def mission_cost(problem: McoProblem, a: Assignment, m) -> float:
    """Squared shortfall/overshoot of mission ``m``'s requirement.

    Returns ``(sum of qualified allocations in row m - requirement)**2``,
    which is zero exactly when the mission's requirement is met.
    """
    _check_dimensions(problem, a)
    mi = problem.mission_index(m)
    row = a.bits[mi][_qualified_mask(problem)]
    return float((int(row.sum()) - int(problem.req_mission[mi, 0])) ** 2)


def precedence_cost(problem: McoProblem, a: Assignment, r) -> float:
    """Squared deviation from the ideal usage of resource ``r`` (scenario 1).

    The ideal is capability - 1 allocations outside U: a primary should be
    placed on exactly one real mission, a secondary on none.
    """
    if problem.scenario is not Scenario.S1:
        raise ValueError("precedence cost is defined for scenario 1 only")
    _check_dimensions(problem, a)
    ri = problem.resource_index(r)
    used = int(a.bits[: problem.u_index, ri].sum())
    return float((used - int(problem.capability[ri, 0]) + 1) ** 2)


def objective(problem: McoProblem, a: Assignment) -> float:
    """Solution cost without constraint penalties.

    Scenario 1 adds the precedence cost, down-weighted by 1/n_resources so
    mission shortfalls always dominate; scenario 2 is mission cost alone.
    The U row carries no mission cost.
    """
    _check_dimensions(problem, a)
    total = 0.0
    for m in range(problem.u_index):
        total += mission_cost(problem, a, m)
    if problem.scenario is Scenario.S1:
        pc = sum(precedence_cost(problem, a, r) for r in range(problem.n_resources))
        total += pc / problem.n_resources
    return total


def count_violations(problem: McoProblem, a: Assignment) -> ViolationReport:
    """Count hard-constraint violations.

    A column with k active bits contributes |k - 1|: extra allocations count
    one each, and a fully empty column counts as one violation.  Scenario 2
    additionally counts, per real mission row, the absolute difference
    between R1 and R2 head counts.
    """
    _check_dimensions(problem, a)
    col_sums = a.bits.sum(axis=0)
    column = int(np.abs(col_sums - 1).sum())
    rows = 0
    if problem.scenario is Scenario.S2:
        r1 = list(problem.r1_indices)
        r2 = list(problem.r2_indices)
        for m in range(problem.u_index):
            rows += abs(int(a.bits[m, r1].sum()) - int(a.bits[m, r2].sum()))
    return ViolationReport(column_violations=column, row_violations=rows)


def relative_cost(problem: McoProblem, a: Assignment, best_feasible_cost: float) -> float:
    """Cost of ``a`` minus the best feasible cost found by brute force.

    Non-negative for every feasible assignment; a negative value is only
    possible when the assignment violates constraints.
    """
    return objective(problem, a) - float(best_feasible_cost)


# -- serialization -----------------------------------------------------------


def problem_to_json(problem: McoProblem) -> str:
    doc = {
        "scenario": problem.scenario.value,
        "missions": list(problem.missions),
        "resources": list(problem.resources),
        "qualifications": list(problem.qualifications),
        "capability": problem.capability.tolist(),
        "req_mission": problem.req_mission.tolist(),
        "req_resource": problem.req_resource.tolist(),
    }
    return json.dumps(doc, indent=2)


def problem_from_json(text: str) -> McoProblem:
    doc = json.loads(text)
    return McoProblem(
        scenario=Scenario(doc["scenario"]),
        missions=tuple(doc["missions"]),
        resources=tuple(doc["resources"]),
        qualifications=tuple(doc["qualifications"]),
        capability=doc["capability"],
        req_mission=doc["req_mission"],
        req_resource=doc["req_resource"],
    )
