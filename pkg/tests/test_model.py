import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcobench.model import (
    Assignment,
    McoProblem,
    Scenario,
    ViolationReport,
    count_violations,
    mission_cost,
    objective,
    precedence_cost,
    problem_from_json,
    problem_to_json,
    relative_cost,
    scenario1,
    scenario2,
)
from mcobench.solvers import brute_force_constrained
from mcobench.statevector import assignment_feasible_mask

from conftest import all_assignments, small_instances


def assignment_for(problem, rows):
    return Assignment.from_flat(np.array(rows).reshape(-1), problem.n_missions, problem.n_resources)


# -- mission cost --------------------------------------------------------------


class TestMissionCost:
    def test_requirement_met_is_free(self):
        # three resources, two required, two allocated
        p = scenario1([2], 3, 0)
        a = assignment_for(p, [[1, 1, 0], [0, 0, 1]])
        assert mission_cost(p, a, "m1") == 0.0

    def test_zero_requirement_empty_row(self):
        p = scenario1([0], 2, 0)
        a = assignment_for(p, [[0, 0], [1, 1]])
        assert mission_cost(p, a, "m1") == 0.0

    def test_unmet_requirement_squares(self):
        p = scenario1([2], 3, 0)
        a = assignment_for(p, [[0, 0, 0], [1, 1, 1]])
        assert mission_cost(p, a, "m1") == 4.0

    def test_only_qualified_resources_count(self):
        # scenario 2: the requirement speaks in R1 head counts, so a balanced
        # row meeting it exactly costs nothing even though it holds 2*req bits
        p = scenario2([1], 2)
        a = assignment_for(p, [[1, 0, 1, 0], [0, 1, 0, 1]])
        assert mission_cost(p, a, "m1") == 0.0

    def test_unknown_mission_rejected(self):
        p = scenario1([1], 1, 0)
        a = assignment_for(p, [[1], [0]])
        with pytest.raises(ValueError, match="unknown mission"):
            mission_cost(p, a, "nope")


# -- precedence cost -------------------------------------------------------------


class TestPrecedenceCost:
    def test_primary_used_once_is_ideal(self):
        p = scenario1([1], 1, 1)
        a = assignment_for(p, [[1, 0], [0, 1]])
        assert precedence_cost(p, a, 0) == 0.0

    def test_secondary_idle_is_ideal(self):
        p = scenario1([1], 1, 1)
        a = assignment_for(p, [[1, 0], [0, 1]])
        assert precedence_cost(p, a, 1) == 0.0

    def test_idle_primary_costs_one(self):
        p = scenario1([0], 1, 0)
        a = assignment_for(p, [[0], [1]])
        assert precedence_cost(p, a, 0) == 1.0

    def test_scenario2_rejected(self):
        p = scenario2([1], 1)
        a = assignment_for(p, [[1, 1], [0, 0]])
        with pytest.raises(ValueError, match="scenario 1"):
            precedence_cost(p, a, 0)


# -- objective --------------------------------------------------------------------


class TestObjective:
    def test_s1_idle_primary_weighted(self):
        # one mission needing one resource, two primaries: whichever stays on
        # U contributes one precedence unit, scaled by the resource count
        p = scenario1([1], 2, 0)
        a = assignment_for(p, [[1, 0], [0, 1]])
        assert objective(p, a) == pytest.approx(0.5)

    def test_s2_requirements_met_is_zero(self):
        p = scenario2([2, 1], 3)
        a = assignment_for(p, [
            [1, 1, 0, 1, 1, 0],
            [0, 0, 1, 0, 0, 1],
            [0, 0, 0, 0, 0, 0],
        ])
        assert objective(p, a) == 0.0

    def test_s1_all_idle(self):
        # requirements (3, 2, 2) unmet: 9 + 4 + 4 mission cost, plus one
        # precedence unit per idle primary
        p = scenario1([3, 2, 2], 7, 3)
        a = Assignment(np.vstack([np.zeros((3, 10), dtype=int), np.ones((1, 10), dtype=int)]))
        assert objective(p, a) == pytest.approx(17 + 7 / 10)

    def test_u_row_carries_no_mission_cost(self):
        p = scenario1([1], 2, 0)
        parked = assignment_for(p, [[0, 0], [1, 1]])
        # mission shortfall 1, both primaries idle
        assert objective(p, parked) == pytest.approx(1 + 2 / 2)

    def test_dimension_mismatch_rejected(self):
        p = scenario1([1], 2, 0)
        bad = Assignment(np.zeros((3, 2), dtype=int))
        with pytest.raises(ValueError, match="does not match"):
            objective(p, bad)


# -- violations --------------------------------------------------------------------


class TestCountViolations:
    def test_worked_column_example(self):
        # resource 0 on two extra missions, resource 1 on three extra: 2+3=5
        p = scenario1([1, 1, 1, 1], 3, 0)
        a = assignment_for(p, [
            [1, 1, 1],
            [1, 1, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 0],
        ])
        report = count_violations(p, a)
        assert report.column_violations == 5
        assert report.total == 5

    def test_worked_row_example(self):
        # four R1 and two R2 resources on one mission: |4 - 2| = 2
        p = scenario2([2], 4)
        a = assignment_for(p, [
            [1, 1, 1, 1, 1, 1, 0, 0],
            [0, 0, 0, 0, 0, 0, 1, 1],
        ])
        report = count_violations(p, a)
        assert report.row_violations == 2

    def test_feasible_assignment_clean(self):
        p = scenario2([1], 2)
        a = assignment_for(p, [[1, 0, 1, 0], [0, 1, 0, 1]])
        assert count_violations(p, a).total == 0

    def test_empty_column_counts_one(self):
        p = scenario1([1], 2, 0)
        a = assignment_for(p, [[1, 0], [0, 0]])
        assert count_violations(p, a).column_violations == 1

    def test_total_is_sum(self):
        report = ViolationReport(column_violations=3, row_violations=2)
        assert report.total == 5


# -- relative cost -------------------------------------------------------------------


class TestRelativeCost:
    def test_optimum_scores_zero(self):
        p = scenario1([2], 3, 1)
        best, cost = brute_force_constrained(p)
        assert relative_cost(p, best, cost) == 0.0

    def test_feasible_but_short_is_positive(self):
        p = scenario1([2], 3, 0)
        _, cost = brute_force_constrained(p)
        short = assignment_for(p, [[1, 0, 0], [0, 1, 1]])
        assert count_violations(p, short).total == 0
        assert relative_cost(p, short, cost) > 0

    def test_negative_only_with_violations(self):
        # overfill beyond the one-resource-one-mission constraint; cheaper
        # than any feasible solution but clearly violating
        p = scenario1([2, 2], 2, 0)
        _, cost = brute_force_constrained(p)
        assert cost > 0  # demand exceeds feasible supply
        overfull = assignment_for(p, [[1, 1], [1, 1], [0, 0]])
        rel = relative_cost(p, overfull, cost)
        assert rel < 0
        assert count_violations(p, overfull).total > 0


def test_feasible_relative_cost_never_negative():
    for scenario in (Scenario.S1, Scenario.S2):
        for problem in small_instances(scenario, 3, qubit_budget=9, seed0=5):
            _, best_cost = brute_force_constrained(problem)
            mask = assignment_feasible_mask(problem)
            for a in all_assignments(problem):
                flat = a.to_flat()
                index = int("".join(map(str, flat)), 2)
                if mask[index]:
                    assert relative_cost(problem, a, best_cost) >= -1e-12


def test_violations_zero_exactly_on_feasible_set():
    for scenario in (Scenario.S1, Scenario.S2):
        problem = small_instances(scenario, 1, qubit_budget=8, seed0=2)[0]
        mask = assignment_feasible_mask(problem)
        for a in all_assignments(problem):
            index = int("".join(map(str, a.to_flat())), 2)
            assert (count_violations(problem, a).total == 0) == bool(mask[index])


# -- symmetry properties ----------------------------------------------------------


@st.composite
def s1_problem_and_assignment(draw):
    n_missions = draw(st.integers(1, 3))
    n_primary = draw(st.integers(1, 3))
    n_secondary = draw(st.integers(0, 2))
    reqs = [draw(st.integers(0, 3)) for _ in range(n_missions)]
    p = scenario1(reqs, n_primary, n_secondary)
    bits = draw(
        st.lists(st.integers(0, 1), min_size=p.n_vars, max_size=p.n_vars)
    )
    return p, Assignment.from_flat(bits, p.n_missions, p.n_resources)


@settings(max_examples=40, deadline=None)
@given(s1_problem_and_assignment(), st.data())
def test_cost_invariant_under_same_class_swap(case, data):
    p, a = case
    classes = [list(p.primary_indices), list(p.secondary_indices)]
    swappable = [c for c in classes if len(c) >= 2]
    if not swappable:
        return
    cols = data.draw(st.sampled_from(swappable))
    i, j = cols[0], cols[1]
    swapped = a.bits.copy()
    swapped[:, [i, j]] = swapped[:, [j, i]]
    b = Assignment(swapped)
    for m in range(p.n_missions):
        assert mission_cost(p, a, m) == mission_cost(p, b, m)
    assert sum(precedence_cost(p, a, r) for r in range(p.n_resources)) == pytest.approx(
        sum(precedence_cost(p, b, r) for r in range(p.n_resources))
    )
    assert objective(p, a) == pytest.approx(objective(p, b))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2), st.data())
def test_s2_objective_invariant_within_groups(n_pairs, req, data):
    p = scenario2([req], n_pairs)
    bits = data.draw(st.lists(st.integers(0, 1), min_size=p.n_vars, max_size=p.n_vars))
    a = Assignment.from_flat(bits, p.n_missions, p.n_resources)
    group = data.draw(st.sampled_from([list(p.r1_indices), list(p.r2_indices)]))
    i, j = data.draw(st.sampled_from([(x, y) for x in group for y in group if x < y]))
    swapped = a.bits.copy()
    swapped[:, [i, j]] = swapped[:, [j, i]]
    assert objective(p, a) == pytest.approx(objective(p, Assignment(swapped)))


# -- construction and round trips ----------------------------------------------------


class TestConstruction:
    def test_u_mission_is_last_and_unique(self):
        p = scenario1([1, 2], 2, 1)
        assert p.missions[-1] == "U"
        assert p.missions.count("U") == 1
        assert p.u_index == 2

    def test_s1_capability_range_enforced(self):
        with pytest.raises(ValueError, match="1 or 2"):
            McoProblem(
                scenario=Scenario.S1,
                missions=("m1", "U"),
                resources=("r1",),
                qualifications=("q1",),
                capability=[[3]],
                req_mission=[[1], [0]],
                req_resource=[[0]],
            )

    def test_s2_unbalanced_groups_rejected(self):
        with pytest.raises(ValueError, match="equal size"):
            McoProblem(
                scenario=Scenario.S2,
                missions=("m1", "U"),
                resources=("r1", "r2", "r3"),
                qualifications=("q1", "q2"),
                capability=[[1, 0], [1, 0], [0, 1]],
                req_mission=[[1, 0], [0, 0]],
                req_resource=[[0, 1], [0, 1], [1, 0]],
            )

    def test_u_requirements_must_vanish(self):
        with pytest.raises(ValueError, match="unallocated mission"):
            McoProblem(
                scenario=Scenario.S1,
                missions=("m1", "U"),
                resources=("r1",),
                qualifications=("q1",),
                capability=[[2]],
                req_mission=[[1], [1]],
                req_resource=[[0]],
            )


class TestRoundTrips:
    def test_flat_bits(self):
        p = scenario1([2], 2, 1)
        for a in all_assignments(p):
            again = Assignment.from_flat(a.to_flat(), p.n_missions, p.n_resources)
            assert again == a

    @pytest.mark.parametrize("problem", [scenario1([2, 1], 3, 1), scenario2([1, 1], 2)])
    def test_problem_json(self, problem):
        again = problem_from_json(problem_to_json(problem))
        assert again.scenario == problem.scenario
        assert again.missions == problem.missions
        assert again.resources == problem.resources
        assert again.qualifications == problem.qualifications
        assert np.array_equal(again.capability, problem.capability)
        assert np.array_equal(again.req_mission, problem.req_mission)
        assert np.array_equal(again.req_resource, problem.req_resource)
