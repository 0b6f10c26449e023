# Build a mission covering problem, inspect its matrix view, and score
# solutions: mission cost, precedence cost, and constraint violations.

import numpy as np

from mcobench import (
    Assignment,
    count_violations,
    mission_cost,
    objective,
    precedence_cost,
    scenario1,
)
from mcobench.solvers import brute_force_constrained

# Three concurrent missions need 3, 2 and 2 pilots.  Seven pilots are on duty
# (primary resources, capability 2) and three are on call (secondary,
# capability 1).  The extra row "U" absorbs whoever stays home.
problem = scenario1([3, 2, 2], n_primary=7, n_secondary=3)
print("missions:", problem.missions)
print("resources:", problem.resources)
print("capabilities:", problem.capability[:, 0])
print()

best, cost = brute_force_constrained(problem)
print("brute-force optimum (rows = missions, cols = resources):")
print(best.bits)
print("optimal cost:", cost)
print()

# The optimum covers all demand with primaries and parks the secondaries:
# every mission requirement is met and no precedence cost accrues.
for m in range(problem.u_index):
    print(f"  mission {problem.missions[m]}: cost {mission_cost(problem, best, m)}")
print("  precedence costs:", [precedence_cost(problem, best, r) for r in range(10)])
print()

# A sloppier dispatcher sends two secondaries out while two primaries idle:
sloppy = best.bits.copy()
sloppy[:, [5, 6]] = 0  # pull two allocated primaries
sloppy[3, [5, 6]] = 1  # park them
sloppy[:, [7, 8]] = 0
sloppy[0, [7, 8]] = 1  # cover mission 1 with two secondaries instead
sloppy = Assignment(sloppy)
print("sloppy reassignment objective:", objective(problem, sloppy), "(optimum was", cost, ")")
print()

# Violations count extra allocations per column -- and columns that vanished.
broken = best.bits.copy()
broken[1, 0] = 1  # resource 1 now serves two missions
broken[:, 9] = 0  # resource 10 serves none
report = count_violations(problem, Assignment(broken))
print("double-booked + dropped column ->", report)
