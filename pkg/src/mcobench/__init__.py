"""Mission covering optimization: models, QUBO compilation, and quantum-style solvers.

The package is organized bottom-up:

* :mod:`mcobench.model` — problem instances, assignments, costs, violations
* :mod:`mcobench.qubo` — penalized quadratic binary compilation and Ising form
* :mod:`mcobench.solvers` — exact brute force and simulated annealing
* :mod:`mcobench.pauli` — Pauli-string operator algebra, mixers, decompositions
* :mod:`mcobench.statevector` — exact alternating-ansatz simulation and sampling
* :mod:`mcobench.optimizer` — derivative-free angle search
* :mod:`mcobench.harness` — random instances, experiment pipelines, exports, plots
"""

from .model import (
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
from .qubo import (
    PenaltyConfig,
    QuboModel,
    build_qubo,
    constraint_penalty_buddy,
    constraint_penalty_column,
    evaluate,
    objective_qubo,
    to_ising,
)
from .solvers import AnnealSchedule, SampleSet, brute_force_constrained, simulated_anneal
from .pauli import (
    PauliSum,
    QubitLayout,
    c_dswap,
    col_swap,
    control_false,
    control_true,
    cost_hamiltonian,
    dswap_pauli,
    mixer_s1,
    mixer_s2,
    realize_matrix,
    swap_pauli,
    transverse_mixer,
)
from .statevector import (
    QaoaParams,
    StateVector,
    apply_cost_phase,
    apply_mixer_evolution,
    expectation,
    init_uniform,
    init_unallocated,
    init_with_ids,
    leakage,
    run_qaoa,
    sample,
)
from .optimizer import OptimizerConfig, OptimizationTrace, optimize
from .harness import (
    ExperimentConfig,
    RunRecord,
    export,
    generate_instance,
    plot_summary,
    run_experiment,
)

__version__ = "0.1.0"
