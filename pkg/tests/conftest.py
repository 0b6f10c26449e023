import numpy as np
import pytest

from mcobench.harness import generate_instance
from mcobench.pauli import realize_matrix


def dense_evolution(h, beta, amplitudes):
    """Oracle: exp(-i beta H) |v> via dense eigendecomposition."""
    mat = realize_matrix(h)
    w, v = np.linalg.eigh(mat)
    return v @ (np.exp(-1j * beta * w) * (v.conj().T @ amplitudes))


def small_instances(scenario, count, qubit_budget, seed0=0):
    return [generate_instance(scenario, qubit_budget, seed0 + k) for k in range(count)]


def all_assignments(problem):
    """Every 0/1 allocation matrix, in flat bit-vector order."""
    from mcobench.model import Assignment

    nv = problem.n_vars
    for index in range(1 << nv):
        flat = [(index >> (nv - 1 - i)) & 1 for i in range(nv)]
        yield Assignment.from_flat(flat, problem.n_missions, problem.n_resources)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
