"""Exact state-vector simulation of the alternating-operator ansatz.

The register is laid out per :class:`~mcobench.pauli.QubitLayout`: allocation
qubits first (qubit 0 = most significant bit of a basis index), then any ID
qubits.  The cost phase is diagonal and acts only on allocation qubits; mixer
evolution ``exp(-i beta H)`` is computed matrix-free by a sub-stepped
truncated power series of H applied to the vector, so non-commuting
SWAP-family mixers evolve exactly (no Trotter error) and the paper-style
subspace-preservation property can be checked to float precision.
"""

from __future__ import annotations

import logging
import math
import struct
import weakref
from dataclasses import dataclass

import numpy as np

from .model import McoProblem, Scenario
from .pauli import PauliSum, QubitLayout, mixer_s1, mixer_s2, transverse_mixer
from .qubo import PenaltyConfig, QuboModel, build_qubo, objective_qubo
from .solvers import SampleSet

__all__ = [
    "StateVector",
    "QaoaParams",
    "MIXER_KINDS",
    "MAX_STATE_QUBITS",
    "init_uniform",
    "init_unallocated",
    "init_with_ids",
    "basis_state",
    "apply_cost_phase",
    "apply_mixer_evolution",
    "run_qaoa",
    "sample",
    "expectation",
    "basis_energies",
    "assignment_feasible_mask",
    "leakage",
    "save_state",
    "load_state",
]

logger = logging.getLogger(__name__)

MAX_STATE_QUBITS = 22
MIXER_KINDS = ("transverse", "constrained_s1", "constrained_s2_full", "constrained_s2_reduced")

_EVOLUTION_MAX_TERMS = 80


@dataclass(eq=False)
class StateVector:
    """2^n complex amplitudes with unit norm."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got shape {amps.shape}")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"state norm {nrm} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class QaoaParams:
    p: int
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("layer count cannot be negative")
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != self.p or len(self.betas) != self.p:
            raise ValueError("need exactly p gamma and p beta values")


def _check_qubits(n: int) -> None:
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > MAX_STATE_QUBITS:
        raise ValueError(f"{n} qubits exceeds the desk-scale cap of {MAX_STATE_QUBITS}")


# -- initial states ------------------------------------------------------------


def init_uniform(n: int) -> StateVector:
    """Equal superposition of all basis states."""
    _check_qubits(n)
    dim = 1 << n
    return StateVector(n, np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128))


def basis_state(n: int, index: int) -> StateVector:
    _check_qubits(n)
    if not 0 <= index < (1 << n):
        raise ValueError("basis index out of range")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def init_unallocated(problem: McoProblem, layout: QubitLayout | None = None) -> StateVector:
    """All resources parked on the unallocated mission (scenario 1 start)."""
    if problem.scenario is not Scenario.S1:
        raise ValueError("unallocated start state is the scenario 1 initializer")
    if layout is None:
        layout = QubitLayout.for_problem(problem)
    n = layout.n_qubits
    _check_qubits(n)
    index = 0
    for r in range(layout.n_resources):
        index |= 1 << (n - 1 - layout.qubit(layout.u_index, r))
    return basis_state(n, index)


def init_with_ids(problem: McoProblem, layout: QubitLayout | None = None) -> StateVector:
    """Scenario 2 start: all resources on U, ID blocks pairing column k of R1
    with column k of R2 via the shared binary value k."""
    if problem.scenario is not Scenario.S2:
        raise ValueError("ID start state is the scenario 2 initializer")
    if layout is None:
        layout = QubitLayout.for_problem(problem)
    n = layout.n_qubits
    _check_qubits(n)
    index = 0
    for r in range(layout.n_resources):
        index |= 1 << (n - 1 - layout.qubit(layout.u_index, r))
    for group in (layout.r1, layout.r2):
        for k, r in enumerate(group):
            for qubit, bit in zip(layout.id_qubits(r), layout.id_value_bits(k)):
                if bit:
                    index |= 1 << (n - 1 - qubit)
    return basis_state(n, index)


# -- energies of basis states ----------------------------------------------------


_energy_cache: "weakref.WeakKeyDictionary[QuboModel, np.ndarray]" = weakref.WeakKeyDictionary()


def basis_energies(q: QuboModel, n_qubits: int | None = None) -> np.ndarray:
    """QUBO energy of every basis state, memoized per model.

    With ``n_qubits > n_vars`` the table is tiled so trailing (ID) qubits do
    not affect the energy.
    """
    table = _energy_cache.get(q)
    if table is None:
        nv = q.n_vars
        idx = np.arange(1 << nv, dtype=np.int64)
        table = np.full(1 << nv, q.offset, dtype=np.float64)
        for i, c in q.linear.items():
            table += c * ((idx >> (nv - 1 - i)) & 1)
        for (i, j), c in q.quadratic.items():
            table += c * (((idx >> (nv - 1 - i)) & 1) & ((idx >> (nv - 1 - j)) & 1))
        table.setflags(write=False)
        _energy_cache[q] = table
    if n_qubits is None or n_qubits == q.n_vars:
        return table
    if n_qubits < q.n_vars:
        raise ValueError("register smaller than the QUBO variable count")
    return np.repeat(table, 1 << (n_qubits - q.n_vars))


def apply_cost_phase(sv: StateVector, q: QuboModel, gamma: float) -> StateVector:
    """Multiply each basis amplitude by ``exp(-i * gamma * energy)``."""
    energies = basis_energies(q, sv.n)
    return StateVector(sv.n, sv.amplitudes * np.exp(-1j * gamma * energies))


def apply_mixer_evolution(sv: StateVector, h: PauliSum, beta: float,
                          tol: float = 1e-10) -> StateVector:
    """Exact evolution ``exp(-i beta H) |sv>`` without materializing H.

    The evolution is split into enough sub-steps that each power series
    converges quickly and without cancellation; per sub-step, terms are added
    until the appended term's norm drops below ``tol`` (scaled by the step
    count).  Raises if a series fails to converge within the term cap.
    """
    if h.n != sv.n:
        raise ValueError("operator and state act on different registers")
    compiled = h.compiled()
    steps = max(1, math.ceil(abs(beta) * compiled.spectral_norm_bound() / 1.5))
    sub_tol = tol / steps
    scale = -1j * beta / steps
    v = sv.amplitudes.copy()
    for _ in range(steps):
        term = v
        out = v.copy()
        for k in range(1, _EVOLUTION_MAX_TERMS + 1):
            term = (scale / k) * compiled.matvec(term)
            out += term
            if np.linalg.norm(term) < sub_tol:
                break
        else:
            raise RuntimeError(
                f"mixer evolution did not converge within {_EVOLUTION_MAX_TERMS} terms"
            )
        v = out
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-8:
        logger.warning("renormalizing state after evolution: norm drifted to %.3e", nrm)
    return StateVector(sv.n, v / nrm)


# -- the alternating ansatz --------------------------------------------------------


_mixer_cache: "weakref.WeakKeyDictionary[McoProblem, dict]" = weakref.WeakKeyDictionary()


def _cached_mixer(problem: McoProblem, kind: str, layout: QubitLayout | None) -> PauliSum:
    custom_layout = layout is not None
    if not custom_layout:
        cache = _mixer_cache.setdefault(problem, {})
        if kind in cache:
            return cache[kind]
    if kind == "transverse":
        mixer = transverse_mixer(problem.n_vars)
    elif kind == "constrained_s1":
        mixer = mixer_s1(problem)
    else:
        mixer = mixer_s2(
            problem,
            layout or QubitLayout.for_problem(problem),
            reduced=(kind == "constrained_s2_reduced"),
        )
    if not custom_layout:
        _mixer_cache[problem][kind] = mixer
    return mixer


def _phase_qubo(problem: McoProblem, kind: str, cfg: PenaltyConfig | None) -> QuboModel:
    cache = _mixer_cache.setdefault(problem, {})
    if kind == "transverse":
        lam = (cfg or PenaltyConfig()).lam
        key = ("qubo_penalized", lam)
        if key not in cache:
            cache[key] = build_qubo(problem, PenaltyConfig(lam))
    else:
        # Constrained mixers never leave the feasible space, so the phase
        # Hamiltonian is the bare objective.
        key = ("qubo_objective",)
        if key not in cache:
            cache[key] = objective_qubo(problem)
    return cache[key]


def run_qaoa(problem: McoProblem, mixer_kind: str, cfg: PenaltyConfig | None,
             params: QaoaParams, layout: QubitLayout | None = None) -> StateVector:
    """Alternate cost phases and mixer evolutions for ``params.p`` layers.

    ``transverse`` starts from the uniform superposition over the penalized
    objective; the constrained kinds start from the feasible basis state
    matching their scenario and evolve under the bare objective.
    """
    if mixer_kind not in MIXER_KINDS:
        raise ValueError(f"unknown mixer kind {mixer_kind!r}")
    if mixer_kind == "constrained_s1" and problem.scenario is not Scenario.S1:
        raise ValueError("constrained_s1 requires a scenario 1 problem")
    if mixer_kind.startswith("constrained_s2") and problem.scenario is not Scenario.S2:
        raise ValueError(f"{mixer_kind} requires a scenario 2 problem")

    if mixer_kind == "transverse":
        sv = init_uniform(problem.n_vars)
    elif mixer_kind == "constrained_s1":
        sv = init_unallocated(problem, layout)
    else:
        layout = layout or QubitLayout.for_problem(problem)
        sv = init_with_ids(problem, layout)

    q = _phase_qubo(problem, mixer_kind, cfg)
    mixer = _cached_mixer(problem, mixer_kind, layout if mixer_kind.startswith("constrained_s2") else None)
    for gamma, beta in zip(params.gammas, params.betas):
        sv = apply_cost_phase(sv, q, gamma)
        sv = apply_mixer_evolution(sv, mixer, beta)
    return sv


# -- measurement --------------------------------------------------------------------


def sample(sv: StateVector, q: QuboModel, shots: int, seed: int = 0) -> SampleSet:
    """Multinomial draw of ``shots`` basis states, energies from ``q``.

    The energy of an outcome is evaluated on its allocation bits; trailing ID
    qubits are reported in the bit string but carry no energy.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    probs = sv.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    energies = basis_energies(q, sv.n)
    unique, counts = np.unique(outcomes, return_counts=True)
    samples = []
    for index, count in zip(unique, counts):
        bits = tuple(int((int(index) >> (sv.n - 1 - i)) & 1) for i in range(sv.n))
        samples.append((bits, float(energies[index]), int(count)))
    meta = {"reads": shots, "seed": seed, "wall_time": 0.0}
    return SampleSet(samples=tuple(sorted(samples)), solver_meta=meta)


def expectation(sv: StateVector, q: QuboModel) -> float:
    """Mean QUBO energy of the measurement distribution."""
    energies = basis_energies(q, sv.n)
    return float(np.real(sv.probabilities() @ energies))


# -- feasibility helpers ---------------------------------------------------------


def assignment_feasible_mask(problem: McoProblem) -> np.ndarray:
    """Boolean mask over all 2^(n_vars) allocation patterns.

    True where every column is one-hot and, for scenario 2, every real row
    balances R1 against R2 — i.e. the assignment violates nothing.
    """
    nv = problem.n_vars
    nm, nr = problem.n_missions, problem.n_resources
    idx = np.arange(1 << nv, dtype=np.int64)
    ok = np.ones(idx.size, dtype=bool)
    for r in range(nr):
        col = np.zeros(idx.size, dtype=np.int64)
        for m in range(nm):
            col += (idx >> (nv - 1 - (m * nr + r))) & 1
        ok &= col == 1
    if problem.scenario is Scenario.S2:
        for m in range(problem.u_index):
            balance = np.zeros(idx.size, dtype=np.int64)
            for r in problem.r1_indices:
                balance += (idx >> (nv - 1 - (m * nr + r))) & 1
            for r in problem.r2_indices:
                balance -= (idx >> (nv - 1 - (m * nr + r))) & 1
            ok &= balance == 0
    return ok


def leakage(sv: StateVector, problem: McoProblem) -> float:
    """Probability mass outside the feasible allocation subspace."""
    mask = assignment_feasible_mask(problem)
    probs = sv.probabilities()
    if sv.n > problem.n_vars:
        probs = probs.reshape(mask.size, -1).sum(axis=1)
    return float(probs[~mask].sum())


# -- debug dumps --------------------------------------------------------------------


def save_state(sv: StateVector, path) -> None:
    """Binary dump: little-endian uint32 qubit count, then (re, im) float64 pairs."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", sv.n))
        fh.write(sv.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<I", fh.read(4))
        amps = np.frombuffer(fh.read(), dtype="<c16")
    return StateVector(int(n), amps.astype(np.complex128))
