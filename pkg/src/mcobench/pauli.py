"""Real-weighted sums of Pauli strings: cost Hamiltonians and mixers.

A Pauli string is a length-n word over ``IXYZ``; a :class:`PauliSum` maps
strings to real coefficients and is therefore Hermitian by construction.
Qubit 0 is the most significant bit of a basis-state index, matching the
Kronecker-product order of :func:`realize_matrix`.

Besides the generic algebra this module builds the operators used to explore
mission covering solutions without ever leaving the feasible subspace:

* scenario 1: a sum of SWAPs cycling each resource between its missions and
  the unallocated row;
* scenario 2: dual SWAPs moving an R1/R2 buddy pair together, controlled on
  per-column ID qubits, plus optional whole-column swaps that reshuffle the
  pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import McoProblem, Scenario, flat_index
from .qubo import QuboModel, to_ising

__all__ = [
    "PauliSum",
    "QubitLayout",
    "pauli_product",
    "cost_hamiltonian",
    "transverse_mixer",
    "swap_pauli",
    "dswap_pauli",
    "control_true",
    "control_false",
    "c_dswap",
    "col_swap",
    "mixer_s1",
    "mixer_s2",
    "s2_mixer_families",
    "realize_matrix",
    "pauli_sum_to_text",
    "pauli_sum_from_text",
]

SIMPLIFY_TOL = 1e-14
REALIZE_MAX_QUBITS = 12

_PAULI_CHARS = "IXYZ"

# single-qubit products: (a, b) -> (phase, product)
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def _merge(terms: dict[str, float]) -> dict[str, float]:
    return {s: c for s, c in sorted(terms.items()) if abs(c) > SIMPLIFY_TOL}


@dataclass(eq=False)
class PauliSum:
    """Hermitian operator as a real combination of Pauli strings.

    Instances are treated as immutable after construction; duplicate strings
    are merged and coefficients below ``SIMPLIFY_TOL`` dropped.
    """

    n: int
    terms: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("operator needs at least one qubit")
        for s in self.terms:
            if len(s) != self.n or any(ch not in _PAULI_CHARS for ch in s):
                raise ValueError(f"bad Pauli string {s!r} for n={self.n}")
        object.__setattr__(self, "terms", _merge(self.terms))
        self._compiled = None

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum) or other.n != self.n:
            raise ValueError("can only add Pauli sums over the same qubits")
        merged = dict(self.terms)
        for s, c in other.terms.items():
            merged[s] = merged.get(s, 0.0) + c
        return PauliSum(self.n, merged)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, {s: c * scalar for s, c in self.terms.items()})

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.terms)

    def compiled(self) -> "CompiledPauliSum":
        """Vectorized applier, memoized on the (immutable) instance."""
        if self._compiled is None:
            self._compiled = CompiledPauliSum(self)
        return self._compiled


def identity_sum(n: int, coefficient: float = 1.0) -> PauliSum:
    return PauliSum(n, {"I" * n: coefficient})


def _string_with(n: int, placements: dict[int, str]) -> str:
    chars = ["I"] * n
    for i, op in placements.items():
        if not 0 <= i < n:
            raise ValueError(f"qubit {i} out of range for n={n}")
        chars[i] = op
    return "".join(chars)


def pauli_product(a: PauliSum, b: PauliSum) -> PauliSum:
    """Operator product ``a @ b``.

    Raises if the result picks up an imaginary coefficient (it never does for
    the projector/SWAP combinations built here, so a complex residue means a
    construction bug).
    """
    if a.n != b.n:
        raise ValueError("operator product requires matching qubit counts")
    out: dict[str, complex] = {}
    for sa, ca in a.terms.items():
        for sb, cb in b.terms.items():
            phase = 1 + 0j
            chars = []
            for pa, pb in zip(sa, sb):
                ph, pc = _MUL[(pa, pb)]
                phase *= ph
                chars.append(pc)
            key = "".join(chars)
            out[key] = out.get(key, 0j) + ca * cb * phase
    real_terms: dict[str, float] = {}
    for s, c in out.items():
        if abs(c.imag) > 1e-9 * max(1.0, abs(c)):
            raise ValueError("product left the real-coefficient algebra")
        real_terms[s] = c.real
    return PauliSum(a.n, real_terms)


# -- basic constructions -------------------------------------------------------


def cost_hamiltonian(q: QuboModel) -> PauliSum:
    """Diagonal operator whose basis-state energies equal the QUBO's.

    Uses ``x_i = (1 - Z_i)/2``, so the I/Z coefficients coincide with the
    Ising form of the model.
    """
    h, j, offset = to_ising(q)
    n = q.n_vars
    terms: dict[str, float] = {"I" * n: offset}
    for i, c in h.items():
        terms[_string_with(n, {i: "Z"})] = c
    for (i, k), c in j.items():
        terms[_string_with(n, {i: "Z", k: "Z"})] = c
    return PauliSum(n, terms)


def transverse_mixer(n: int) -> PauliSum:
    """Sum of single-qubit X operators; the unconstrained mixer."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return PauliSum(n, {_string_with(n, {i: "X"}): 1.0 for i in range(n)})


def swap_pauli(i: int, j: int, n: int) -> PauliSum:
    """SWAP of qubits i and j: ``(II + XX + YY + ZZ)/2`` on the pair."""
    if i == j:
        raise ValueError("cannot swap a qubit with itself")
    terms = {
        "I" * n: 0.5,
        _string_with(n, {i: "X", j: "X"}): 0.5,
        _string_with(n, {i: "Y", j: "Y"}): 0.5,
        _string_with(n, {i: "Z", j: "Z"}): 0.5,
    }
    return PauliSum(n, terms)


def dswap_pauli(pair1: tuple[int, int], pair2: tuple[int, int], n: int) -> PauliSum:
    """Two SWAPs applied simultaneously on disjoint qubit pairs."""
    if set(pair1) & set(pair2):
        raise ValueError("dual swap pairs must be disjoint")
    return pauli_product(swap_pauli(*pair1, n), swap_pauli(*pair2, n))


def control_true(a: PauliSum) -> PauliSum:
    """Prepend a control qubit: identity unless the control is |1>."""
    return _prepend_control(a, fire_on=1)


def control_false(a: PauliSum) -> PauliSum:
    """Prepend a control qubit: identity unless the control is |0>."""
    return _prepend_control(a, fire_on=0)


def _prepend_control(a: PauliSum, fire_on: int) -> PauliSum:
    # (I - Z)/2 projects onto |1>, (I + Z)/2 onto |0>; identity rides on the
    # non-firing projector, the payload on the firing one.
    fire_z = -0.5 if fire_on == 1 else 0.5
    idle = "I" * a.n
    terms: dict[str, float] = {"I" + idle: 0.5, "Z" + idle: -fire_z}
    for s, c in a.terms.items():
        terms["I" + s] = terms.get("I" + s, 0.0) + 0.5 * c
        terms["Z" + s] = terms.get("Z" + s, 0.0) + fire_z * c
    return PauliSum(a.n + 1, terms)


def _control_at(a: PauliSum, qubit: int, fire_on: int) -> PauliSum:
    """In-place variant: control on an existing qubit that ``a`` leaves idle."""
    for s in a.terms:
        if s[qubit] != "I":
            raise ValueError("control qubit must be idle in the target operator")
    z_proj = PauliSum(a.n, {
        "I" * a.n: 0.5,
        _string_with(a.n, {qubit: "Z"}): -0.5 if fire_on == 1 else 0.5,
    })
    idle_proj = PauliSum(a.n, {
        "I" * a.n: 0.5,
        _string_with(a.n, {qubit: "Z"}): 0.5 if fire_on == 1 else -0.5,
    })
    return pauli_product(z_proj, a) + idle_proj


# -- qubit layout ---------------------------------------------------------------


@dataclass(frozen=True)
class QubitLayout:
    """Where each allocation bit and ID bit lives in the qubit register.

    Allocation qubits come first in the shared row-major order; scenario 2
    appends one ID block per column (all R1 columns, then all R2 columns),
    ``id_bits`` qubits each, most significant bit first.
    """

    n_missions: int
    n_resources: int
    id_bits: int = 0
    r1: tuple[int, ...] = ()
    r2: tuple[int, ...] = ()

    @classmethod
    def for_problem(cls, problem: McoProblem) -> "QubitLayout":
        if problem.scenario is Scenario.S1:
            return cls(problem.n_missions, problem.n_resources)
        pairs = len(problem.r1_indices)
        id_bits = max(1, math.ceil(math.log2(pairs))) if pairs > 1 else 1
        return cls(
            problem.n_missions,
            problem.n_resources,
            id_bits=id_bits,
            r1=problem.r1_indices,
            r2=problem.r2_indices,
        )

    @property
    def n_assignment(self) -> int:
        return self.n_missions * self.n_resources

    @property
    def n_id_qubits(self) -> int:
        return self.id_bits * (len(self.r1) + len(self.r2))

    @property
    def n_qubits(self) -> int:
        return self.n_assignment + self.n_id_qubits

    @property
    def n_pairs(self) -> int:
        return len(self.r1)

    @property
    def u_index(self) -> int:
        return self.n_missions - 1

    def qubit(self, m: int, r: int) -> int:
        if not (0 <= m < self.n_missions and 0 <= r < self.n_resources):
            raise ValueError(f"allocation ({m}, {r}) outside the layout")
        return m * self.n_resources + r

    def id_qubits(self, r: int) -> tuple[int, ...]:
        """ID block of column r, most significant bit first."""
        if r in self.r1:
            block = self.r1.index(r)
        elif r in self.r2:
            block = len(self.r1) + self.r2.index(r)
        else:
            raise ValueError(f"resource {r} has no ID block")
        start = self.n_assignment + block * self.id_bits
        return tuple(range(start, start + self.id_bits))

    def id_value_bits(self, value: int) -> tuple[int, ...]:
        if not 0 <= value < (1 << self.id_bits):
            raise ValueError(f"ID value {value} does not fit in {self.id_bits} bits")
        return tuple((value >> (self.id_bits - 1 - k)) & 1 for k in range(self.id_bits))


# -- mission covering mixers -----------------------------------------------------


def mixer_s1(problem: McoProblem) -> PauliSum:
    """Scenario 1 mixer: identity plus, per resource, SWAPs between the
    unallocated row and every real mission row of that column."""
    if problem.scenario is not Scenario.S1:
        raise ValueError("this mixer applies to scenario 1 problems")
    n = problem.n_vars
    u = problem.u_index
    total = identity_sum(n)
    for r in range(problem.n_resources):
        for m in range(u):
            total = total + swap_pauli(flat_index(problem, u, r), flat_index(problem, m, r), n)
    return total


def c_dswap(pair: tuple[int, int, int], id_value: int, layout: QubitLayout) -> PauliSum:
    """ID-controlled dual swap.

    ``pair = (r1, r2, m)`` names an R1 column, an R2 column and a real
    mission.  When both columns' ID blocks encode ``id_value`` the operator
    swaps each column's unallocated bit with its mission-m bit (the columns
    move together, keeping rows balanced); otherwise it acts as identity.
    """
    r1, r2, m = pair
    if r1 not in layout.r1 or r2 not in layout.r2:
        raise ValueError("pair must combine one R1 and one R2 column")
    if m == layout.u_index:
        raise ValueError("dual swaps move columns relative to U; m must be a real mission")
    n = layout.n_qubits
    u = layout.u_index
    op = dswap_pauli(
        (layout.qubit(u, r1), layout.qubit(m, r1)),
        (layout.qubit(u, r2), layout.qubit(m, r2)),
        n,
    )
    bits = layout.id_value_bits(id_value)
    for column in (r1, r2):
        for qubit, bit in zip(layout.id_qubits(column), bits):
            op = _control_at(op, qubit, fire_on=bit)
    return op


def col_swap(r: int, r_prime: int, layout: QubitLayout) -> PauliSum:
    """Exchange two columns of the same resource set, ID bits included."""
    if r == r_prime:
        raise ValueError("cannot swap a column with itself")
    same_set = (r in layout.r1 and r_prime in layout.r1) or (
        r in layout.r2 and r_prime in layout.r2
    )
    if not same_set:
        raise ValueError("column swaps stay within one resource set")
    n = layout.n_qubits
    op = identity_sum(n)
    for m in range(layout.n_missions):
        op = pauli_product(op, swap_pauli(layout.qubit(m, r), layout.qubit(m, r_prime), n))
    for qa, qb in zip(layout.id_qubits(r), layout.id_qubits(r_prime)):
        op = pauli_product(op, swap_pauli(qa, qb, n))
    return op


def s2_mixer_families(problem: McoProblem, layout: QubitLayout) -> list[tuple[int, int, int, int]]:
    """Enumerate the (r1, r2, mission, id_value) dual-swap families."""
    if problem.scenario is not Scenario.S2:
        raise ValueError("scenario 2 only")
    families = []
    for r1 in layout.r1:
        for r2 in layout.r2:
            for m in range(layout.u_index):
                for j in range(layout.n_pairs):
                    families.append((r1, r2, m, j))
    return families


def mixer_s2(problem: McoProblem, layout: QubitLayout | None = None,
             reduced: bool = True) -> PauliSum:
    """Scenario 2 mixer over allocation plus ID qubits.

    The reduced form keeps only the ID-controlled dual swaps; thanks to the
    permutation symmetry of same-set columns the optimum stays reachable.
    ``reduced=False`` adds the intra-set column swaps (coefficient 1/2 over
    ordered pairs, i.e. weight one per unordered pair).
    """
    if problem.scenario is not Scenario.S2:
        raise ValueError("this mixer applies to scenario 2 problems")
    if layout is None:
        layout = QubitLayout.for_problem(problem)
    total = PauliSum(layout.n_qubits, {})
    for r1, r2, m, j in s2_mixer_families(problem, layout):
        total = total + c_dswap((r1, r2, m), j, layout)
    if not reduced:
        for group in (layout.r1, layout.r2):
            for a_idx, ra in enumerate(group):
                for rb in group[a_idx + 1:]:
                    total = total + col_swap(ra, rb, layout)
    return total


# -- dense realization and fast application ---------------------------------------


def _masks(s: str) -> tuple[int, int, int]:
    """(flip mask, phase mask, #Y) of a string; qubit 0 is the high bit."""
    n = len(s)
    flip = 0
    zy = 0
    n_y = 0
    for i, ch in enumerate(s):
        bit = 1 << (n - 1 - i)
        if ch == "X":
            flip |= bit
        elif ch == "Y":
            flip |= bit
            zy |= bit
            n_y += 1
        elif ch == "Z":
            zy |= bit
    return flip, zy, n_y


def _parity(values: np.ndarray, mask: int) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.int64)
    while mask:
        low = mask & -mask
        out ^= (values >> int(low).bit_length() - 1) & 1
        mask ^= low
    return out


def _basis_indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def realize_matrix(h: PauliSum, max_qubits: int = REALIZE_MAX_QUBITS) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the operator (guarded to small n).

    Each string is a signed permutation: X/Y flip bits, Y/Z contribute the
    phase ``i^(#Y) * (-1)^parity``, so the matrix is filled column-wise
    without any Kronecker products.
    """
    if h.n > max_qubits:
        raise ValueError(f"refusing to realize {h.n} qubits densely (cap {max_qubits})")
    dim = 1 << h.n
    idx = _basis_indices(h.n)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for s, c in h.terms.items():
        flip, zy, n_y = _masks(s)
        phases = (1j ** n_y) * (1.0 - 2.0 * _parity(idx, zy))
        mat[idx ^ flip, idx] += c * phases
    return mat


class CompiledPauliSum:
    """Strings grouped by flip mask for fast matrix-free application.

    For basis states, ``(H v)[b] = sum_f W_f[b ^ f] * v[b ^ f]`` where the
    diagonal weight ``W_f`` merges every string sharing flip mask ``f``;
    groups whose strings carry no phase collapse to a scalar.
    """

    _PERM_CACHE_ENTRIES = 1 << 24  # skip caching gather indices past ~16M ints

    def __init__(self, ps: PauliSum):
        self.n = ps.n
        dim = 1 << ps.n
        idx = _basis_indices(ps.n)
        grouped: dict[int, list[tuple[float, int, int]]] = {}
        for s, c in ps.terms.items():
            flip, zy, n_y = _masks(s)
            grouped.setdefault(flip, []).append((c, zy, n_y))
        self.groups: list[tuple[int, complex | np.ndarray]] = []
        for flip, entries in sorted(grouped.items()):
            if all(zy == 0 for _, zy, _ in entries):
                weight: complex | np.ndarray = complex(sum(c for c, _, _ in entries))
            else:
                acc = np.zeros(dim, dtype=np.complex128)
                for c, zy, n_y in entries:
                    acc += (c * 1j ** n_y) * (1.0 - 2.0 * _parity(idx, zy))
                weight = acc
            self.groups.append((flip, weight))
        self.one_norm = float(sum(abs(c) for c in ps.terms.values()))
        self._perms: dict[int, np.ndarray] | None = (
            {} if dim * max(len(self.groups), 1) <= self._PERM_CACHE_ENTRIES else None
        )
        self._norm_estimate: float | None = None

    def _gather_index(self, flip: int) -> np.ndarray:
        if self._perms is not None:
            perm = self._perms.get(flip)
            if perm is None:
                perm = _basis_indices(self.n) ^ flip
                self._perms[flip] = perm
            return perm
        return _basis_indices(self.n) ^ flip

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=np.complex128)
        for flip, weight in self.groups:
            t = weight * v
            if flip:
                out += t[self._gather_index(flip)]
            else:
                out += t
        return out

    def spectral_norm_bound(self) -> float:
        """Cheap upper-ish estimate of the operator norm, used to pick how
        finely a time evolution is sub-stepped."""
        if self._norm_estimate is None:
            if not self.groups:
                self._norm_estimate = 0.0
            else:
                rng = np.random.default_rng(0x5EED)
                dim = 1 << self.n
                v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
                v /= np.linalg.norm(v)
                growth = 0.0
                for _ in range(12):
                    w = self.matvec(v)
                    nrm = np.linalg.norm(w)
                    if nrm == 0.0:
                        break
                    growth = max(growth, nrm)
                    v = w / nrm
                self._norm_estimate = min(self.one_norm, 1.2 * growth) if growth else 0.0
        return self._norm_estimate


# -- text format ------------------------------------------------------------------


def pauli_sum_to_text(h: PauliSum) -> str:
    lines = [f"{c!r} {s}" for s, c in sorted(h.terms.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def pauli_sum_from_text(text: str, n: int | None = None) -> PauliSum:
    terms: dict[str, float] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        coef, string = line.split()
        terms[string] = terms.get(string, 0.0) + float(coef)
    if not terms and n is None:
        raise ValueError("cannot infer qubit count from an empty dump")
    size = n if n is not None else len(next(iter(terms)))
    return PauliSum(size, terms)
