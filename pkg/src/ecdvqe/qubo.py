"""Constrained binary programs, penalty/slack QUBO form, and diagonal Pauli-Z Hamiltonians."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_ENUMERATION_QUBITS = 24

_SENSES = ("<=", "=", ">=")


class SizeGuardError(ValueError):
    """Raised when an exhaustive routine is asked to enumerate too many bitstrings."""


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    penalty: float
    slack_bits: int | None = None

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"constraint sense must be one of {_SENSES}, got {self.sense!r}")
        if not self.penalty > 0:
            raise ValueError(f"penalty weight must be positive, got {self.penalty}")
        if self.slack_bits is not None and self.slack_bits < 0:
            raise ValueError("slack_bits override must be nonnegative")
        object.__setattr__(self, "coeffs", tuple((int(i), float(c)) for i, c in self.coeffs))

    def lhs(self, x: Sequence[int]) -> float:
        return sum(c * x[i] for i, c in self.coeffs)

    def is_satisfied(self, x: Sequence[int], atol: float = 1e-9) -> bool:
        value = self.lhs(x)
        if self.sense == "<=":
            return value <= self.rhs + atol
        if self.sense == ">=":
            return value >= self.rhs - atol
        return abs(value - self.rhs) <= atol

    def slack_range(self) -> float:
        """Largest slack value a binary assignment can require."""
        low = sum(min(c, 0.0) for _, c in self.coeffs)
        high = sum(max(c, 0.0) for _, c in self.coeffs)
        if self.sense == "<=":
            return self.rhs - low
        if self.sense == ">=":
            return high - self.rhs
        return 0.0

    def num_slack_bits(self) -> int:
        if self.sense == "=":
            return 0
        if self.slack_bits is not None:
            return self.slack_bits
        span = math.floor(self.slack_range() + 1e-9)
        if span <= 0:
            return 0
        return math.ceil(math.log2(span + 1))


@dataclass(frozen=True)
class BinaryProblem:
    sense: str
    objective: tuple[tuple[int, float], ...]
    constraints: tuple[LinearConstraint, ...] = ()
    num_variables: int | None = None

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        objective = tuple((int(i), float(c)) for i, c in self.objective)
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        used = {i for i, _ in objective}
        for con in self.constraints:
            used.update(i for i, _ in con.coeffs)
        n = self.num_variables if self.num_variables is not None else (max(used) + 1 if used else 0)
        if any(i < 0 for i in used):
            raise ValueError("variable indices must be nonnegative")
        if used and max(used) >= n:
            raise ValueError(f"variable index {max(used)} exceeds declared count {n}")
        object.__setattr__(self, "num_variables", n)

    def objective_value(self, x: Sequence[int]) -> float:
        return sum(c * x[i] for i, c in self.objective)

    def is_feasible(self, x: Sequence[int]) -> bool:
        return all(con.is_satisfied(x) for con in self.constraints)

    def slack_layout(self) -> list[tuple[int, int]]:
        """(first variable index, bit count) of each constraint's slack block."""
        start = self.num_variables
        out = []
        for con in self.constraints:
            k = con.num_slack_bits()
            out.append((start, k))
            start += k
        return out

    @property
    def total_variables(self) -> int:
        return self.num_variables + sum(con.num_slack_bits() for con in self.constraints)


def build_knapsack(values: Sequence[float], weights: Sequence[float], capacity: float,
                   penalty: float) -> BinaryProblem:
    if len(values) != len(weights):
        raise ValueError(f"got {len(values)} values but {len(weights)} weights")
    if len(values) == 0:
        raise ValueError("knapsack needs at least one item")
    if capacity <= 0:
        raise ValueError(f"capacity must be positive, got {capacity}")
    if any(v <= 0 for v in values) or any(w <= 0 for w in weights):
        raise ValueError("item values and weights must be positive")
    con = LinearConstraint(coeffs=tuple(enumerate(weights)), sense="<=", rhs=capacity, penalty=penalty)
    return BinaryProblem(sense="max", objective=tuple(enumerate(values)), constraints=(con,),
                         num_variables=len(values))


@dataclass
class BinaryPolynomial:
    """constant + sum_i linear[i] x_i + sum_{i<j} quadratic[(i, j)] x_i x_j over binary x."""

    num_variables: int
    constant: float = 0.0
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)

    def add(self, coef: float, *indices: int) -> None:
        idx = sorted(set(indices))  # x_i^2 = x_i
        if len(idx) == 0:
            self.constant += coef
        elif len(idx) == 1:
            self.linear[idx[0]] = self.linear.get(idx[0], 0.0) + coef
        elif len(idx) == 2:
            key = (idx[0], idx[1])
            self.quadratic[key] = self.quadratic.get(key, 0.0) + coef
        else:
            raise ValueError("BinaryPolynomial is at most quadratic")

    def normalize(self) -> "BinaryPolynomial":
        self.linear = {i: c for i, c in sorted(self.linear.items()) if c != 0.0}
        self.quadratic = {k: c for k, c in sorted(self.quadratic.items()) if c != 0.0}
        return self

    def evaluate(self, x: Sequence[int]) -> float:
        if len(x) != self.num_variables:
            raise ValueError(f"expected {self.num_variables} bits, got {len(x)}")
        val = self.constant
        val += sum(c * x[i] for i, c in self.linear.items())
        val += sum(c * x[i] * x[j] for (i, j), c in self.quadratic.items())
        return val


def _add_squared(poly: BinaryPolynomial, weight: float, const: float,
                 terms: list[tuple[int, float]]) -> None:
    """Add weight * (const + sum c_i x_i)^2."""
    poly.add(weight * const * const)
    for i, c in terms:
        poly.add(2.0 * weight * const * c, i)
    for (i, a), (j, b) in itertools.product(terms, repeat=2):
        poly.add(weight * a * b, i, j)


def to_unconstrained(problem: BinaryProblem) -> BinaryPolynomial:
    """Penalty form; slack bits follow the primary variables in constraint order, LSB first."""
    poly = BinaryPolynomial(num_variables=problem.total_variables)
    sign = -1.0 if problem.sense == "max" else 1.0
    for i, c in problem.objective:
        poly.add(sign * c, i)
    for con, (start, k) in zip(problem.constraints, problem.slack_layout()):
        slack = [(start + j, float(2**j)) for j in range(k)]
        lhs = list(con.coeffs)
        if con.sense == "=":
            _add_squared(poly, con.penalty, -con.rhs, lhs)
        elif con.sense == "<=":
            _add_squared(poly, con.penalty, con.rhs,
                         [(i, -c) for i, c in lhs] + [(i, -c) for i, c in slack])
        else:
            _add_squared(poly, con.penalty, -con.rhs, lhs + [(i, -c) for i, c in slack])
    return poly.normalize()


@dataclass
class PauliZHamiltonian:
    """Weighted sum of Z-words; a word is a sorted tuple of qubit indices, () for identity."""

    num_qubits: int
    terms: dict[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[tuple[int, ...], float] = {}
        for word, coef in dict(self.terms).items():
            key = tuple(sorted(word))
            if len(set(key)) != len(key):
                raise ValueError(f"repeated qubit in Z-word {word}")
            if key and (key[0] < 0 or key[-1] >= self.num_qubits):
                raise ValueError(f"Z-word {word} outside {self.num_qubits} qubits")
            merged[key] = merged.get(key, 0.0) + float(coef)
        self.terms = {k: v for k, v in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
                      if v != 0.0}

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def constant(self) -> float:
        return self.terms.get((), 0.0)

    def coefficient(self, *qubits: int) -> float:
        return self.terms.get(tuple(sorted(qubits)), 0.0)

    def diagonal(self) -> np.ndarray:
        """Energies of all 2^N basis states, index = bitstring read with qubit 0 most significant."""
        n = self.num_qubits
        if n > MAX_ENUMERATION_QUBITS:
            raise SizeGuardError(f"{n} qubits exceeds the enumeration guard of {MAX_ENUMERATION_QUBITS}")
        idx = np.arange(2**n, dtype=np.int64)
        spins = 1 - 2 * ((idx[:, None] >> (n - 1 - np.arange(n))) & 1)  # (2^N, N) of +-1
        energy = np.zeros(2**n)
        for word, coef in self.terms.items():
            if word:
                energy += coef * np.prod(spins[:, list(word)], axis=1)
            else:
                energy += coef
        return energy

    def to_records(self) -> list[dict]:
        return [{"coef": c, "z": list(w)} for w, c in self.terms.items()]

    @classmethod
    def from_records(cls, num_qubits: int, records: Iterable[dict]) -> "PauliZHamiltonian":
        terms: dict[tuple[int, ...], float] = {}
        for rec in records:
            key = tuple(sorted(rec["z"]))
            terms[key] = terms.get(key, 0.0) + rec["coef"]
        return cls(num_qubits, terms)


def to_pauli_hamiltonian(poly: BinaryPolynomial) -> PauliZHamiltonian:
    """Substitute x_i -> (1 - Z_i)/2 and collect terms."""
    terms: dict[tuple[int, ...], float] = {(): poly.constant}

    def bump(key, value):
        terms[key] = terms.get(key, 0.0) + value

    for i, c in poly.linear.items():
        bump((), c / 2)
        bump((i,), -c / 2)
    for (i, j), c in poly.quadratic.items():
        bump((), c / 4)
        bump((i,), -c / 4)
        bump((j,), -c / 4)
        bump((i, j), c / 4)
    return PauliZHamiltonian(poly.num_variables, terms)


def evaluate_bitstring(ham: PauliZHamiltonian, bits: Sequence[int]) -> float:
    if len(bits) != ham.num_qubits:
        raise ValueError(f"expected {ham.num_qubits} bits, got {len(bits)}")
    total = 0.0
    for word, coef in ham.terms.items():
        parity = sum(bits[i] for i in word) & 1
        total += -coef if parity else coef
    return total


def exact_ground_state(ham: PauliZHamiltonian) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum; ties go to the lexicographically smallest bitstring."""
    energies = ham.diagonal()
    # argmin returns the first minimum, and index order is lexicographic order
    k = int(np.argmin(energies))
    n = ham.num_qubits
    bits = tuple((k >> (n - 1 - i)) & 1 for i in range(n))
    return bits, float(energies[k])
