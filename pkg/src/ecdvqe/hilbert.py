"""Mapping N qubit slots onto one physical qubit plus R truncated qumodes.

Slot 0 is the qubit. The remaining slots are split into contiguous groups, one
per qumode, and within a group the lowest slot is the most significant bit of
the photon number. With this order the flat basis index (qubit slowest, modes
in declaration order) is the N-bit string read big-endian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .qubo import BinaryProblem, PauliZHamiltonian, evaluate_bitstring


@dataclass(frozen=True)
class ModeLayout:
    num_qubits: int
    cutoffs: tuple[int, ...]

    @property
    def num_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dim(self) -> int:
        return 2 * int(np.prod(self.cutoffs))

    @property
    def shape(self) -> tuple[int, ...]:
        return (2, *self.cutoffs)

    @property
    def groups(self) -> tuple[range, ...]:
        out, start = [], 1
        for L in self.cutoffs:
            k = L.bit_length() - 1
            out.append(range(start, start + k))
            start += k
        return tuple(out)

    def subsystem_of(self, slot: int) -> int:
        """0 for the qubit, j+1 for qumode j."""
        if slot == 0:
            return 0
        for j, g in enumerate(self.groups):
            if slot in g:
                return j + 1
        raise IndexError(f"slot {slot} outside layout of {self.num_qubits} qubits")

    def outcomes(self) -> Iterable["BasisOutcome"]:
        for idx in np.ndindex(*self.shape):
            yield BasisOutcome(idx[0], tuple(int(n) for n in idx[1:]))

    def flat_index(self, outcome: "BasisOutcome") -> int:
        return int(np.ravel_multi_index((outcome.q, *outcome.occupations), self.shape))

    def outcome_at(self, index: int) -> "BasisOutcome":
        idx = np.unravel_index(index, self.shape)
        return BasisOutcome(int(idx[0]), tuple(int(n) for n in idx[1:]))

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "cutoffs": list(self.cutoffs),
                "groups": [[g.start, g.stop - 1] for g in self.groups], "bit_order": "msb-first"}


def make_layout(num_qubits: int, cutoffs: Sequence[int]) -> ModeLayout:
    cutoffs = tuple(int(L) for L in cutoffs)
    if not cutoffs:
        raise ValueError("need at least one qumode")
    for L in cutoffs:
        if L < 2 or L & (L - 1):
            raise ValueError(f"Fock cutoff {L} is not a power of two >= 2")
    if 2 * int(np.prod(cutoffs)) != 2**num_qubits:
        raise ValueError(f"2*prod{cutoffs} != 2^{num_qubits}")
    return ModeLayout(num_qubits, cutoffs)


def suggest_layouts(num_qubits: int, num_modes: int = 2) -> list[tuple[int, ...]]:
    """All power-of-two cutoff tuples for the given mode count, most balanced first."""
    rest = num_qubits - 1
    if rest < num_modes:
        return []
    out = []

    def split(left, k, acc):
        if k == 1:
            out.append(tuple(acc + [2**left]))
            return
        for s in range(1, left - k + 2):
            split(left - s, k - 1, acc + [2**s])

    split(rest, num_modes, [])
    return sorted(out, key=lambda c: (max(c) - min(c), c))


@dataclass(frozen=True, order=True)
class BasisOutcome:
    q: int
    occupations: tuple[int, ...]

    def __str__(self):
        return "|" + ",".join(str(v) for v in (self.q, *self.occupations)) + ">"


def encode(bits: Sequence[int], layout: ModeLayout) -> BasisOutcome:
    if len(bits) != layout.num_qubits:
        raise ValueError(f"expected {layout.num_qubits} bits, got {len(bits)}")
    occ = []
    for g in layout.groups:
        n = 0
        for slot in g:
            n = 2 * n + int(bits[slot])
        occ.append(n)
    return BasisOutcome(int(bits[0]), tuple(occ))


def decode(outcome: BasisOutcome, layout: ModeLayout) -> tuple[int, ...]:
    if len(outcome.occupations) != layout.num_modes:
        raise ValueError(f"outcome has {len(outcome.occupations)} modes, layout has {layout.num_modes}")
    if outcome.q not in (0, 1):
        raise ValueError(f"qubit value {outcome.q} is not a bit")
    bits = [outcome.q]
    for n, L, g in zip(outcome.occupations, layout.cutoffs, layout.groups):
        if not 0 <= n < L:
            raise ValueError(f"occupation {n} outside cutoff {L}")
        k = len(g)
        bits.extend((n >> (k - 1 - i)) & 1 for i in range(k))
    return tuple(bits)


class MeasurementHistogram(dict):
    """Sparse map BasisOutcome -> probability (or normalized count)."""

    @classmethod
    def from_probabilities(cls, probs: np.ndarray, layout: ModeLayout, cutoff: float = 0.0):
        hist = cls()
        flat = np.asarray(probs).reshape(-1)
        for k in np.flatnonzero(flat > cutoff):
            hist[layout.outcome_at(int(k))] = float(flat[k])
        return hist

    @property
    def mass(self) -> float:
        return float(sum(self.values()))

    def argmax(self) -> BasisOutcome:
        """Most probable outcome; ties resolved by lexicographic outcome order."""
        if not self:
            raise ValueError("empty histogram")
        best = max(self.values())
        return min(o for o, p in self.items() if p == best)

    def to_dense(self, layout: ModeLayout) -> np.ndarray:
        out = np.zeros(layout.dim)
        for o, p in self.items():
            out[layout.flat_index(o)] += p
        return out

    def to_records(self) -> list[dict]:
        items = sorted(self.items(), key=lambda kv: (-kv[1], kv[0]))
        return [{"q": o.q, "occ": list(o.occupations), "p": p} for o, p in items]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "MeasurementHistogram":
        hist = cls()
        for r in records:
            o = BasisOutcome(int(r["q"]), tuple(int(n) for n in r["occ"]))
            hist[o] = hist.get(o, 0.0) + float(r["p"])
        return hist


def expectation_from_histogram(ham: PauliZHamiltonian, hist: Mapping[BasisOutcome, float],
                               layout: ModeLayout) -> float:
    if ham.num_qubits != layout.num_qubits:
        raise ValueError(f"Hamiltonian has {ham.num_qubits} qubits, layout {layout.num_qubits}")
    return sum(p * evaluate_bitstring(ham, decode(o, layout)) for o, p in hist.items())


@dataclass
class ProjectorHamiltonian:
    """Fock-diagonal tables: single[i][n] and pair[(i, j)][n, m] over subsystems Q, B1..BR."""

    layout: ModeLayout
    single: list[np.ndarray]
    pair: dict[tuple[int, int], np.ndarray]

    def evaluate(self, outcome: BasisOutcome) -> float:
        levels = (outcome.q, *outcome.occupations)
        val = sum(float(t[levels[i]]) for i, t in enumerate(self.single))
        val += sum(float(t[levels[i], levels[j]]) for (i, j), t in self.pair.items())
        return val


def _word_table(word: Sequence[int], layout: ModeLayout, subsystem: int) -> np.ndarray:
    """Diagonal of the product of Z over `word` restricted to one subsystem's levels."""
    if subsystem == 0:
        slots, dim = [0], 2
    else:
        g = layout.groups[subsystem - 1]
        slots, dim = list(g), layout.cutoffs[subsystem - 1]
    k = len(slots)
    levels = np.arange(dim)
    sign = np.ones(dim)
    for s in word:
        bit = (levels >> (k - 1 - slots.index(s))) & 1
        sign *= 1 - 2 * bit
    return sign


def project_hamiltonian(ham: PauliZHamiltonian, layout: ModeLayout) -> ProjectorHamiltonian:
    if ham.num_qubits != layout.num_qubits:
        raise ValueError(f"Hamiltonian has {ham.num_qubits} qubits, layout {layout.num_qubits}")
    dims = layout.shape
    single = [np.zeros(d) for d in dims]
    pair: dict[tuple[int, int], np.ndarray] = {}
    for word, coef in ham.terms.items():
        by_sub: dict[int, list[int]] = {}
        for s in word:
            by_sub.setdefault(layout.subsystem_of(s), []).append(s)
        subs = sorted(by_sub)
        if len(subs) == 0:
            single[0] += coef
        elif len(subs) == 1:
            i = subs[0]
            single[i] += coef * _word_table(by_sub[i], layout, i)
        elif len(subs) == 2:
            i, j = subs
            table = np.outer(_word_table(by_sub[i], layout, i), _word_table(by_sub[j], layout, j))
            pair[(i, j)] = pair.get((i, j), np.zeros((dims[i], dims[j]))) + coef * table
        else:
            raise NotImplementedError(f"Z-word {word} spans {len(subs)} subsystems; only pairwise supported")
    return ProjectorHamiltonian(layout, single, dict(sorted(pair.items())))


@dataclass
class SlackNumberHamiltonian:
    """Energy where one constraint's slack is read straight off a qumode's photon number.

    The remaining constraints keep their binary slack bits. The photon number
    stands in for the slack integer itself; relative to the binary-expanded form
    (slack bits LSB first, group bits MSB first) the two agree after reversing the
    bits of that mode's occupation, see ``binary_outcome``.
    """

    problem: BinaryProblem
    layout: ModeLayout
    constraint: int
    mode: int
    penalty: float

    def _slack_value(self, bits: Sequence[int], start: int, count: int) -> int:
        return sum(bits[start + j] << j for j in range(count))

    def evaluate(self, outcome: BasisOutcome) -> float:
        bits = decode(outcome, self.layout)
        x = bits[: self.problem.num_variables]
        sign = -1.0 if self.problem.sense == "max" else 1.0
        energy = sign * self.problem.objective_value(x)
        for c, (con, (start, count)) in enumerate(zip(self.problem.constraints, self.problem.slack_layout())):
            if c == self.constraint:
                slack, weight = outcome.occupations[self.mode], self.penalty
            else:
                slack, weight = self._slack_value(bits, start, count), con.penalty
            lhs = con.lhs(x)
            if con.sense == "=":
                resid = lhs - con.rhs
            elif con.sense == "<=":
                resid = con.rhs - lhs - slack
            else:
                resid = lhs - slack - con.rhs
            energy += weight * resid * resid
        return energy

    def binary_outcome(self, outcome: BasisOutcome) -> BasisOutcome:
        """The binary-form outcome carrying the same slack integer."""
        k = len(self.layout.groups[self.mode])
        m = outcome.occupations[self.mode]
        rev = int(format(m, f"0{k}b")[::-1], 2)
        occ = list(outcome.occupations)
        occ[self.mode] = rev
        return BasisOutcome(outcome.q, tuple(occ))


def slack_number_hamiltonian(problem: BinaryProblem, layout: ModeLayout, constraint: int = 0,
                             penalty: float | None = None) -> SlackNumberHamiltonian:
    """Map constraint `constraint`'s slack integer onto the photon number of the qumode holding its bits."""
    if layout.num_qubits != problem.total_variables:
        raise ValueError(f"layout has {layout.num_qubits} qubits, problem {problem.total_variables} variables")
    start, count = problem.slack_layout()[constraint]
    if count == 0:
        raise ValueError(f"constraint {constraint} has no slack bits")
    slots = range(start, start + count)
    for j, g in enumerate(layout.groups):
        if g == slots:
            weight = problem.constraints[constraint].penalty if penalty is None else penalty
            return SlackNumberHamiltonian(problem, layout, constraint, j, weight)
    raise ValueError(f"slack bits {list(slots)} do not fill exactly one qumode group")
