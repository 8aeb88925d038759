import pytest

from ecdvqe.hilbert import make_layout
from ecdvqe.qubo import (BinaryProblem, LinearConstraint, build_knapsack, to_pauli_hamiltonian,
                         to_unconstrained)


def knapsack_problem():
    return build_knapsack([2, 5, 7, 3], [2.5, 3, 4, 3.5], 7, 2)


def multi_constraint_problem():
    return BinaryProblem(
        sense="min",
        objective=((0, 1), (1, 2), (2, 1)),
        constraints=(
            LinearConstraint(((0, 1), (1, 1)), "=", 1, 5),
            LinearConstraint(((0, 2), (1, 2), (2, 1)), "<=", 3, 5, slack_bits=2),
            LinearConstraint(((0, 1), (1, 1), (2, 1)), ">=", 1, 5, slack_bits=1),
        ),
        num_variables=3,
    )


@pytest.fixture
def bkp():
    return knapsack_problem()


@pytest.fixture
def bkp_ham():
    return to_pauli_hamiltonian(to_unconstrained(knapsack_problem()))


@pytest.fixture
def bkp_layout():
    return make_layout(7, (8, 8))


@pytest.fixture
def mc():
    return multi_constraint_problem()


@pytest.fixture
def mc_ham():
    return to_pauli_hamiltonian(to_unconstrained(multi_constraint_problem()))


@pytest.fixture
def mc_layout():
    return make_layout(6, (4, 8))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion; returns the verdict."""
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
