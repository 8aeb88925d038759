"""Constrained binary optimization with a hybrid qubit-qumode variational eigensolver."""

from .hilbert import BasisOutcome, MeasurementHistogram, ModeLayout, decode, encode, make_layout
from .noise import NoiseConfig
from .qubo import (BinaryProblem, LinearConstraint, PauliZHamiltonian, build_knapsack,
                   evaluate_bitstring, exact_ground_state, to_pauli_hamiltonian, to_unconstrained)
from .vqe import OptimizerConfig, extract_solution, run_ecd_vqe, run_ecd_vqe_seeds

__all__ = [
    "BasisOutcome", "BinaryProblem", "LinearConstraint", "MeasurementHistogram", "ModeLayout",
    "NoiseConfig", "OptimizerConfig", "PauliZHamiltonian", "build_knapsack", "decode", "encode",
    "evaluate_bitstring", "exact_ground_state", "extract_solution", "make_layout", "run_ecd_vqe",
    "run_ecd_vqe_seeds", "to_pauli_hamiltonian", "to_unconstrained",
]
