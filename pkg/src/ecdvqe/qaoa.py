"""Qubit-only QAOA baseline on the same diagonal Hamiltonian."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .optimize import bfgs
from .qubo import PauliZHamiltonian, SizeGuardError, exact_ground_state
from .vqe import OptimizerConfig

MAX_QAOA_QUBITS = 16


@dataclass
class QaoaParameters:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if self.gamma.shape != self.beta.shape:
            raise ValueError(f"{self.gamma.size} gammas but {self.beta.size} betas")

    @property
    def layers(self) -> int:
        return self.gamma.size

    def pack(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta])

    @classmethod
    def unpack(cls, vector) -> "QaoaParameters":
        v = np.asarray(vector, dtype=float)
        p = v.size // 2
        return cls(v[:p], v[p:])


@lru_cache(maxsize=None)
def _hamming_table(k: int) -> np.ndarray:
    idx = np.arange(2**k)
    x = idx[:, None] ^ idx[None, :]
    return np.array([bin(v).count("1") for v in range(2**k)])[x]


def _rx_product(beta: np.ndarray, k: int) -> np.ndarray:
    """exp(-i beta X) tensored over k qubits, shape (len(beta), 2^k, 2^k).

    Entry (x, y) of the product is cos^(k-d) * (-i sin)^d with d the Hamming distance.
    """
    d = np.arange(k + 1)
    c, s = np.cos(beta)[:, None], -1j * np.sin(beta)[:, None]
    coef = c ** (k - d) * s**d
    return coef[:, _hamming_table(k)]


def qaoa_states(energies: np.ndarray, packed: np.ndarray) -> np.ndarray:
    """Batch of QAOA statevectors (B, 2^N) for packed [gamma..., beta...] rows.

    The mixer is applied as two blocks of single-qubit factors: the leading half of
    the qubits from the left and the trailing half from the right.
    """
    packed = np.atleast_2d(np.asarray(packed, dtype=float))
    B, p = packed.shape[0], packed.shape[1] // 2
    dim = energies.size
    n = dim.bit_length() - 1
    n_lead = n // 2
    psi = np.full((B, 2**n_lead, 2 ** (n - n_lead)), dim ** -0.5, dtype=complex)
    for layer in range(p):
        # stencil batches share most angles, so each distinct angle is built once
        gammas, gi = np.unique(packed[:, layer], return_inverse=True)
        psi = psi * np.exp(-1j * gammas[:, None] * energies[None, :])[gi].reshape(psi.shape)
        betas, bi = np.unique(packed[:, p + layer], return_inverse=True)
        # Kronecker products of the symmetric factor are symmetric, so no transpose
        psi = _rx_product(betas, n_lead)[bi] @ psi @ _rx_product(betas, n - n_lead)[bi]
    return psi.reshape(B, dim)


def qaoa_state(ham: PauliZHamiltonian, params: QaoaParameters) -> np.ndarray:
    """|+>^N followed by p alternating problem-phase and X-mixer layers."""
    if ham.num_qubits > MAX_QAOA_QUBITS:
        raise SizeGuardError(f"{ham.num_qubits} qubits exceeds the QAOA guard of {MAX_QAOA_QUBITS}")
    return qaoa_states(ham.diagonal(), params.pack())[0]


@dataclass
class QaoaTrial:
    seed: int
    params: QaoaParameters
    energy: float
    solution_probability: float
    iterations: int
    reason: str


@dataclass
class QaoaResult:
    layers: int
    best: QaoaTrial
    trials: list[QaoaTrial]
    probabilities: np.ndarray
    solution: tuple[int, ...]
    num_qubits: int

    def distribution_records(self, cutoff: float = 0.0) -> list[dict]:
        order = np.argsort(-self.probabilities, kind="stable")
        n = self.num_qubits
        return [{"bits": format(int(k), f"0{n}b"), "p": float(self.probabilities[k])}
                for k in order if self.probabilities[k] > cutoff]


def run_qaoa(ham: PauliZHamiltonian, layers: int, trials: int = 50,
             config: OptimizerConfig | None = None) -> QaoaResult:
    """Independent seeded trials; keeps the one with the largest ground-bitstring probability."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if ham.num_qubits > MAX_QAOA_QUBITS:
        raise SizeGuardError(f"{ham.num_qubits} qubits exceeds the QAOA guard of {MAX_QAOA_QUBITS}")
    config = config or OptimizerConfig(max_iter=150)
    energies = ham.diagonal()
    solution, _ = exact_ground_state(ham)
    target = int("".join(map(str, solution)), 2) if solution else 0
    h = config.step
    n_par = 2 * layers

    def fun(x):
        psi = qaoa_states(energies, x)[0]
        return float(np.abs(psi) ** 2 @ energies)

    def fun_and_grad(x):
        shifts = np.concatenate([np.zeros((1, n_par)), np.eye(n_par) * h, -np.eye(n_par) * h])
        vals = (np.abs(qaoa_states(energies, x[None, :] + shifts)) ** 2) @ energies
        return float(vals[0]), (vals[1:n_par + 1] - vals[n_par + 1:]) / (2 * h)

    results = []
    for t in range(trials):
        seed = config.seed + t
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(0, 2 * np.pi, n_par)
        res = bfgs(fun, lambda x: fun_and_grad(x)[1], x0, max_iter=config.max_iter, gtol=config.gtol,
                   ftol=config.ftol, fun_and_grad=fun_and_grad, max_step=config.max_step,
                   scale_first=config.scale_first)
        probs = np.abs(qaoa_states(energies, res.x)[0]) ** 2
        results.append(QaoaTrial(seed, QaoaParameters.unpack(res.x), res.fun, float(probs[target]),
                                 res.nit, res.reason))
    best = max(results, key=lambda r: r.solution_probability)
    probs = np.abs(qaoa_states(energies, best.params.pack())[0]) ** 2
    return QaoaResult(layers, best, results, probs, solution, ham.num_qubits)


def qaoa_layer_sweep(ham: PauliZHamiltonian, layer_counts: Sequence[int], trials: int = 50,
                     config: OptimizerConfig | None = None) -> list[QaoaResult]:
    config = config or OptimizerConfig(max_iter=150)
    return [run_qaoa(ham, p, trials, replace(config)) for p in layer_counts]
