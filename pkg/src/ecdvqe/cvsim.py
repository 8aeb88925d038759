"""Statevector and density-matrix emulation of one qubit coupled to R truncated qumodes.

Basis index convention: flat = q * prod(L) + n_1 * (L_2 ... L_R) + ... + n_R.
Internally states are held as tensors of shape (batch, 2, L_1, ..., L_R, extra)
so that gradient stencils can be evolved together; `extra` is 1 for kets and
D for the bra side of a density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import MeasurementHistogram, ModeLayout
from .noise import (KrausSet, NoiseConfig, apply_single_mode, apply_single_mode_adjoint,
                    kraus_amplitude_damping)

PARAMS_PER_MODE = 4  # theta, phi, r, phi_tilde


@lru_cache(maxsize=None)
def _generator_eig(cutoff: int):
    """Eigenpairs of the Hermitian G = i(a^dag - a) on the truncated space."""
    a = np.diag(np.sqrt(np.arange(1, cutoff)), k=1)
    gen = 1j * (a.T - a)
    lam, vec = np.linalg.eigh(gen)
    return lam, vec


def _displacements(beta: np.ndarray, cutoff: int) -> np.ndarray:
    """D(beta) for a 1-D array of betas, shape (B, L, L).

    D(r e^{i phi}) = e^{i phi n} exp(-i r G) e^{-i phi n}; only G is diagonalized.
    """
    beta = np.asarray(beta, dtype=complex).reshape(-1)
    lam, vec = _generator_eig(cutoff)
    r = np.abs(beta)
    phase = np.angle(beta)
    core = (vec[None, :, :] * np.exp(-1j * r[:, None] * lam[None, :])[:, None, :]) @ vec.conj().T
    rot = np.exp(1j * phase[:, None] * np.arange(cutoff)[None, :])
    return rot[:, :, None] * core * rot.conj()[:, None, :]


def displacement_matrix(beta: complex, cutoff: int) -> np.ndarray:
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    return _displacements(np.array([beta]), cutoff)[0]


def _rotations(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    phi = np.asarray(phi, dtype=float).reshape(-1)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty((len(theta), 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 0, 1] = -1j * np.exp(-1j * phi) * s
    out[:, 1, 0] = -1j * np.exp(1j * phi) * s
    out[:, 1, 1] = c
    return out


def qubit_rotation(theta: float, phi: float) -> np.ndarray:
    """exp(-i theta/2 (cos phi X + sin phi Y))."""
    return _rotations(np.array([theta]), np.array([phi]))[0]


def ecd_matrix(beta: complex, cutoff: int) -> np.ndarray:
    """Dense 2L x 2L matrix of |1><0| (x) D(beta/2) + |0><1| (x) D(-beta/2)."""
    d = displacement_matrix(beta / 2, cutoff)
    z = np.zeros_like(d)
    return np.block([[z, d.conj().T], [d, z]])


@dataclass
class AnsatzParameters:
    """Per block j and qumode k: rotation (theta, phi) and ECD amplitude r * exp(i phi_tilde)."""

    theta: np.ndarray
    phi: np.ndarray
    r: np.ndarray
    phi_tilde: np.ndarray

    @property
    def depth(self) -> int:
        return self.theta.shape[0]

    @property
    def num_modes(self) -> int:
        return self.theta.shape[1]

    @property
    def beta(self) -> np.ndarray:
        return self.r * np.exp(1j * self.phi_tilde)

    def pack(self) -> np.ndarray:
        return np.stack([self.theta, self.phi, self.r, self.phi_tilde], axis=-1).reshape(-1)

    @classmethod
    def unpack(cls, vector, num_modes: int) -> "AnsatzParameters":
        v = np.asarray(vector, dtype=float)
        if v.size % (PARAMS_PER_MODE * num_modes):
            raise ValueError(f"parameter length {v.size} not a multiple of {PARAMS_PER_MODE * num_modes}")
        blocks = v.reshape(-1, num_modes, PARAMS_PER_MODE)
        return cls(*(blocks[..., i].copy() for i in range(PARAMS_PER_MODE)))

    @classmethod
    def zeros(cls, depth: int, num_modes: int) -> "AnsatzParameters":
        return cls(*(np.zeros((depth, num_modes)) for _ in range(PARAMS_PER_MODE)))

    @classmethod
    def random(cls, depth: int, num_modes: int, rng: np.random.Generator,
               r_scale: float = 0.2) -> "AnsatzParameters":
        shape = (depth, num_modes)
        return cls(rng.uniform(0, 2 * np.pi, shape), rng.uniform(0, 2 * np.pi, shape),
                   rng.uniform(0, r_scale, shape), rng.uniform(0, 2 * np.pi, shape))


def num_parameters(depth: int, num_modes: int) -> int:
    return PARAMS_PER_MODE * num_modes * depth


@dataclass
class HybridPureState:
    amplitudes: np.ndarray
    layout: ModeLayout

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_records(self, atol: float = 0.0) -> list[dict]:
        out = []
        for k in np.flatnonzero(np.abs(self.amplitudes) > atol):
            o = self.layout.outcome_at(int(k))
            a = self.amplitudes[k]
            out.append({"q": o.q, "occ": list(o.occupations), "re": float(a.real), "im": float(a.imag)})
        return out


@dataclass
class HybridDensityMatrix:
    matrix: np.ndarray
    layout: ModeLayout

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diagonal(self.matrix)), 0.0, None)


def vacuum(layout: ModeLayout) -> HybridPureState:
    amp = np.zeros(layout.dim, dtype=complex)
    amp[0] = 1.0
    return HybridPureState(amp, layout)


# -- batched tensor kernels ------------------------------------------------------------
# All kernels act on the qubit at axis 1 of a (B, 2, L_1, ..., L_R, X) tensor.


def _bcast(vals: np.ndarray, ndim: int) -> np.ndarray:
    return vals.reshape(vals.shape[0], *([1] * (ndim - 1)))


def _rotate(t: np.ndarray, rot: np.ndarray) -> np.ndarray:
    t0, t1 = t[:, 0], t[:, 1]
    nd = t0.ndim
    out = np.empty_like(t)
    np.multiply(_bcast(rot[:, 0, 0], nd), t0, out=out[:, 0])
    out[:, 0] += _bcast(rot[:, 0, 1], nd) * t1
    np.multiply(_bcast(rot[:, 1, 0], nd), t0, out=out[:, 1])
    out[:, 1] += _bcast(rot[:, 1, 1], nd) * t1
    return out


def _mode_apply(t: np.ndarray, mats: np.ndarray, axis: int) -> np.ndarray:
    """Contract per-batch matrices (B, L, L) into `axis` of t, without moving axes."""
    shp = t.shape
    pre = int(np.prod(shp[1:axis], dtype=int))
    post = int(np.prod(shp[axis + 1:], dtype=int))
    x = t.reshape(shp[0], pre, shp[axis], post)
    return (mats[:, None] @ x).reshape(shp)


def _ecd(t: np.ndarray, d_plus: np.ndarray, d_minus: np.ndarray, mode: int) -> np.ndarray:
    """|1><0| (x) D_plus + |0><1| (x) D_minus, D acting on qumode `mode`."""
    out = np.empty_like(t)
    out[:, 0] = _mode_apply(t[:, 1], d_minus, 1 + mode)
    out[:, 1] = _mode_apply(t[:, 0], d_plus, 1 + mode)
    return out


def _apply_block(t: np.ndarray, gates) -> np.ndarray:
    for k, rot, disp in gates:
        t = _rotate(t, rot)
        t = _ecd(t, disp, np.conj(np.swapaxes(disp, 1, 2)), k)
    return t


def _apply_block_inverse(t: np.ndarray, gates) -> np.ndarray:
    # ECD is its own inverse; R(theta, phi)^dag = conj-transpose
    for k, rot, disp in reversed(gates):
        t = _ecd(t, disp, np.conj(np.swapaxes(disp, 1, 2)), k)
        t = _rotate(t, np.conj(np.swapaxes(rot, 1, 2)))
    return t


def _conj_swap(t: np.ndarray) -> np.ndarray:
    B, D = t.shape[0], t.shape[-1]
    m = t.reshape(B, D, D)
    return np.ascontiguousarray(np.conj(np.swapaxes(m, 1, 2))).reshape(t.shape)


def _block_gates(packed: np.ndarray, layout: ModeLayout):
    """Yield, per block, a list of (mode, rotation (B,2,2), D(beta/2) (B,L,L))."""
    R = layout.num_modes
    B = packed.shape[0]
    blocks = packed.reshape(B, -1, R, PARAMS_PER_MODE)
    for j in range(blocks.shape[1]):
        gates = []
        for k in range(R):
            p = blocks[:, j, k, :]
            rot = _rotations(p[:, 0], p[:, 1])
            disp = _displacements(0.5 * p[:, 2] * np.exp(1j * p[:, 3]), layout.cutoffs[k])
            gates.append((k, rot, disp))
        yield gates


def _check_params(packed: np.ndarray, layout: ModeLayout) -> np.ndarray:
    packed = np.atleast_2d(np.asarray(packed, dtype=float))
    per_block = PARAMS_PER_MODE * layout.num_modes
    if packed.shape[1] % per_block:
        raise ValueError(f"{packed.shape[1]} parameters do not fit {layout.num_modes} qumodes")
    return packed


def run_ansatz_batch(packed: np.ndarray, layout: ModeLayout) -> np.ndarray:
    """Final amplitudes (B, D) for a batch of packed parameter vectors (B, P)."""
    packed = _check_params(packed, layout)
    B = packed.shape[0]
    t = np.zeros((B, *layout.shape), dtype=complex)
    t[(slice(None),) + (0,) * len(layout.shape)] = 1.0
    t = t[..., None]
    for gates in _block_gates(packed, layout):
        t = _apply_block(t, gates)
    return t.reshape(B, -1)


def run_ansatz(params: AnsatzParameters | np.ndarray, layout: ModeLayout) -> HybridPureState:
    """Evolve the vacuum through the ECD-rotation blocks: per block, per mode, rotation then ECD."""
    if isinstance(params, AnsatzParameters):
        if params.num_modes != layout.num_modes:
            raise ValueError(f"parameters for {params.num_modes} qumodes, layout has {layout.num_modes}")
        params = params.pack()
    return HybridPureState(run_ansatz_batch(params, layout)[0], layout)


def apply_rotation(state: HybridPureState, theta: float, phi: float) -> HybridPureState:
    t = state.amplitudes.reshape(1, *state.layout.shape, 1)
    t = _rotate(t, _rotations(np.array([theta]), np.array([phi])))
    return HybridPureState(t.reshape(-1), state.layout)


def apply_ecd(state: HybridPureState, mode: int, beta: complex) -> HybridPureState:
    layout = state.layout
    if not 0 <= mode < layout.num_modes:
        raise IndexError(f"qumode {mode} out of range for {layout.num_modes} qumodes")
    disp = _displacements(np.array([beta / 2]), layout.cutoffs[mode])
    t = state.amplitudes.reshape(1, *layout.shape, 1)
    t = _ecd(t, disp, np.conj(np.swapaxes(disp, 1, 2)), mode)
    return HybridPureState(t.reshape(-1), layout)


def exact_probabilities(state: HybridPureState | HybridDensityMatrix) -> MeasurementHistogram:
    return MeasurementHistogram.from_probabilities(state.probabilities(), state.layout)


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return rng.multinomial(shots, p / p.sum())


def sample_histogram(state: HybridPureState | HybridDensityMatrix, shots: int,
                     seed=None) -> MeasurementHistogram:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    counts = sample_counts(state.probabilities(), shots, np.random.default_rng(seed))
    return MeasurementHistogram.from_probabilities(counts / shots, state.layout)


def _noise_krauses(layout: ModeLayout, noise: NoiseConfig) -> list[KrausSet]:
    return [kraus_amplitude_damping(noise.kappa_tau, L) for L in layout.cutoffs]


def evolve_noisy_batch(packed: np.ndarray, layout: ModeLayout, noise: NoiseConfig,
                       diagonal_only: bool = True) -> np.ndarray:
    """Density-matrix evolution with the loss channel after every block.

    Returns the (B, D) diagonals, or (B, D, D) matrices when diagonal_only is False.
    """
    packed = _check_params(packed, layout)
    B, D = packed.shape[0], layout.dim
    nm = len(layout.shape)
    rho = np.zeros((B, *layout.shape, D), dtype=complex)
    rho[(slice(None),) + (0,) * (nm + 1)] = 1.0
    krauses = _noise_krauses(layout, noise)
    for gates in _block_gates(packed, layout):
        # U rho U^dag = U (U rho)^dag for Hermitian rho; keeps every gate on the ket side
        rho = _apply_block(_conj_swap(_apply_block(rho, gates)), gates)
        if not noise.noiseless:
            full = rho.reshape(B, *layout.shape, *layout.shape)
            for k, kraus in enumerate(krauses):
                full = apply_single_mode(full, kraus, 2 + k, nm + 2 + k)
            rho = full.reshape(rho.shape)
    mats = rho.reshape(B, D, D)
    if diagonal_only:
        return np.real(np.diagonal(mats, axis1=1, axis2=2)).copy()
    return mats


def evolve_noisy(params: AnsatzParameters | np.ndarray, layout: ModeLayout,
                 noise: NoiseConfig) -> HybridDensityMatrix:
    if isinstance(params, AnsatzParameters):
        params = params.pack()
    mats = evolve_noisy_batch(params, layout, noise, diagonal_only=False)
    return HybridDensityMatrix(mats[0], layout)


def noisy_stencil_costs(packed: np.ndarray, layout: ModeLayout, noise: NoiseConfig,
                        energies: np.ndarray, step: float):
    """Diagonal-observable cost at v and at v +- step*e_i for every parameter i.

    Each parameter lives in one block, so the forward density matrices before every
    block and the observable propagated back through the later blocks are stored
    once; a shifted evaluation then re-runs only the block holding that parameter.
    Returns (cost, plus, minus) with plus[i] = cost(v + step e_i).
    """
    packed = _check_params(packed, layout)[0]
    D = layout.dim
    per_block = PARAMS_PER_MODE * layout.num_modes
    depth = packed.size // per_block
    nm = len(layout.shape)
    krauses = None if noise.noiseless else _noise_krauses(layout, noise)

    def channel(t, adjoint=False):
        if krauses is None:
            return t
        full = t.reshape(t.shape[0], *layout.shape, *layout.shape)
        fn = apply_single_mode_adjoint if adjoint else apply_single_mode
        for k, kraus in enumerate(krauses):
            full = fn(full, kraus, 2 + k, nm + 2 + k)
        return full.reshape(t.shape)

    gates = list(_block_gates(packed[None, :], layout))
    rho = np.zeros((1, *layout.shape, D), dtype=complex)
    rho[(0,) + (0,) * nm + (0,)] = 1.0
    before = []
    for g in gates:
        before.append(rho)
        rho = channel(_apply_block(_conj_swap(_apply_block(rho, g)), g))
    cost = float(np.dot(np.real(np.diagonal(rho.reshape(D, D))), energies))

    obs = np.diag(np.asarray(energies, dtype=complex)).reshape(rho.shape)
    pulled = [None] * depth
    for j in reversed(range(depth)):
        pulled[j] = channel(obs, adjoint=True)
        obs = _apply_block_inverse(_conj_swap(_apply_block_inverse(pulled[j], gates[j])), gates[j])

    plus = np.empty(packed.size)
    minus = np.empty(packed.size)
    eye = np.eye(per_block) * step
    for j in range(depth):
        block = packed[j * per_block:(j + 1) * per_block]
        shifted = np.concatenate([block + eye, block - eye])
        (g,) = _block_gates(shifted, layout)
        start = np.broadcast_to(before[j], (2 * per_block, *before[j].shape[1:]))
        out = _apply_block(_conj_swap(_apply_block(np.ascontiguousarray(start), g)), g)
        vals = np.real(np.einsum("ij,bij->b", np.conj(pulled[j].reshape(D, D)), out.reshape(-1, D, D)))
        plus[j * per_block:(j + 1) * per_block] = vals[:per_block]
        minus[j * per_block:(j + 1) * per_block] = vals[per_block:]
    return cost, plus, minus
