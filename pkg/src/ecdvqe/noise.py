"""Photon-loss (amplitude damping) channel on truncated qumodes."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


@dataclass(frozen=True)
class NoiseConfig:
    """Loss per ansatz block, as the dimensionless product kappa*tau; same for every qumode."""

    kappa_tau: float = 0.0

    def __post_init__(self):
        if self.kappa_tau < 0:
            raise ValueError(f"kappa_tau must be nonnegative, got {self.kappa_tau}")

    @property
    def noiseless(self) -> bool:
        return self.kappa_tau == 0.0


@dataclass(frozen=True)
class KrausSet:
    operators: tuple[np.ndarray, ...]
    kappa_tau: float

    @property
    def cutoff(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.cutoff))))

    def shift_weights(self) -> list[np.ndarray] | None:
        """If K_j only has entries (n-j, n), return w_j[n] = K_j[n-j, n] for n >= j; else None."""
        L = self.cutoff
        weights = []
        for j, k in enumerate(self.operators):
            band = np.diagonal(k, offset=j).copy()
            mask = np.zeros((L, L), dtype=bool)
            mask[np.arange(L - j), np.arange(j, L)] = True
            if np.any(k[~mask] != 0):
                return None
            weights.append(band)
        return weights


def kraus_amplitude_damping(kappa_tau: float, cutoff: int) -> KrausSet:
    if kappa_tau < 0:
        raise ValueError(f"kappa_tau must be nonnegative, got {kappa_tau}")
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    n = np.arange(cutoff)
    a = np.diag(np.sqrt(n[1:]), k=1).astype(complex)
    loss = -np.expm1(-kappa_tau)
    damp = np.diag(np.exp(-0.5 * kappa_tau * n))
    ops = [np.zeros((cutoff, cutoff), dtype=complex)]
    aj = np.eye(cutoff, dtype=complex)
    for j in range(1, cutoff):
        aj = aj @ a
        ops.append(np.sqrt(loss**j / factorial(j)) * damp @ aj)
    # every K_j^dag K_j is diagonal in the Fock basis, so the root is elementwise
    residual = np.eye(cutoff) - sum(k.conj().T @ k for k in ops[1:])
    ops[0] = np.diag(np.sqrt(np.clip(np.real(np.diag(residual)), 0.0, None))).astype(complex)
    return KrausSet(tuple(ops), float(kappa_tau))


def _apply_on_axes(rho: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(rho, axis, -1)
    return np.moveaxis(moved @ mat.T, -1, axis)


def apply_single_mode(rho: np.ndarray, kraus: KrausSet, ket_axis: int, bra_axis: int) -> np.ndarray:
    """sum_j K_j rho K_j^dag with K acting on one ket axis and one bra axis of a tensor.

    Leading axes not named are carried along, so batches of density matrices work too.
    """
    weights = kraus.shift_weights()
    if weights is None:
        out = np.zeros_like(rho)
        for k in kraus.operators:
            out += _apply_on_axes(_apply_on_axes(rho, k, ket_axis), k.conj(), bra_axis)
        return out
    L = kraus.cutoff
    out = np.zeros_like(rho)
    shape = [1] * rho.ndim
    for j, w in enumerate(weights):
        if not np.any(w):
            continue
        src = [slice(None)] * rho.ndim
        dst = [slice(None)] * rho.ndim
        src[ket_axis] = src[bra_axis] = slice(j, L)
        dst[ket_axis] = dst[bra_axis] = slice(0, L - j)
        shape_k, shape_b = list(shape), list(shape)
        shape_k[ket_axis] = shape_b[bra_axis] = L - j
        scale = w.reshape(shape_k) * w.conj().reshape(shape_b)
        out[tuple(dst)] += scale * rho[tuple(src)]
    return out


def apply_single_mode_adjoint(obs: np.ndarray, kraus: KrausSet, ket_axis: int, bra_axis: int) -> np.ndarray:
    """Heisenberg-picture channel sum_j K_j^dag O K_j."""
    weights = kraus.shift_weights()
    if weights is None:
        out = np.zeros_like(obs)
        for k in kraus.operators:
            kd = k.conj().T
            out += _apply_on_axes(_apply_on_axes(obs, kd, ket_axis), kd.conj(), bra_axis)
        return out
    L = kraus.cutoff
    out = np.zeros_like(obs)
    shape = [1] * obs.ndim
    for j, w in enumerate(weights):
        if not np.any(w):
            continue
        src = [slice(None)] * obs.ndim
        dst = [slice(None)] * obs.ndim
        src[ket_axis] = src[bra_axis] = slice(0, L - j)
        dst[ket_axis] = dst[bra_axis] = slice(j, L)
        shape_k, shape_b = list(shape), list(shape)
        shape_k[ket_axis] = shape_b[bra_axis] = L - j
        scale = w.conj().reshape(shape_k) * w.reshape(shape_b)
        out[tuple(dst)] += scale * obs[tuple(src)]
    return out


def apply_channel_multimode(rho: np.ndarray, krauses, layout) -> np.ndarray:
    """Product photon-loss channel on every qumode, identity on the qubit.

    `rho` is a (D, D) matrix or a batch (..., D, D); `krauses` is one KrausSet per qumode.
    """
    if len(krauses) != layout.num_modes:
        raise ValueError(f"got {len(krauses)} Kraus sets for {layout.num_modes} qumodes")
    for k, L in zip(krauses, layout.cutoffs):
        if k.cutoff != L:
            raise ValueError(f"Kraus cutoff {k.cutoff} does not match qumode cutoff {L}")
    D = layout.dim
    if rho.shape[-2:] != (D, D):
        raise ValueError(f"density matrix shape {rho.shape} does not match dimension {D}")
    lead = rho.shape[:-2]
    t = rho.reshape(*lead, *layout.shape, *layout.shape)
    nl, nm = len(lead), len(layout.shape)
    for mode, kraus in enumerate(krauses):
        t = apply_single_mode(t, kraus, nl + 1 + mode, nl + nm + 1 + mode)
    return t.reshape(rho.shape)


def mean_photon_number(probs: np.ndarray) -> float:
    return float(np.dot(np.arange(len(probs)), probs))
