"""Spatially-sparse OMP hybrid precoding baselines over the ray dictionary."""
from __future__ import annotations

import numpy as np

from .config import SystemConfig
from .system_model import ChannelSet, HybridPrecoder, Structure


def zf_target(ch: ChannelSet, cfg: SystemConfig) -> np.ndarray:
    """Zero-forcing precoder with equal column powers summing to P_max."""
    H = ch.hmat                                 # (K, N_T), rows h_k^H
    gram = H @ H.conj().T
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        gram = gram + 1e-10 * np.real(np.trace(gram)) / gram.shape[0] * np.eye(gram.shape[0])
    b = H.conj().T @ np.linalg.solve(gram, np.eye(gram.shape[0]))
    b = b / np.linalg.norm(b, axis=0)
    return b * np.sqrt(cfg.p_max / b.shape[1])


def omp_select(dictionary: np.ndarray, target: np.ndarray, n_select: int):
    """Greedy column selection with least-squares refit.

    Returns (indices, coefficients, residual norms after each selection).
    """
    if dictionary.shape[1] < n_select:
        raise ValueError(f"dictionary has {dictionary.shape[1]} columns, need {n_select}")
    residual = target
    chosen: list[int] = []
    norms = []
    coef = np.zeros((0, target.shape[1]), dtype=complex)
    for _ in range(n_select):
        score = np.sum(np.abs(dictionary.conj().T @ residual) ** 2, axis=1)
        score[chosen] = -np.inf
        chosen.append(int(np.argmax(score)))
        basis = dictionary[:, chosen]
        coef = np.linalg.lstsq(basis, target, rcond=None)[0]
        residual = target - basis @ coef
        norms.append(float(np.linalg.norm(residual)))
    return chosen, coef, norms


def _cap_power(b_rf, b_bb, p_max):
    power = float(np.linalg.norm(b_rf @ b_bb) ** 2)
    if power > p_max:
        b_bb = b_bb * np.sqrt(p_max / power) * (1 - 1e-12)
    return b_bb


def omp_hybrid(ch: ChannelSet, target: np.ndarray, cfg: SystemConfig,
               structure: Structure = Structure.FULL) -> HybridPrecoder:
    """OMP hybrid approximation of ``target`` using the true ray responses.

    For the partially-connected variant each selected response is cut down to
    its chain's sub-array (chain j gets the j-th selected column) and the
    baseband matrix is refit by least squares.
    """
    structure = Structure(structure)
    A = ch.dictionary(cfg)
    chosen, coef, _ = omp_select(A, target, cfg.n_rf)
    scale = np.sqrt(cfg.n_tx)
    if structure is Structure.FULL:
        phases = np.angle(A[:, chosen] * scale)
        b_bb = coef / scale
        b_rf = np.exp(1j * phases)
    else:
        size = cfg.subarray_size
        phases = np.stack([np.angle(A[j * size:(j + 1) * size, c]) for j, c in enumerate(chosen)])
        b_rf = np.zeros((cfg.n_tx, cfg.n_rf), dtype=complex)
        for j in range(cfg.n_rf):
            b_rf[j * size:(j + 1) * size, j] = np.exp(1j * phases[j])
        b_bb = np.linalg.lstsq(b_rf, target, rcond=None)[0]
    return HybridPrecoder(structure, phases, _cap_power(b_rf, b_bb, cfg.p_max))
