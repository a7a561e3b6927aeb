"""Geometry-based mmWave channel, hybrid precoder container and achievable rates."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


class Structure(str, enum.Enum):
    PARTIAL = "partial"
    FULL = "full"


def array_response(azimuth: float, elevation: float, cfg: SystemConfig) -> np.ndarray:
    """Unit-norm response of the ``rows x cols`` planar array, row-major antenna order."""
    m = np.arange(cfg.rows)[:, None]
    n = np.arange(cfg.cols)[None, :]
    phase = 2 * np.pi * cfg.spacing * (
        m * np.sin(azimuth) * np.sin(elevation) + n * np.cos(elevation))
    return np.exp(1j * phase).ravel() / np.sqrt(cfg.n_tx)


@dataclass(frozen=True)
class ChannelSet:
    h: np.ndarray            # (K, N_T); row k is the channel vector h_k
    gains: np.ndarray        # (K, N_ray) complex ray gains
    azimuth: np.ndarray      # (N_ray,)
    elevation: np.ndarray    # (N_ray,)
    seed: int | None = None

    @property
    def hmat(self) -> np.ndarray:
        """Matrix whose row k is h_k^H, so the received vector is ``hmat @ B``."""
        return self.h.conj()

    def dictionary(self, cfg: SystemConfig) -> np.ndarray:
        """Array responses of the rays as columns, (N_T, N_ray)."""
        return np.stack([array_response(a, e, cfg)
                         for a, e in zip(self.azimuth, self.elevation)], axis=1)


def channel_from_rays(gains, azimuth, elevation, cfg: SystemConfig, seed=None) -> ChannelSet:
    gains = np.atleast_2d(np.asarray(gains, dtype=complex))
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    elevation = np.atleast_1d(np.asarray(elevation, dtype=float))
    n_rays = azimuth.size
    steer = np.stack([array_response(a, e, cfg) for a, e in zip(azimuth, elevation)], axis=1)
    h = np.sqrt(cfg.n_tx * cfg.gain / n_rays) * gains @ steer.T
    return ChannelSet(h=h, gains=gains, azimuth=azimuth, elevation=elevation, seed=seed)


def sample_channel(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Draw one multi-user channel.

    Ray angles are shared by all users; each user sees its own unit-variance
    circular Gaussian ray gains. Azimuth is uniform on [0, 2pi) and elevation
    uniform on [pi/4, 3pi/4].
    """
    rng = np.random.default_rng(seed)
    shape = (cfg.n_users, cfg.n_rays)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    azimuth = rng.uniform(0.0, 2 * np.pi, cfg.n_rays)
    elevation = rng.uniform(np.pi / 4, 3 * np.pi / 4, cfg.n_rays)
    return channel_from_rays(gains, azimuth, elevation, cfg, seed=seed)


def antenna_chain(n_tx: int, n_rf: int) -> np.ndarray:
    """Owning RF chain (0-based) of every antenna under the ceiling rule."""
    i = np.arange(1, n_tx + 1)
    return -(-i * n_rf // n_tx) - 1


@dataclass(frozen=True)
class HybridPrecoder:
    structure: Structure
    rf_phases: np.ndarray    # PARTIAL: (N_RF, N_T/N_RF); FULL: (N_T, N_RF)
    b_bb: np.ndarray         # (N_RF, K)

    @property
    def n_rf(self) -> int:
        return self.b_bb.shape[0]

    @property
    def n_tx(self) -> int:
        if self.structure is Structure.PARTIAL:
            return self.rf_phases.size
        return self.rf_phases.shape[0]

    def rf_matrix(self) -> np.ndarray:
        if self.structure is Structure.FULL:
            return np.exp(1j * self.rf_phases)
        return rf_from_blocks(self.rf_phases)

    def matrix(self) -> np.ndarray:
        return self.rf_matrix() @ self.b_bb

    @property
    def n_shifters(self) -> int:
        return self.n_tx if self.structure is Structure.PARTIAL else self.n_tx * self.n_rf


def rf_from_blocks(phases: np.ndarray) -> np.ndarray:
    n_rf, size = phases.shape
    rf = np.zeros((n_rf * size, n_rf), dtype=complex)
    for j in range(n_rf):
        rf[j * size:(j + 1) * size, j] = np.exp(1j * phases[j])
    return rf


def blocks_from_rf(rf: np.ndarray, n_rf: int) -> np.ndarray:
    """Inverse of :func:`rf_from_blocks`: per-chain phase vectors."""
    size = rf.shape[0] // n_rf
    return np.stack([np.angle(rf[j * size:(j + 1) * size, j]) for j in range(n_rf)])


def sinr_terms(hmat: np.ndarray, b: np.ndarray, noise: float):
    """Signal and interference-plus-noise power per user for a digital precoder."""
    gram = np.abs(hmat @ b) ** 2            # [k, j] = |h_k^H b_j|^2
    signal = np.diag(gram).copy()
    interference = gram.sum(axis=1) - signal + noise
    return signal, interference


def digital_rates(hmat: np.ndarray, b: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    signal, denom = sinr_terms(hmat, b, cfg.noise_power)
    return cfg.bandwidth * np.log2(1.0 + signal / denom)


def user_rate(ch: ChannelSet, p: HybridPrecoder, k: int, cfg: SystemConfig) -> float:
    """Achievable rate of user ``k`` in bit/s."""
    if not 0 <= k < ch.h.shape[0]:
        raise IndexError(f"user index {k} out of range for K={ch.h.shape[0]}")
    return float(digital_rates(ch.hmat, p.matrix(), cfg)[k])


def sum_rate(ch: ChannelSet, p: HybridPrecoder, cfg: SystemConfig) -> float:
    return float(sum(user_rate(ch, p, k, cfg) for k in range(ch.h.shape[0])))


def is_feasible(p: HybridPrecoder, cfg: SystemConfig, rtol: float = 1e-9) -> bool:
    """Block pattern, unit modulus and total-power checks on a hybrid precoder."""
    rf = p.rf_matrix()
    if rf.shape != (cfg.n_tx, cfg.n_rf) or p.b_bb.shape != (cfg.n_rf, cfg.n_users):
        return False
    if not (np.all(np.isfinite(rf)) and np.all(np.isfinite(p.b_bb))):
        return False
    mag = np.abs(rf)
    if p.structure is Structure.PARTIAL:
        mask = np.zeros_like(mag, dtype=bool)
        mask[np.arange(cfg.n_tx), antenna_chain(cfg.n_tx, cfg.n_rf)] = True
        if np.any(mag[~mask] != 0) or not np.allclose(mag[mask], 1.0, atol=1e-12):
            return False
    elif not np.allclose(mag, 1.0, atol=1e-12):
        return False
    return np.linalg.norm(p.matrix()) ** 2 <= cfg.p_max * (1 + rtol)
