"""Fully-digital energy-efficiency ascent (the upper-bound precoder).

With ``s_i = |h_i^H b_i|^2``, ``delta_i`` the interference-plus-noise of user i,
``T_i = delta_i + s_i`` and ``c = 2W/ln 2`` the gradient of ``R/P`` with respect
to column ``b_k`` (real and imaginary parts as independent coordinates) is

    (psi_k b_k - phi_k b_k) / P^2

    A_k   = c h_k h_k^H / T_k
    N_k   = c sum_{i != k} s_i / (delta_i T_i) h_i h_i^H
    phi_k = (2R/alpha) I + P N_k + rho R A_k
    psi_k = P A_k + rho R N_k

where ``rho`` is the rate-proportional power slope (coding plus baseband
precoding). ``phi_k`` is Hermitian positive definite whenever ``R > 0``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .config import SystemConfig
from .power_cost import breakdown, phone_complexity, rate_power_slope
from .system_model import ChannelSet, Structure

log = logging.getLogger(__name__)

LN2 = np.log(2.0)


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class IterationState:
    rates: np.ndarray        # per-user bit/s
    p_total: float           # W
    iter: int = 0

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())

    @property
    def ee(self) -> float:
        return self.sum_rate / self.p_total


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    ee: float
    step: float
    mu: float


@dataclass
class DigitalResult:
    b: np.ndarray
    state: IterationState
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def ee(self) -> float:
        return self.state.ee


def _gram(hmat: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(hmat @ b) ** 2


def _signal_and_delta(hmat, b, noise):
    gram = _gram(hmat, b)
    signal = np.diag(gram).copy()
    np.fill_diagonal(gram, 0.0)
    return signal, gram.sum(axis=1) + noise


def interference_denominator(b: np.ndarray, ch: ChannelSet, i: int, cfg: SystemConfig) -> float:
    """Interference from the other users' columns plus noise at user ``i``."""
    if not 0 <= i < b.shape[1]:
        raise IndexError(f"user index {i} out of range for K={b.shape[1]}")
    return float(_signal_and_delta(ch.hmat, b, cfg.noise_power)[1][i])


def relaxed_power(b: np.ndarray, sum_rate: float, cfg: SystemConfig,
                  structure: Structure = Structure.PARTIAL, complexity: float | None = None) -> float:
    if complexity is None:
        complexity = phone_complexity(cfg)
    radiated = float(np.sum(np.abs(b) ** 2))
    return breakdown(cfg, radiated, sum_rate, structure, complexity).p_total


def iteration_state(b: np.ndarray, ch: ChannelSet, cfg: SystemConfig, it: int = 0,
                    structure: Structure = Structure.PARTIAL) -> IterationState:
    signal, delta = _signal_and_delta(ch.hmat, b, cfg.noise_power)
    rates = cfg.bandwidth * np.log2(1.0 + signal / delta)
    return IterationState(rates=rates, p_total=relaxed_power(b, rates.sum(), cfg, structure), iter=it)


def relaxed_ee(b: np.ndarray, ch: ChannelSet, cfg: SystemConfig,
               structure: Structure = Structure.PARTIAL) -> float:
    return iteration_state(b, ch, cfg, structure=structure).ee


def _weights(b, hmat, cfg, state):
    """Per-user scalars (a, d_phi[k], e_psi[k]) with phi_k = a I + H^H diag(d_phi[k]) H."""
    signal, delta = _signal_and_delta(hmat, b, cfg.noise_power)
    total = delta + signal
    c = 2.0 * cfg.bandwidth / LN2
    q = c * signal / (delta * total)         # interference weights of N_k
    g = c / total                            # A_k = g_k h_k h_k^H
    R, P = state.sum_rate, state.p_total
    rho = rate_power_slope(cfg)
    K = b.shape[1]
    d_phi = np.tile(P * q, (K, 1))
    e_psi = np.tile(rho * R * q, (K, 1))
    idx = np.arange(K)
    d_phi[idx, idx] = rho * R * g
    e_psi[idx, idx] = P * g
    return 2.0 * R / cfg.pa_efficiency, d_phi, e_psi


def stationarity_matrices(b: np.ndarray, ch: ChannelSet, cfg: SystemConfig,
                          state: IterationState | None = None, check: bool = True):
    """Dense ``(phi, psi)`` stacks, each of shape (K, N_T, N_T)."""
    state = iteration_state(b, ch, cfg) if state is None else state
    hmat = ch.hmat
    a, d_phi, e_psi = _weights(b, hmat, cfg, state)
    n = hmat.shape[1]
    # h_i h_i^H = outer(h_i, conj(h_i)); hmat rows are h_i^H
    hh = np.einsum("in,im->inm", hmat.conj(), hmat)
    phi = a * np.eye(n)[None] + np.einsum("ki,inm->knm", d_phi, hh)
    psi = np.einsum("ki,inm->knm", e_psi, hh)
    if check and np.any(b):
        for k in range(phi.shape[0]):
            _factor(phi[k])
    return phi, psi


def _factor(phi: np.ndarray):
    try:
        return sla.cho_factor(phi, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.real(np.trace(phi)) / phi.shape[0]
        try:
            return sla.cho_factor(phi + jitter * np.eye(phi.shape[0]), lower=True)
        except np.linalg.LinAlgError as err:
            raise NotPositiveDefinite("phi_k is not positive definite") from err


def ee_gradient(b: np.ndarray, ch: ChannelSet, cfg: SystemConfig,
                state: IterationState | None = None) -> np.ndarray:
    """Gradient of the relaxed EE, column k = (psi_k b_k - phi_k b_k) / P^2."""
    state = iteration_state(b, ch, cfg) if state is None else state
    hmat = ch.hmat
    a, d_phi, e_psi = _weights(b, hmat, cfg, state)
    proj = hmat @ b                               # [i, k] = h_i^H b_k
    h = hmat.conj().T                             # columns h_i
    psi_b = h @ (e_psi.T * proj)
    phi_b = a * b + h @ (d_phi.T * proj)
    return (psi_b - phi_b) / state.p_total ** 2


def fixed_point_map(b: np.ndarray, hmat: np.ndarray, cfg: SystemConfig,
                    state: IterationState) -> np.ndarray:
    """Columns ``phi_k^{-1} psi_k b_k`` via the low-rank (Woodbury) form of phi_k."""
    a, d_phi, e_psi = _weights(b, hmat, cfg, state)
    proj = hmat @ b
    h = hmat.conj().T
    gram = hmat @ h                               # [i, j] = h_i^H h_j
    K = b.shape[1]
    out = np.empty_like(b)
    for k in range(K):
        v = h @ (e_psi[k] * proj[:, k])           # psi_k b_k
        s = np.sqrt(d_phi[k])
        small = a * np.eye(K) + s[:, None] * gram * s[None, :]
        rhs = s * (hmat @ v)
        try:
            sol = sla.cho_solve(sla.cho_factor(small, lower=True), rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.solve(small, rhs)
        out[:, k] = (v - h @ (s * sol)) / a
    return out


def _project(b: np.ndarray, p_max: float) -> np.ndarray:
    power = float(np.sum(np.abs(b) ** 2))
    if power > p_max:
        b = b * np.sqrt(p_max / power)
    return b


def initial_precoder(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    shape = (cfg.n_tx, cfg.n_users)
    b = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return b * np.sqrt(0.5 * cfg.p_max) / np.linalg.norm(b)


def optimize_digital(ch: ChannelSet, cfg: SystemConfig, seed: int | None = None,
                     b0: np.ndarray | None = None,
                     structure: Structure = Structure.PARTIAL) -> DigitalResult:
    """Line-searched fixed-point ascent on the relaxed energy efficiency.

    Each iteration moves every column toward ``phi_k^{-1} psi_k b_k`` by a shared
    step ``mu`` from the grid {0, w, 2w, ..., 1}; over-power candidates are scaled
    back onto the power boundary. ``mu = 0`` keeps the incumbent, so the
    efficiency trace never decreases.
    """
    hmat = ch.hmat
    b = initial_precoder(cfg, np.random.default_rng(seed)) if b0 is None else np.array(b0, dtype=complex)
    b = _project(b, cfg.p_max)
    n_steps = int(round(1.0 / cfg.step_interval))
    mus = np.linspace(0.0, 1.0, n_steps + 1)
    state = iteration_state(b, ch, cfg, 0, structure)
    trace = [TraceRecord(0, state.ee, float("nan"), float("nan"))]
    converged = False
    for it in range(1, cfg.max_iters + 1):
        direction = fixed_point_map(b, hmat, cfg, state) - b
        best = (state.ee, 0.0, b, state)
        for mu in mus[1:]:
            cand = _project(b + mu * direction, cfg.p_max)
            cstate = iteration_state(cand, ch, cfg, it, structure)
            if cstate.ee > best[0]:
                best = (cstate.ee, mu, cand, cstate)
        _, mu, new_b, new_state = best
        step = float(np.linalg.norm(new_b - b))
        b, state = new_b, IterationState(new_state.rates, new_state.p_total, it)
        trace.append(TraceRecord(it, state.ee, step, float(mu)))
        if step <= cfg.stop_tol:
            converged = True
            break
    if not converged:
        log.debug("digital ascent hit max_iters=%d", cfg.max_iters)
    return DigitalResult(b=b, state=state, trace=trace, converged=converged)
