"""Hybrid factorization of a digital precoder and the composed PHONE pipeline."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .sdp import SDPStatus, TraceSDP, randomize_rank1, solve_sdp
from .system_model import (ChannelSet, HybridPrecoder, Structure, antenna_chain,
                           blocks_from_rf, rf_from_blocks)
from .upper_bound import DigitalResult, optimize_digital

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorizationProblem:
    b_opt: np.ndarray
    structure: Structure
    n_rf: int
    p_max: float
    eps2: float
    max_alternations: int = 50
    n_randomizations: int = 100
    sdp_tol: float = 1e-7
    sdp_max_n: int = 512

    @classmethod
    def from_config(cls, b_opt, cfg: SystemConfig, structure=Structure.PARTIAL):
        return cls(b_opt=b_opt, structure=Structure(structure), n_rf=cfg.n_rf, p_max=cfg.p_max,
                   eps2=cfg.eps2_rel * float(np.linalg.norm(b_opt)),
                   max_alternations=cfg.max_alternations,
                   n_randomizations=cfg.n_randomizations, sdp_tol=cfg.sdp_tol,
                   sdp_max_n=cfg.sdp_max_n)

    @property
    def n_tx(self) -> int:
        return self.b_opt.shape[0]

    @property
    def n_users(self) -> int:
        return self.b_opt.shape[1]


@dataclass(frozen=True)
class RealQCQPEmbedding:
    b_rf: np.ndarray
    b_real: np.ndarray        # [Re vec(B_opt); Im vec(B_opt)]
    T: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    power_bound: float

    @property
    def zeta(self) -> np.ndarray:
        """Real form of kron(I_K, B_RF); tall, so only built on request."""
        K = self.b_real.size // (2 * self.b_rf.shape[0])
        return _realify(np.kron(np.eye(K), self.b_rf))

    @property
    def n(self) -> int:
        return self.T.shape[0]


def _realify(mat: np.ndarray) -> np.ndarray:
    """Real matrix acting on [Re x; Im x] exactly as ``mat`` acts on x."""
    return np.block([[mat.real, -mat.imag], [mat.imag, mat.real]])


def embed_bb(b_bb: np.ndarray, t: float = 1.0) -> np.ndarray:
    xc = b_bb.ravel(order="F")
    return np.concatenate([xc.real, xc.imag, [t]])


def deembed_bb(x: np.ndarray, n_rf: int, n_users: int) -> np.ndarray:
    """B_BB from a homogenized real vector, dividing by its last coordinate."""
    x = np.asarray(x, dtype=float)
    if x[-1] < 0:
        x = -x
    x = x / x[-1]
    half = n_rf * n_users
    xc = x[:half] + 1j * x[half:2 * half]
    return xc.reshape((n_rf, n_users), order="F")


def real_embedding(prob: FactorizationProblem, b_rf: np.ndarray) -> RealQCQPEmbedding:
    K = prob.n_users
    bc = prob.b_opt.ravel(order="F")
    b_real = np.concatenate([bc.real, bc.imag])
    # realification preserves products, so zeta^T zeta and zeta^T b come from
    # the small complex products without forming the (2 N_T K)-row zeta
    ztz = _realify(np.kron(np.eye(K), b_rf.conj().T @ b_rf))
    proj = (b_rf.conj().T @ prob.b_opt).ravel(order="F")
    ztb = np.concatenate([proj.real, proj.imag])
    n = ztz.shape[0] + 1
    T = np.zeros((n, n))
    T[:-1, :-1] = ztz
    T[:-1, -1] = T[-1, :-1] = -ztb
    T[-1, -1] = b_real @ b_real
    gamma2 = np.zeros((n, n))
    gamma2[-1, -1] = 1.0
    gamma1 = np.zeros((n, n))
    if prob.structure is Structure.PARTIAL:
        gamma1[:-1, :-1] = np.eye(n - 1)
        bound = prob.p_max * prob.n_rf / prob.n_tx
    else:
        gamma1[:-1, :-1] = ztz
        bound = prob.p_max
    return RealQCQPEmbedding(b_rf, b_real, T, gamma1, gamma2, bound)


@dataclass
class BasebandInfo:
    sdr_objective: float
    rounded_objective: float
    rank_one: bool
    fallback: bool
    status: SDPStatus


def _radiated(b_rf, b_bb):
    return float(np.linalg.norm(b_rf @ b_bb) ** 2)


def _onto_power(b_rf, b_bb, p_max):
    power = _radiated(b_rf, b_bb)
    if power > p_max:
        b_bb = b_bb * np.sqrt(p_max / power) * (1 - 1e-12)
    return b_bb


def _dual_candidate(emb: RealQCQPEmbedding, y: np.ndarray) -> np.ndarray:
    """Primal point read off the SDR dual by complementary slackness.

    With ``lam = -y_power >= 0`` the stationarity condition of the homogenized
    problem at ``t = 1`` is ``(zeta^T zeta + lam Gamma1) x = zeta^T b``. An
    interior-point X only fixes the distance to about sqrt(tol); this linear
    solve recovers the factor to working precision.
    """
    lam = max(-float(y[1]), 0.0)
    lhs = emb.T[:-1, :-1] + lam * emb.gamma1[:-1, :-1]
    head = np.linalg.lstsq(lhs, -emb.T[:-1, -1], rcond=None)[0]
    return np.concatenate([head, [1.0]])


def baseband_step(prob: FactorizationProblem, b_rf: np.ndarray, seed=None,
                  rank_tol: float = 1e-6):
    """Power-capped least-squares baseband matrix via SDR and Gaussian randomization."""
    emb = real_embedding(prob, b_rf)
    sdp = TraceSDP(emb.T, [(emb.gamma2, 1.0)], [(emb.gamma1, emb.power_bound)])
    sol = solve_sdp(sdp, tol=prob.sdp_tol, max_n=prob.sdp_max_n)
    lam, vec = np.linalg.eigh(0.5 * (sol.X + sol.X.T))
    principal = vec[:, -1] * np.sqrt(max(lam[-1], 0.0))
    rank_one = lam[-2] <= rank_tol * lam[-1] if lam.size > 1 else True
    candidates = [principal, _dual_candidate(emb, sol.y)]
    if not rank_one:
        candidates.extend(randomize_rank1(sol.X, prob.n_randomizations, seed))
    K, n_rf = prob.n_users, prob.n_rf
    best = best_any = None
    for x in candidates:
        if abs(x[-1]) < 1e-12 * (1 + np.linalg.norm(x)):
            continue
        b_bb = deembed_bb(x, n_rf, K)
        dist = float(np.linalg.norm(prob.b_opt - b_rf @ b_bb))
        if best_any is None or dist < best_any[0]:
            best_any = (dist, b_bb)
        if _radiated(b_rf, b_bb) <= prob.p_max and (best is None or dist < best[0]):
            best = (dist, b_bb)
    fallback = best is None
    if fallback:
        if best_any is None:
            raise RuntimeError("SDR produced no usable homogenized candidate")
        log.debug("no power-feasible randomization; scaling the best candidate")
        b_bb = _onto_power(b_rf, best_any[1], prob.p_max)
    else:
        b_bb = best[1]
    x = embed_bb(b_bb)
    info = BasebandInfo(sdr_objective=sol.objective, rounded_objective=float(x @ emb.T @ x),
                        rank_one=bool(rank_one), fallback=fallback, status=sol.status)
    return b_bb, info


def rf_step(b_opt: np.ndarray, b_bb: np.ndarray,
            structure: Structure = Structure.PARTIAL) -> np.ndarray:
    """Phase of ``B_opt(i,:) B_BB(j,:)^H`` for each antenna i and its chain(s) j.

    Returns per-chain phase blocks (PARTIAL) or the full phase matrix (FULL).
    A vanishing inner product gets phase 0.
    """
    inner = b_opt @ b_bb.conj().T             # (N_T, N_RF)
    phases = np.where(np.abs(inner) > 0, np.angle(inner), 0.0)
    if Structure(structure) is Structure.FULL:
        return phases
    n_tx, n_rf = inner.shape
    owned = phases[np.arange(n_tx), antenna_chain(n_tx, n_rf)]
    return owned.reshape(n_rf, n_tx // n_rf)


def _rf_matrix(structure, phases):
    return np.exp(1j * phases) if structure is Structure.FULL else rf_from_blocks(phases)


@dataclass
class FactorizationResult:
    precoder: HybridPrecoder
    distances: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    converged: bool = False

    @property
    def distance(self) -> float:
        return self.distances[-1]


def factorize(prob: FactorizationProblem, seed=None, retries: int = 3) -> FactorizationResult:
    """Alternate baseband (SDR) and RF (phase) updates from random RF phases.

    A new pair is accepted only when it strictly lowers ``||B_opt - B_RF B_BB||_F``;
    a stochastic baseband step gets ``retries`` fresh randomizations before the
    loop gives up, so the accepted-distance trace is non-increasing.
    """
    rng = np.random.default_rng(seed)
    n_tx, n_rf = prob.n_tx, prob.n_rf
    if prob.structure is Structure.FULL:
        phases = rng.uniform(-np.pi, np.pi, (n_tx, n_rf))
    else:
        phases = rng.uniform(-np.pi, np.pi, (n_rf, n_tx // n_rf))
    b_rf = _rf_matrix(prob.structure, phases)
    best_bb = np.zeros((n_rf, prob.n_users), dtype=complex)
    best_dist = float(np.linalg.norm(prob.b_opt))
    distances, diagnostics = [], []
    converged = False
    for alt in range(1, prob.max_alternations + 1):
        accepted = False
        for attempt in range(retries + 1):
            b_bb, info = baseband_step(prob, b_rf, int(rng.integers(2 ** 63)))
            pairs = [(phases, b_rf, b_bb)]
            new_phases = rf_step(prob.b_opt, b_bb, prob.structure)
            new_rf = _rf_matrix(prob.structure, new_phases)
            pairs.append((new_phases, new_rf, _onto_power(new_rf, b_bb, prob.p_max)))
            dist, cand = min(((float(np.linalg.norm(prob.b_opt - rf @ bb)), (ph, rf, bb))
                              for ph, rf, bb in pairs), key=lambda t: t[0])
            diagnostics.append(dict(alternation=alt, attempt=attempt, distance=dist,
                                    sdr_objective=info.sdr_objective,
                                    rounding_gap=info.rounded_objective - info.sdr_objective,
                                    rank_one=info.rank_one))
            if dist < best_dist:
                accepted = True
                break
            if info.rank_one:
                break  # deterministic step; retrying cannot help
        if not accepted:
            break
        phases, b_rf, best_bb = cand
        best_dist = dist
        distances.append(dist)
        if dist < prob.eps2:
            converged = True
            break
    if not distances:
        distances.append(best_dist)
    return FactorizationResult(HybridPrecoder(prob.structure, phases, best_bb),
                               distances, diagnostics, converged)


@dataclass
class PhoneResult:
    precoder: HybridPrecoder
    digital: DigitalResult
    factorization: FactorizationResult

    @property
    def converged(self) -> bool:
        return self.digital.converged and self.factorization.converged


def phone(ch: ChannelSet, cfg: SystemConfig, seed=None,
          structure: Structure = Structure.PARTIAL) -> PhoneResult:
    """EE-optimal digital precoder followed by its hybrid factorization."""
    seed_digital, seed_factor = np.random.SeedSequence(seed).spawn(2)
    digital = optimize_digital(ch, cfg, np.random.default_rng(seed_digital), structure=structure)
    prob = FactorizationProblem.from_config(digital.b, cfg, structure)
    fact = factorize(prob, np.random.default_rng(seed_factor))
    return PhoneResult(fact.precoder, digital, fact)
