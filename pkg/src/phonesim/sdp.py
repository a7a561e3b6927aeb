"""Small dense trace-form SDPs and Gaussian randomization.

Solves

    minimize    Tr(T X)
    subject to  Tr(A_i X) == b_i,   Tr(C_j X) <= d_j,   X PSD

with a primal-dual path-following method using Nesterov-Todd scaling and a
Mehrotra-style centering heuristic. Inequalities get nonnegative slacks, so
the cone is PSD(n) x R_+^p.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class SDPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass
class TraceSDP:
    objective: np.ndarray
    equalities: list = field(default_factory=list)     # [(A, b), ...]
    inequalities: list = field(default_factory=list)   # [(C, d), ...]

    @property
    def n(self) -> int:
        return self.objective.shape[0]

    def check(self):
        n = self.n
        if n < 1 or self.objective.shape != (n, n):
            raise ValueError("objective must be a square matrix")
        for mat, _ in self.equalities + self.inequalities:
            if mat.shape != (n, n):
                raise ValueError("constraint matrix has wrong shape")
        for mat in [self.objective] + [m for m, _ in self.equalities + self.inequalities]:
            if not np.allclose(mat, mat.T, atol=1e-12 * (1 + np.abs(mat).max())):
                raise ValueError("matrices must be symmetric")


@dataclass
class SDPSolution:
    X: np.ndarray
    y: np.ndarray
    objective: float          # primal Tr(T X)
    dual_objective: float
    duality_gap: float        # |primal - dual| / (1 + |primal| + |dual|)
    infeasibility: float
    status: SDPStatus
    iterations: int


def _sym(a):
    return 0.5 * (a + a.T)


def _max_step(x_chol_inv_t, dx):
    """Largest alpha with X + alpha dX PSD, given L^{-1} where X = L L^T."""
    m = x_chol_inv_t @ dx @ x_chol_inv_t.T
    lam = sla.eigvalsh(_sym(m), subset_by_index=[0, 0])[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(s, ds):
    neg = ds < 0
    return np.min(-s[neg] / ds[neg]) if np.any(neg) else np.inf


def _nt_scaling(x, z):
    """W with W Z W = X (Nesterov-Todd scaling point)."""
    lx = np.linalg.cholesky(x)
    lz = np.linalg.cholesky(z)
    u, d, vt = np.linalg.svd(lz.T @ lx)
    g = lx @ vt.T / np.sqrt(d)
    return g @ g.T


def solve_sdp(prob: TraceSDP, tol: float = 1e-7, max_iter: int = 100,
              max_n: int = 512) -> SDPSolution:
    prob.check()
    n = prob.n
    if n > max_n:
        raise ValueError(f"SDP size n={n} exceeds cap {max_n}")
    T = np.asarray(prob.objective, dtype=float)
    mats = [np.asarray(a, dtype=float) for a, _ in prob.equalities + prob.inequalities]
    b = np.array([v for _, v in prob.equalities + prob.inequalities], dtype=float)
    m_eq = len(prob.equalities)
    m = len(mats)
    p = m - m_eq
    if m == 0:
        raise ValueError("at least one constraint is required")
    amat = np.stack([a.ravel() for a in mats])          # (m, n*n)

    def op(x, s):
        r = amat @ x.ravel()
        r[m_eq:] += s
        return r

    def adj(y):
        return (amat.T @ y).reshape(n, n)

    scale = max(1.0, np.abs(b).max(), np.linalg.norm(T) / np.sqrt(n))
    X = np.eye(n) * scale
    Z = np.eye(n) * scale
    s = np.full(p, scale)
    zs = np.full(p, scale)
    y = np.zeros(m)
    nu = n + p
    bnorm = 1.0 + np.linalg.norm(b)
    cnorm = 1.0 + np.linalg.norm(T)

    status = SDPStatus.MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - op(X, s)
        Rd = T - adj(y) - Z
        rz = -y[m_eq:] - zs
        mu = (np.sum(X * Z) + s @ zs) / nu
        pobj = float(np.sum(T * X))
        dobj = float(b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / bnorm
        dinf = np.sqrt(np.linalg.norm(Rd) ** 2 + rz @ rz) / cnorm
        if gap <= tol and pinf <= tol and dinf <= tol:
            status = SDPStatus.OPTIMAL
            break
        if _farkas(y, b, mats, m_eq, tol):
            status = SDPStatus.INFEASIBLE
            break

        try:
            W = _nt_scaling(X, Z)
            zinv = sla.cho_solve(sla.cho_factor(Z), np.eye(n))
            lx_inv = sla.solve_triangular(np.linalg.cholesky(X), np.eye(n), lower=True)
            lz_inv = sla.solve_triangular(np.linalg.cholesky(Z), np.eye(n), lower=True)
        except np.linalg.LinAlgError:
            break
        wa = [W @ a @ W for a in mats]
        M = np.array([[np.sum(mats[i] * wa[j]) for j in range(m)] for i in range(m)])
        ratio = s / zs
        M[m_eq:, m_eq:] += np.diag(ratio)
        WRdW = W @ Rd @ W
        try:
            chol_m = sla.cho_factor(_sym(M))
            solve_m = lambda r: sla.cho_solve(chol_m, r)
        except np.linalg.LinAlgError:
            solve_m = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]

        def direction(sigma):
            Rc = sigma * mu * zinv - X
            rs = sigma * mu / zs - s
            rhs = rp - op(Rc - WRdW, rs - ratio * rz)
            dy = solve_m(rhs)
            dZ = Rd - adj(dy)
            dX = _sym(Rc - W @ dZ @ W)
            dz = rz - dy[m_eq:]
            ds = rs - ratio * dz
            return dX, dy, dZ, ds, dz

        def steps(dX, dZ, ds, dz):
            ap = min(1.0, _max_step(lx_inv, dX), _max_step_lp(s, ds))
            ad = min(1.0, _max_step(lz_inv, dZ), _max_step_lp(zs, dz))
            return ap, ad

        dX, dy, dZ, ds, dz = direction(0.0)
        ap, ad = steps(dX, dZ, ds, dz)
        mu_aff = (np.sum((X + ap * dX) * (Z + ad * dZ)) + (s + ap * ds) @ (zs + ad * dz)) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        dX, dy, dZ, ds, dz = direction(sigma)
        ap, ad = steps(dX, dZ, ds, dz)
        ap = min(1.0, 0.98 * ap)
        ad = min(1.0, 0.98 * ad)
        X = _sym(X + ap * dX)
        s = s + ap * ds
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)
        zs = zs + ad * dz

    pobj = float(np.sum(T * X))
    dobj = float(b @ y)
    rp = b - op(X, s)
    return SDPSolution(
        X=X, y=y, objective=pobj, dual_objective=dobj,
        duality_gap=abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)),
        infeasibility=float(np.linalg.norm(rp) / bnorm),
        status=status, iterations=it,
    )


def _farkas(y, b, mats, m_eq, tol):
    """True when y is (numerically) a certificate of primal infeasibility."""
    by = b @ y
    if by <= 0 or np.linalg.norm(y) < 1e8:
        return False
    yt = y / by
    s = -sum(c * a for c, a in zip(yt, mats))
    ok_psd = sla.eigvalsh(_sym(s), subset_by_index=[0, 0])[0] >= -tol * (1 + np.abs(s).max())
    ok_lp = np.all(-yt[m_eq:] >= -tol)
    return bool(ok_psd and ok_lp)


def randomize_rank1(X: np.ndarray, count: int, seed: int | None = None,
                    tol_psd: float = 1e-8) -> np.ndarray:
    """``count`` real Gaussian vectors with second moment X, as rows.

    X = U diag(lam) U^T; each draw is U diag(sqrt(lam)) v with v standard normal.
    Eigenvalues in [-tol_psd * scale, 0) are clamped to zero.
    """
    lam, U = np.linalg.eigh(_sym(np.asarray(X, dtype=float)))
    floor = -tol_psd * max(1.0, np.abs(lam).max())
    if lam.min() < floor:
        raise ValueError(f"matrix is not PSD (min eigenvalue {lam.min():.3e})")
    factor = U * np.sqrt(np.clip(lam, 0.0, None))
    v = np.random.default_rng(seed).standard_normal((count, X.shape[0]))
    return v @ factor.T
