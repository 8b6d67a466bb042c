"""Basis Pursuit and Lasso solvers with verifiable optimality certificates.

Basis Pursuit runs operator-splitting (ADMM) on the constrained form with an
exact projection onto {x : ||Phi x - y|| <= eps}; convergence is certified a
posteriori through an independently constructed dual-feasible point, so
``converged=True`` always means a verified duality gap, never just small
iterate motion. Lasso runs accelerated proximal gradient with backtracking
and is accepted only on a coordinatewise subgradient check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dictionaries import Dictionary
from .signals import SignalInstance

CONDITION_LIMIT = 1e12


class SolverInputError(ValueError):
    pass


class RankDeficiencyError(np.linalg.LinAlgError):
    pass


@dataclass
class SolverOptions:
    max_iter: int = 100_000
    feas_tol: float = 1e-8
    obj_tol: float = 1e-8
    kkt_tol: float = 1e-8
    rho: float = 1.0
    over_relax: float = 1.8
    check_every: int = 25
    support_threshold_factor: float = 10.0


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    converged: bool
    iterations: int
    objective: float
    feas_residual: float          # max(0, ||Phi x - y|| - eps)
    kkt_residual: float
    err_on_l2: Optional[float] = None
    err_off_l1: Optional[float] = None
    bound_on: Optional[float] = None
    bound_off: Optional[float] = None
    info: dict = field(default_factory=dict)


@dataclass
class Certificate:
    v: Optional[np.ndarray]
    sup_off: float
    gram_conditioning: float
    valid: bool


def _require_real(d: Dictionary):
    if d.field != "real":
        raise SolverInputError(
            "complex dictionary: apply realify() before solving")


def _soft(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class _BallProjector:
    """Exact Euclidean projection onto {x : ||A x - y|| <= eps}."""

    def __init__(self, a: np.ndarray, y: np.ndarray, eps: float):
        self.a = a
        self.y = y
        self.eps = eps
        w, v = np.linalg.eigh(a @ a.T)
        self.w = np.maximum(w, 0.0)
        self.v = v
        self.rank_mask = self.w > self.w.max() * 1e-14 if self.w.size else self.w > 0

    def lift(self, g: np.ndarray) -> np.ndarray:
        """Least-squares solution nu of A^T nu = g (the range-space lift)."""
        coef = self.v.T @ (self.a @ g)
        coef[self.rank_mask] /= self.w[self.rank_mask]
        coef[~self.rank_mask] = 0.0
        return self.v @ coef

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        d = self.a @ vec - self.y
        r = np.linalg.norm(d)
        if r <= self.eps:
            return vec
        dt = self.v.T @ d
        if self.eps == 0.0:
            null_mass = np.linalg.norm(dt[~self.rank_mask])
            if null_mass > 1e-9 * max(1.0, r):
                raise SolverInputError("y is not in the range of Phi; eps=0 infeasible")
            coef = np.zeros_like(dt)
            coef[self.rank_mask] = dt[self.rank_mask] / self.w[self.rank_mask]
            return vec - self.a.T @ (self.v @ coef)
        # find lam >= 0 with || d / (1 + lam w) || = eps (monotone decreasing)
        def resid(lam):
            return math.sqrt(float(((dt / (1.0 + lam * self.w)) ** 2).sum()))
        lo, hi = 0.0, 1.0
        while resid(hi) > self.eps:
            hi *= 4.0
            if hi > 1e30:
                raise SolverInputError("projection failed; frame operator singular?")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if resid(mid) > self.eps:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        lam = hi
        return vec - self.a.T @ (self.v @ (lam * dt / (1.0 + lam * self.w)))


def _dual_gap(a: np.ndarray, y: np.ndarray, eps: float, x: np.ndarray,
              support: np.ndarray, extra_nu=None) -> float:
    """Duality gap against the best of several constructed dual-feasible points.

    Dual: maximize <y, nu> - eps ||nu|| over ||A^T nu||_inf <= 1. Candidates:
    the least-squares sign certificate on the detected support, the scaled
    residual direction, and (when supplied) the splitting iteration's own
    dual variable lifted through the frame operator.
    """
    obj = float(np.abs(x).sum())
    best = 0.0
    candidates = []
    if support.size:
        asub = a[:, support]
        sgn = np.sign(x[support])
        try:
            if support.size <= a.shape[0]:
                nu = asub @ np.linalg.solve(asub.T @ asub, sgn)
            else:
                # dense optimum: least-squares fit of the full sign pattern
                nu, *_ = np.linalg.lstsq(asub.T, sgn, rcond=None)
            candidates.append(nu)
        except np.linalg.LinAlgError:
            pass
    r = y - a @ x
    rn = np.linalg.norm(r)
    if rn > 0:
        candidates.append(r / rn)
    if extra_nu is not None:
        candidates.append(extra_nu)
    for nu in candidates:
        scale = np.abs(a.T @ nu).max()
        if scale <= 0:
            continue
        nu = nu / scale     # dual value is positively homogeneous: go to the boundary
        val = float(y @ nu) - eps * float(np.linalg.norm(nu))
        best = max(best, val)
    return max(obj - best, 0.0)   # weak duality; negatives are float dust


def basis_pursuit(d: Dictionary, y: np.ndarray, eps_noise: float,
                  opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """min ||x||_1 subject to ||Phi x - y||_2 <= eps_noise.

    Returns a feasible point whose objective is certified within obj_tol of
    optimal by an explicit dual-feasible point; non-convergence inside the
    iteration cap is reported, never silently accepted.
    """
    _require_real(d)
    opts = opts or SolverOptions()
    y = np.asarray(y, dtype=float)
    if y.shape != (d.m,):
        raise SolverInputError(f"y has shape {y.shape}, expected ({d.m},)")
    if eps_noise < 0:
        raise SolverInputError("eps_noise must be nonnegative")
    yn = float(np.linalg.norm(y))
    if yn == 0.0 or yn <= eps_noise:
        x0 = np.zeros(d.N)
        return RecoveryResult(x0, True, 0, 0.0, max(0.0, yn - eps_noise), 0.0)
    # scale-normalize so tolerances and rho act on a unit-size problem
    ys = y / yn
    es = eps_noise / yn
    a = d.entries
    project = _BallProjector(a, ys, es)
    rho, alpha = opts.rho, opts.over_relax
    z = project(np.zeros(d.N))
    u = np.zeros(d.N)
    thresh = opts.support_threshold_factor * opts.feas_tol
    best = None
    iterations = 0
    x = z
    for it in range(1, opts.max_iter + 1):
        iterations = it
        x = project(z - u)
        xr = alpha * x + (1.0 - alpha) * z
        z_new = _soft(xr + u, 1.0 / rho)
        u = u + xr - z_new
        prim = np.linalg.norm(x - z_new)
        dual = rho * np.linalg.norm(z_new - z)
        z = z_new
        if it % opts.check_every == 0 or (prim < 1e-12 and dual < 1e-12):
            nu_admm = project.lift(rho * u)
            cand = _polish_candidate(a, ys, es, x, z, thresh, opts, nu_admm)
            if cand is not None:
                xc, gap = cand
                if gap <= opts.obj_tol * (1.0 + np.abs(xc).sum()):
                    best = (xc, gap)
                    break
                if best is None or gap < best[1]:
                    best = (xc, gap)
        if prim < 1e-13 and dual < 1e-13:
            break
    if best is None:
        support = np.flatnonzero(np.abs(x) > thresh)
        best = (x, _dual_gap(a, ys, es, x, support, project.lift(rho * u)))
    xs, gap = best
    x_hat = xs * yn
    feas = max(0.0, float(np.linalg.norm(a @ x_hat - y)) - eps_noise)
    objective = float(np.abs(x_hat).sum())
    rel_gap = float(gap / (1.0 + np.abs(xs).sum()))
    converged = bool(feas <= opts.feas_tol and rel_gap <= opts.obj_tol)
    return RecoveryResult(x_hat, converged, iterations, objective, feas,
                          rel_gap, info={"duality_gap": float(gap * yn)})


def _polish_candidate(a, y, eps, x, z, thresh, opts, nu_admm=None):
    """Feasible candidate with its duality gap; least-squares refit on the
    detected support when that lowers the l1 objective."""
    support = np.flatnonzero(np.abs(z) > thresh)
    cands = [(x, np.flatnonzero(np.abs(x) > thresh))]
    if 0 < support.size <= a.shape[0]:
        refit = np.zeros(a.shape[1])
        sub = a[:, support]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        refit[support] = coef
        feas = np.linalg.norm(a @ refit - y)
        if feas <= eps + opts.feas_tol and np.abs(refit).sum() <= np.abs(x).sum():
            cands.insert(0, (refit, support))
    out = None
    for cand, sup in cands:
        if np.linalg.norm(a @ cand - y) > eps + opts.feas_tol:
            continue
        gap = _dual_gap(a, y, eps, cand, sup, nu_admm)
        if out is None or gap < out[1]:
            out = (cand, gap)
    return out


def lasso_kkt_residual(a: np.ndarray, y: np.ndarray, x: np.ndarray,
                       penalty: float) -> float:
    """Worst coordinatewise violation of the Lasso subgradient conditions."""
    g = a.T @ (a @ x - y)
    on = x != 0
    res = 0.0
    if on.any():
        res = float(np.abs(g[on] + penalty * np.sign(x[on])).max())
    if (~on).any():
        res = max(res, float(np.maximum(np.abs(g[~on]) - penalty, 0.0).max()))
    return res


def lasso(d: Dictionary, y: np.ndarray, lam: float, sigma: float,
          opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """min (1/2)||Phi x - y||^2 + lam sigma^2 ||x||_1, accelerated proximal
    gradient with backtracking and momentum restarts."""
    _require_real(d)
    opts = opts or SolverOptions()
    if lam <= 0:
        raise SolverInputError("lam must be positive")
    if sigma <= 0:
        raise SolverInputError("sigma must be positive (the penalty degenerates)")
    y = np.asarray(y, dtype=float)
    if y.shape != (d.m,):
        raise SolverInputError(f"y has shape {y.shape}, expected ({d.m},)")
    a = d.entries
    penalty = lam * sigma * sigma
    x = np.zeros(d.N)
    v = x.copy()
    t = 1.0
    step = 1.0
    eta = 2.0

    def smooth(xv):
        r = a @ xv - y
        return 0.5 * float(r @ r), a.T @ r

    def objective(xv):
        r = a @ xv - y
        return 0.5 * float(r @ r) + penalty * float(np.abs(xv).sum())

    f_prev = objective(x)
    iterations = 0
    kkt = lasso_kkt_residual(a, y, x, penalty)
    for it in range(1, opts.max_iter + 1):
        iterations = it
        fv, gv = smooth(v)
        while True:
            x_new = _soft(v - step * gv, step * penalty)
            diff = x_new - v
            quad = fv + float(gv @ diff) + float(diff @ diff) / (2.0 * step)
            f_new = 0.5 * float(np.linalg.norm(a @ x_new - y) ** 2)
            if f_new <= quad + 1e-15 * max(1.0, abs(quad)):
                break
            step /= eta
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        v = x_new + ((t - 1.0) / t_new) * (x_new - x)
        f_cur = f_new + penalty * float(np.abs(x_new).sum())
        if f_cur > f_prev:         # momentum restart on objective increase
            v = x_new
            t_new = 1.0
        f_prev = f_cur
        x = x_new
        t = t_new
        if it % 10 == 0 or it < 10:
            kkt = lasso_kkt_residual(a, y, x, penalty)
            if kkt <= opts.kkt_tol:
                break
    kkt = lasso_kkt_residual(a, y, x, penalty)
    feas = 0.0
    return RecoveryResult(x, bool(kkt <= opts.kkt_tol), iterations,
                          float(objective(x)), feas, kkt)


def dual_certificate(d: Dictionary, support, signs) -> Certificate:
    """Sign-interpolation certificate v = Phi^T Phi_I (Phi_I^T Phi_I)^{-1} s.

    Valid when the off-support sup-norm is at most 1/2 and the support Gram
    is numerically invertible (condition below 1e12).
    """
    _require_real(d)
    idx = np.asarray(support)
    s = np.asarray(signs, dtype=float)
    if idx.ndim != 1 or s.shape != idx.shape:
        raise SolverInputError("support and signs must be 1-d and aligned")
    sub = d.entries[:, idx]
    gram = sub.T @ sub
    vals = np.linalg.eigvalsh(gram)
    if vals[0] <= 0 or vals[-1] / vals[0] > CONDITION_LIMIT:
        cond = math.inf if vals[0] <= 0 else float(vals[-1] / vals[0])
        return Certificate(None, math.inf, cond, False)
    coef = np.linalg.solve(gram, s)
    v = d.entries.T @ (sub @ coef)
    v[idx] = s       # exact by construction; pin the float solve noise
    off = np.delete(v, idx)
    sup_off = float(np.abs(off).max()) if off.size else 0.0
    inv_norm = float(1.0 / vals[0])
    return Certificate(v, sup_off, inv_norm, sup_off <= 0.5)


def ls_refit(d: Dictionary, support, y: np.ndarray) -> np.ndarray:
    """Least-squares coefficients on the support, zeros elsewhere."""
    _require_real(d)
    idx = np.asarray(support)
    if idx.size > d.m:
        raise SolverInputError("support larger than the sketch dimension")
    sub = d.entries[:, idx]
    coef, _, rank, _ = np.linalg.lstsq(sub, np.asarray(y, dtype=float), rcond=None)
    if rank < idx.size:
        raise RankDeficiencyError(f"Phi_I has rank {rank} < {idx.size}")
    rhs = sub.T @ y
    normal_resid = np.linalg.norm(sub.T @ (sub @ coef) - rhs)
    if normal_resid > 1e-10 * (1.0 + np.linalg.norm(rhs)):
        raise RankDeficiencyError("normal equations residual too large")
    out = np.zeros(d.N)
    out[idx] = coef
    return out


@dataclass
class LassoConditions:
    inverse_gram_ok: bool
    noise_correlation_ok: bool
    certificate_ok: bool
    margins: dict

    @property
    def all_ok(self) -> bool:
        return (self.inverse_gram_ok and self.noise_correlation_ok
                and self.certificate_ok)


def cp_conditions(d: Dictionary, support, signs, z: np.ndarray,
                  N: Optional[int] = None) -> LassoConditions:
    """The three deterministic conditions under which the Lasso error bound
    ||Phi x - Phi x_hat||^2 <= C k log(N) sigma^2 is known to hold."""
    _require_real(d)
    N = d.N if N is None else N
    idx = np.asarray(support)
    s = np.asarray(signs, dtype=float)
    z = np.asarray(z, dtype=float)
    sub = d.entries[:, idx]
    gram = sub.T @ sub
    vals = np.linalg.eigvalsh(gram)
    if vals[0] <= 0:
        raise RankDeficiencyError("support Gram is singular")
    inv_norm = 1.0 / vals[0]
    margin1 = 2.0 - inv_norm

    corr = np.abs(d.entries.T @ z).max() if z.size else 0.0
    margin2 = 2.0 * math.sqrt(math.log(N)) - float(corr)

    ginv_s = np.linalg.solve(gram, s)
    ginv_atz = np.linalg.solve(gram, sub.T @ z)
    off = np.delete(np.arange(d.N), idx)
    cross = d.entries[:, off].T @ sub
    term_noise = float(np.abs(cross @ ginv_atz).max()) if off.size else 0.0
    term_sign = float(np.abs(cross @ ginv_s).max()) if off.size else 0.0
    lhs3 = term_noise + math.sqrt(8.0 * math.log(N)) * term_sign
    margin3 = (2.0 - math.sqrt(2.0)) * math.sqrt(2.0 * math.log(N)) - lhs3

    return LassoConditions(
        inverse_gram_ok=margin1 >= 0,
        noise_correlation_ok=margin2 >= 0,
        certificate_ok=margin3 >= 0,
        margins={"inverse_gram": margin1, "noise_correlation": margin2,
                 "certificate": margin3},
    )


def on_support_error_constant(N: int, eps: float) -> float:
    """Multiplier of the best k-term l1 error in the on-support l2 bound."""
    return 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0 * N / eps)))


def error_report(inst: SignalInstance, result: RecoveryResult,
                 eps: float) -> RecoveryResult:
    """Fill on/off-support errors and their theoretical ceilings.

    The best k-sparse l1 approximation error of x is exactly its off-support
    l1 mass, so bound_off = 4 * tail and bound_on = tail * constant(N, eps).
    """
    x, x_hat = inst.x, result.x_hat
    if x.shape != x_hat.shape:
        raise SolverInputError("instance and result dimensions differ")
    on = inst.support
    off = np.setdiff1d(np.arange(x.shape[0]), on, assume_unique=True)
    err_on = float(np.linalg.norm(x[on] - x_hat[on]))
    err_off = float(np.abs(x[off] - x_hat[off]).sum())
    tail = inst.tail_l1
    return replace(result,
                   err_on_l2=err_on, err_off_l1=err_off,
                   bound_on=tail * on_support_error_constant(x.shape[0], eps),
                   bound_off=4.0 * tail)
