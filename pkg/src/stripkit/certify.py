"""Statistical isometry / incoherence certification and closed-form sufficient
conditions.

Probability estimates over uniformly random supports come in two flavors:
exhaustive enumeration of all k-subsets (exact, budget-capped) and Monte
Carlo with per-trial derived rng streams plus 99% Clopper-Pearson intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy import stats

from .dictionaries import Dictionary
from .seeding import derive_rng

EXHAUSTIVE_CAP = 10 ** 6
CI_LEVEL = 0.99


class BudgetError(ValueError):
    """Exhaustive enumeration would exceed the configured cap."""


@dataclass
class CertificationReport:
    property: str                 # "strip" | "sinc" | "wsinc"
    params: dict
    method: str                   # "exhaustive" | "monte_carlo"
    trials: int
    successes: int
    estimate: float
    ci: tuple                     # two-sided 99% Clopper-Pearson (degenerate if exhaustive)
    seed: Optional[int] = None
    wsinc_lhs: Optional[float] = None
    wsinc_threshold: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "schema_version": 1,
            "property": self.property,
            "params": self.params,
            "method": self.method,
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "ci": list(self.ci),
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.wsinc_lhs is not None:
            out["wsinc_lhs"] = self.wsinc_lhs
            out["wsinc_threshold"] = self.wsinc_threshold
        if self.extra:
            out["extra"] = self.extra
        return out


def clopper_pearson(successes: int, trials: int, level: float = CI_LEVEL) -> tuple:
    """Two-sided exact binomial confidence interval."""
    if trials < 1:
        raise ValueError("need at least one trial")
    alpha = 1.0 - level
    lo = 0.0 if successes == 0 else float(
        stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(
        stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return (lo, hi)


def sample_support(N: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted uniform k-subset of range(N)."""
    if not (1 <= k <= N):
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    return np.sort(rng.choice(N, size=k, replace=False))


def _sinc_stat(d: Dictionary, support, gram) -> float:
    """max over i outside the support of ||Phi_I^H phi_i||_2^2."""
    idx = np.asarray(support)
    if gram is not None:
        cross = gram[idx, :]
    else:
        cross = d.entries[:, idx].conj().T @ d.entries
    col_sq = (np.abs(cross) ** 2).sum(axis=0)
    col_sq[idx] = -np.inf
    return float(col_sq.max())


def _maybe_gram(d: Dictionary) -> Optional[np.ndarray]:
    # full Gram caching pays off until it stops fitting comfortably
    return d.gram() if d.N <= 3000 else None


def _enumerate_supports(N: int, k: int, cap: int) -> np.ndarray:
    total = math.comb(N, k)
    if total > cap:
        raise BudgetError(
            f"C({N},{k}) = {total} exceeds the exhaustive cap {cap}")
    flat = np.fromiter(
        (i for sup in combinations(range(N), k) for i in sup),
        dtype=np.int64, count=total * k)
    return flat.reshape(total, k)


def _mc_supports(N: int, k: int, seed: int, label: str, trials: int) -> np.ndarray:
    """One support per trial, each from its own (seed, label, trial) stream."""
    sups = np.empty((trials, k), dtype=np.int64)
    for t in range(trials):
        sups[t] = sample_support(N, k, derive_rng(seed, label, t))
    return sups


_CHUNK = 4096


def _hollow_norms(d: Dictionary, supports: np.ndarray, gram) -> np.ndarray:
    """Spectral norms of Phi_I^H Phi_I - Id for a batch of supports (B, k)."""
    B, k = supports.shape
    out = np.empty(B)
    eye = np.eye(k)
    for lo in range(0, B, _CHUNK):
        sup = supports[lo:lo + _CHUNK]
        if gram is not None:
            sub = gram[sup[:, :, None], sup[:, None, :]]
        else:
            cols = d.entries[:, sup]                       # (m, b, k)
            sub = np.einsum("mbi,mbj->bij", cols.conj(), cols)
        vals = np.linalg.eigvalsh(sub - eye)
        out[lo:lo + _CHUNK] = np.maximum(np.abs(vals[:, 0]), np.abs(vals[:, -1]))
    return out


def _sinc_stats(d: Dictionary, supports: np.ndarray, gram) -> np.ndarray:
    """Batch version of the worst outside-column correlation energy."""
    B, k = supports.shape
    out = np.empty(B)
    chunk = max(1, min(_CHUNK, 2 ** 24 // max(1, k * d.N)))
    for lo in range(0, B, chunk):
        sup = supports[lo:lo + chunk]
        if gram is not None:
            cross = gram[sup, :]                           # (b, k, N)
        else:
            cols = d.entries[:, sup]                       # (m, b, k)
            cross = np.einsum("mbi,mn->bin", cols.conj(), d.entries)
        col_sq = (np.abs(cross) ** 2).sum(axis=1)          # (b, N)
        np.put_along_axis(col_sq, sup, -np.inf, axis=1)
        out[lo:lo + chunk] = col_sq.max(axis=1)
    return out


def strip_estimate(d: Dictionary, k: int, delta: float, method: str = "monte_carlo",
                   trials: int = 10_000, seed: int = 0,
                   cap: int = EXHAUSTIVE_CAP) -> CertificationReport:
    """P over uniform k-subsets I of ||Phi_I^H Phi_I - Id|| <= delta."""
    if not (1 <= k <= d.N):
        raise ValueError("need 1 <= k <= N")
    gram = _maybe_gram(d)
    params = {"k": k, "delta": delta}
    if method == "exhaustive":
        supports = _enumerate_supports(d.N, k, cap)
        total = supports.shape[0]
        hits = int((_hollow_norms(d, supports, gram) <= delta).sum())
        est = hits / total
        return CertificationReport("strip", params, "exhaustive", total, hits,
                                   est, (est, est))
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    supports = _mc_supports(d.N, k, seed, "strip", trials)
    hits = int((_hollow_norms(d, supports, gram) <= delta).sum())
    est = hits / trials
    return CertificationReport("strip", params, "monte_carlo", trials, hits,
                               est, clopper_pearson(hits, trials), seed=seed)


def sinc_estimate(d: Dictionary, k: int, alpha: float, method: str = "monte_carlo",
                  trials: int = 10_000, seed: int = 0,
                  cap: int = EXHAUSTIVE_CAP) -> CertificationReport:
    """P over uniform k-subsets I of max_{i not in I} ||Phi_I^H phi_i||^2 <= alpha."""
    if not (1 <= k <= d.N):
        raise ValueError("need 1 <= k <= N")
    if k == d.N:
        # no outside column: the condition is vacuous
        return CertificationReport("sinc", {"k": k, "alpha": alpha}, method,
                                   1, 1, 1.0, (1.0, 1.0), seed=seed)
    gram = _maybe_gram(d)
    params = {"k": k, "alpha": alpha}
    if method == "exhaustive":
        supports = _enumerate_supports(d.N, k, cap)
        total = supports.shape[0]
        hits = int((_sinc_stats(d, supports, gram) <= alpha).sum())
        est = hits / total
        return CertificationReport("sinc", params, "exhaustive", total, hits,
                                   est, (est, est))
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    supports = _mc_supports(d.N, k, seed, "sinc", trials)
    hits = int((_sinc_stats(d, supports, gram) <= alpha).sum())
    est = hits / trials
    return CertificationReport("sinc", params, "monte_carlo", trials, hits,
                               est, clopper_pearson(hits, trials), seed=seed)


def wsinc_weight(delta: float, t: float) -> float:
    """Discount factor exp(-(1-delta)^2 / (8 t^2)); 0 at t = 0."""
    if t <= 0.0:
        return 0.0 if delta < 1.0 else 1.0
    return math.exp(-((1.0 - delta) ** 2) / (8.0 * t * t))


def wsinc_estimate(d: Dictionary, k: int, delta: float, alpha: float,
                   trials: int = 10_000, seed: int = 0,
                   eps: Optional[float] = None) -> CertificationReport:
    """Monte Carlo estimate of the weighted incoherence sum.

    Samples a uniform support I plus a uniform extra index i outside it and
    averages 1{I violates the alpha-incoherence} * weight(delta, ||Phi_I^H phi_i||).
    ``successes`` counts the violation events themselves, so the plain
    estimate is P(I in A_alpha); at delta = 1 the weighted sum equals it.
    """
    if not (1 <= k < d.N):
        raise ValueError("need 1 <= k < N")
    gram = _maybe_gram(d)
    total = 0.0
    violations = 0
    for t in range(trials):
        rng = derive_rng(seed, "wsinc", t)
        sup = sample_support(d.N, k, rng)
        outside = np.setdiff1d(np.arange(d.N), sup, assume_unique=True)
        i = int(rng.choice(outside))
        if _sinc_stat(d, sup, gram) > alpha:
            violations += 1
            idx = np.asarray(sup)
            if gram is not None:
                cross = gram[idx, i]
            else:
                cross = d.entries[:, idx].conj().T @ d.entries[:, i]
            tval = float(np.linalg.norm(cross))
            total += wsinc_weight(delta, tval)
    est = violations / trials
    threshold = None if eps is None else eps ** 2 / (d.N - k)
    return CertificationReport(
        "wsinc", {"k": k, "delta": delta, "alpha": alpha}, "monte_carlo",
        trials, violations, est, clopper_pearson(violations, trials),
        seed=seed, wsinc_lhs=total / trials, wsinc_threshold=threshold,
    )


# ---------------------------------------------------------------------------
# closed-form sufficient conditions

@dataclass
class SufficientConditionVerdict:
    condition: str
    inputs: dict
    satisfied: bool
    slack: dict                   # per-inequality margin, RHS - LHS
    derived: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "schema_version": 1,
            "condition": self.condition, "inputs": self.inputs,
            "satisfied": self.satisfied, "slack": self.slack,
            "derived": self.derived,
        }


def _verdict(condition, inputs, slack, derived=None):
    ok = all(v >= 0 for v in slack.values())
    return SufficientConditionVerdict(condition, inputs, ok, slack, derived or {})


_A_LATTICE = tuple(np.geomspace(1e-4, 1 - 1e-4, 41))


def _best_a(evaluate):
    """Pick the split constant maximizing the worst per-inequality margin."""
    best = None
    for a in _A_LATTICE:
        v = evaluate(float(a))
        score = min(v.derived["margin_ratio"].values())
        if best is None or score > best[0]:
            best = (score, v)
    return best[1]


def _ratio(rhs: float, lhs: float) -> float:
    # capped so payloads stay strict JSON (no Infinity literals)
    if lhs <= 0:
        return 1e300
    return min(rhs / lhs, 1e300)


def sinc_sufficient(mu: float, theta: float, k: int, N: int, eps: float,
                    a: Optional[float] = 0.5,
                    beta: float = 1.0) -> SufficientConditionVerdict:
    """Coherence-moment test implying the (k, alpha, eps)-SINC property with
    alpha = beta / ln(2N/eps).

    ``a`` splits the budget between the two moment inequalities; passing
    ``None`` searches it for the best worst-case margin.
    """
    if a is None:
        return _best_a(lambda aa: sinc_sufficient(mu, theta, k, N, eps, aa, beta))
    if not (0 < a < 1) or beta <= 0:
        raise ValueError("need 0 < a < 1 and beta > 0")
    L = math.log(2 * N / eps)
    rhs1 = (1 - a) ** 2 * beta ** 2 / (32 * k * L ** 3)
    rhs2 = a * beta / (k * L)
    slack = {"mu4": rhs1 - mu ** 4, "theta": rhs2 - theta}
    return _verdict("sinc_coherence",
                    {"mu": mu, "theta": theta, "k": k, "N": N, "eps": eps,
                     "a": a, "beta": beta},
                    slack,
                    {"alpha": beta / L,
                     "margin_ratio": {"mu4": _ratio(rhs1, mu ** 4),
                                      "theta": _ratio(rhs2, theta)}})


def sinc_tail_sufficient(mu: float, theta: float, k: int, alpha: float,
                         beta: float, a: float = 0.5) -> SufficientConditionVerdict:
    """Tail variant: under the two moment bounds, the chance that a random
    support accumulates squared coherence above alpha is at most 2 e^{-beta/alpha}."""
    if not (0 < a < 1) or alpha <= 0 or beta <= 0:
        raise ValueError("need 0 < a < 1 and positive alpha, beta")
    slack = {
        "alpha_range": beta / math.log(2) - alpha,
        "mu4": (1 - a) ** 2 * alpha ** 3 / (32 * beta * k) - mu ** 4,
        "ktheta": a * alpha - k * theta,
    }
    return _verdict("sinc_tail",
                    {"mu": mu, "theta": theta, "k": k, "alpha": alpha,
                     "beta": beta, "a": a},
                    slack, {"tail_bound": 2 * math.exp(-beta / alpha)})


def strip_sufficient_via_sinc(mu: float, theta: float, k: int, delta: float,
                              eps1: float,
                              a: Optional[float] = 0.5) -> SufficientConditionVerdict:
    """StRIP through the incoherence route; admits mu up to order k^(-3/4)."""
    if a is None:
        return _best_a(
            lambda aa: strip_sufficient_via_sinc(mu, theta, k, delta, eps1, aa))
    if not (0 < a < 1):
        raise ValueError("need 0 < a < 1")
    if not (0 < eps1 < 2 * k):
        raise ValueError("need 0 < eps1 < 2k")
    rhs1 = a * delta ** 2 / k ** 2
    rhs2 = (1 - a) ** 2 * delta ** 4 / (32 * k ** 3 * math.log(2 * k / eps1))
    slack = {"theta": rhs1 - theta, "mu4": rhs2 - mu ** 4}
    return _verdict("strip_via_sinc",
                    {"mu": mu, "theta": theta, "k": k, "delta": delta,
                     "eps1": eps1, "a": a},
                    slack,
                    {"margin_ratio": {"theta": _ratio(rhs1, theta),
                                      "mu4": _ratio(rhs2, mu ** 4)}})


def strip_sufficient_direct(mu: float, theta: float, k: int, N: int,
                            frame_norm: float, delta: float, eps: float,
                            a: Optional[float] = None, b: Optional[float] = None,
                            c: Optional[float] = None) -> SufficientConditionVerdict:
    """Direct StRIP condition; admits mu up to order (k log k log^3(1/eps))^(-1/4).

    With any of a, b, c omitted, grid-searches the free constants over a log
    lattice and returns the triple with the best worst-case normalized slack.
    """
    eps_max = min(1.0 / k, math.exp(1 - 1 / math.log(2)))
    if not (0 < eps < eps_max):
        raise ValueError(f"need 0 < eps < {eps_max:.4g}")
    if a is None or b is None or c is None:
        lattice = np.geomspace(1e-6, 0.99, 12)
        best = None
        for aa in lattice:
            for bb in lattice:
                for cc in lattice:
                    v = strip_sufficient_direct(mu, theta, k, N, frame_norm,
                                                delta, eps, aa, bb, cc)
                    score = min(v.derived["normalized_slack"].values())
                    if best is None or score > best[0]:
                        best = (score, v)
        return best[1]
    if not all(0 < x < 1 for x in (a, b, c)):
        raise ValueError("need a, b, c in (0, 1)")
    L1 = math.log(1 / eps)
    lhs1 = k * mu ** 4
    rhs1 = min((1 - a) ** 2 * b ** 2 / (32 * math.log(2 * k) * math.log(math.e / eps)),
               c ** 2) / L1 ** 2
    lhs2 = k * theta
    rhs2 = a * b / L1
    lhs3 = math.sqrt(a) + math.sqrt(2 * a * b) + math.sqrt(c) \
        + 2 * k * frame_norm ** 2 / N
    rhs3 = math.exp(-0.25) * delta / (6 * math.sqrt(2))
    slack = {"kmu4": rhs1 - lhs1, "ktheta": rhs2 - lhs2, "constants": rhs3 - lhs3}
    norm_slack = {
        "kmu4": (rhs1 - lhs1) / max(rhs1, lhs1, 1e-300),
        "ktheta": (rhs2 - lhs2) / max(rhs2, lhs2, 1e-300),
        "constants": (rhs3 - lhs3) / max(rhs3, lhs3, 1e-300),
    }
    return _verdict("strip_coherence",
                    {"mu": mu, "theta": theta, "k": k, "N": N,
                     "frame_norm": frame_norm, "delta": delta, "eps": eps,
                     "a": a, "b": b, "c": c},
                    slack, {"normalized_slack": norm_slack})


def oa_strip_required_m(l: int, k: int, delta: float, eps: float) -> float:
    """Rows needed for StRIP via a strength-l orthogonal array."""
    if l < 2 or l % 2:
        raise ValueError("need even l >= 2")
    return 0.75 * l * (k / delta) ** 2 * (k / eps) ** (2.0 / l)


def oa_strip_sufficient(l: int, k: int, delta: float, eps: float,
                        m: int) -> SufficientConditionVerdict:
    required = oa_strip_required_m(l, k, delta, eps)
    return _verdict("strip_oa",
                    {"l": l, "k": k, "delta": delta, "eps": eps, "m": m},
                    {"rows": m - required}, {"required_m": required})


def dg_sparsity_bound(m: int, delta: float, eps: float,
                      constant: float = 0.52) -> float:
    """Max sparsity certified for the bipolar Kerdock-family dictionaries.

    ``constant`` = 0.52 is the generic strength-7 moment route; 0.95 uses the
    exact sixth-moment of the r=1 member (its eps = 0.001 specialization is
    the usual 0.35 delta^(6/7) m^(3/7) form).
    """
    return constant * (delta ** 6 * eps * m ** 3) ** (1.0 / 7.0)


def gershgorin_sufficient(mu: float, k: int, delta: float) -> SufficientConditionVerdict:
    """Deterministic floor: coherence mu makes every k-subset (k-1)mu-isometric."""
    return _verdict("gershgorin", {"mu": mu, "k": k, "delta": delta},
                    {"delta": delta - (k - 1) * mu})


def dg_sparsity_sufficient(m: int, delta: float, eps: float, k: int,
                           constant: float = 0.52) -> SufficientConditionVerdict:
    """Verdict form of the Kerdock-family sparsity ceiling."""
    bound = dg_sparsity_bound(m, delta, eps, constant)
    return _verdict("dg_sparsity",
                    {"m": m, "delta": delta, "eps": eps, "k": k,
                     "constant": constant},
                    {"k": bound - k}, {"max_k": bound})


EVALUATORS = {
    "sinc-coherence": sinc_sufficient,
    "sinc-tail": sinc_tail_sufficient,
    "strip-via-sinc": strip_sufficient_via_sinc,
    "strip-coherence": strip_sufficient_direct,
    "strip-oa": oa_strip_sufficient,
    "gershgorin": gershgorin_sufficient,
    "dg-sparsity": dg_sparsity_sufficient,
}
