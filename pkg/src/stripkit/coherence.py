"""Coherence statistics, distance distributions, and orthogonal-array checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .dictionaries import BinaryCode, Dictionary

INVARIANCE_TOL = 1e-9


@dataclass
class CoherenceProfile:
    mu: float                 # max |<phi_i, phi_j>| over i != j
    mean_sq: float            # mean of squared coherences over ordered pairs
    max_avg_sq: float         # max over j of the row-averaged squared coherence
    theta: float              # mean_sq if coherence-invariant else max_avg_sq
    invariant: bool
    spectral_norm: float
    gram_offdiag_count: int   # distinct off-diagonal |Gram| values at tolerance

    def as_dict(self) -> dict:
        return {
            "mu": self.mu, "mean_sq": self.mean_sq,
            "max_avg_sq": self.max_avg_sq, "theta": self.theta,
            "invariant": self.invariant, "spectral_norm": self.spectral_norm,
            "gram_offdiag_count": self.gram_offdiag_count,
        }


def spectral_norm(d: Dictionary) -> float:
    """Largest singular value via the smaller-side frame operator."""
    a = d.entries
    if d.m <= d.N:
        op = a @ a.conj().T
    else:
        op = a.conj().T @ a
    vals = np.linalg.eigvalsh(op)
    return float(np.sqrt(max(vals[-1], 0.0)))


def coherence_profile(d: Dictionary, tol: float = INVARIANCE_TOL) -> CoherenceProfile:
    """All pairwise coherence statistics of one dictionary.

    Invariance compares the sorted multiset of coherences seen from each
    column against column 0, entrywise, at absolute tolerance ``tol``.
    """
    g = np.abs(d.gram())
    np.fill_diagonal(g, 0.0)
    n = d.N
    mu = float(g.max())
    if n == 1:
        return CoherenceProfile(0.0, 0.0, 0.0, 0.0, True, spectral_norm(d), 0)
    sq = g ** 2
    row_avg = sq.sum(axis=1) / (n - 1)
    mean_sq = float(row_avg.mean())
    max_avg_sq = float(row_avg.max())
    sorted_rows = np.sort(g, axis=1)[:, 1:]  # drop the diagonal zero
    invariant = bool(np.abs(sorted_rows - sorted_rows[0]).max() <= tol)
    theta = mean_sq if invariant else max_avg_sq
    offdiag = np.sort(g[~np.eye(n, dtype=bool)])
    distinct = 1 + int(np.count_nonzero(np.diff(offdiag) > tol))
    return CoherenceProfile(
        mu=mu, mean_sq=mean_sq, max_avg_sq=max_avg_sq, theta=theta,
        invariant=invariant, spectral_norm=spectral_norm(d),
        gram_offdiag_count=distinct,
    )


@dataclass
class DistanceDistribution:
    """Exact pair counts: B_w = (#ordered pairs at Hamming distance w) / N."""

    m: int
    counts: dict          # w -> integer count of ordered pairs (i=j included)
    N: int

    def weight(self, w: int) -> Fraction:
        return Fraction(self.counts.get(w, 0), self.N)

    @property
    def weights(self) -> dict:
        return {w: Fraction(c, self.N) for w, c in sorted(self.counts.items())}


def distance_distribution(code: BinaryCode) -> DistanceDistribution:
    if code.N < 1:
        raise ValueError("empty code")
    bits = code.words.astype(np.int16)
    counts: dict = {}
    # row-blocked pairwise distances keep memory flat for big codes
    block = max(1, 2 ** 22 // max(1, code.N * code.m))
    for start in range(0, code.N, block):
        chunk = bits[start:start + block]
        dist = (chunk[:, None, :] != bits[None, :, :]).sum(axis=2)
        vals, cnt = np.unique(dist, return_counts=True)
        for w, c in zip(vals, cnt):
            counts[int(w)] = counts.get(int(w), 0) + int(c)
    return DistanceDistribution(m=code.m, counts=counts, N=code.N)


def pless_residual(dist: DistanceDistribution, N: int, l: int) -> float:
    """Centered distance moment minus the matching binomial moment.

    Exactly zero (as a rational) when the code is an orthogonal array of
    strength >= l; the float of the exact difference is returned.
    """
    if l < 1:
        raise ValueError("need l >= 1")
    m = dist.m
    lhs = Fraction(0)
    for w, c in dist.counts.items():
        lhs += Fraction(c, N * N) * Fraction(2 * w - m, 2) ** l
    rhs = Fraction(0)
    for w in range(m + 1):
        rhs += Fraction(comb(m, w), 2 ** m) * Fraction(2 * w - m, 2) ** l
    return float(lhs - rhs)


def pless_relative_residual(dist: DistanceDistribution, N: int, l: int) -> float:
    """|lhs - rhs| scaled by the binomial moment (1 with a zero denominator)."""
    m = dist.m
    rhs = Fraction(0)
    for w in range(m + 1):
        rhs += Fraction(comb(m, w), 2 ** m) * Fraction(2 * w - m, 2) ** l
    resid = pless_residual(dist, N, l)
    if rhs == 0:
        return abs(resid)
    return abs(resid) / float(abs(rhs))


@dataclass
class OaStrengthResult:
    strength: int
    exact: bool           # False when only the moment necessary condition ran
    note: str = ""

    def __int__(self):
        return self.strength


def oa_strength(code: BinaryCode, t_max: int,
                budget: int = 200_000_000) -> OaStrengthResult:
    """Largest t <= t_max with every t-column pattern hit exactly N/2^t times.

    Falls back to the moment necessary condition (largest l with zero
    centered-moment residual) when the exact enumeration would exceed
    ``budget`` elementary operations.
    """
    if code.N < 1:
        raise ValueError("empty code")
    m, N = code.m, code.N
    t_max = min(t_max, m)
    cost = sum(comb(m, t) * N for t in range(1, t_max + 1))
    if cost > budget:
        dist = distance_distribution(code)
        l = 0
        while l < t_max and pless_relative_residual(dist, N, l + 1) <= 1e-9:
            l += 1
        return OaStrengthResult(strength=l, exact=False,
                                note="necessary-condition only (budget exceeded)")
    bits = code.words
    strength = 0
    for t in range(1, t_max + 1):
        if N % (1 << t):
            break
        expected = N >> t
        ok = True
        pow2 = 1 << np.arange(t)
        for cols in combinations(range(m), t):
            patterns = bits[:, cols].astype(np.int64) @ pow2
            if np.any(np.bincount(patterns, minlength=1 << t) != expected):
                ok = False
                break
        if not ok:
            break
        strength = t
    return OaStrengthResult(strength=strength, exact=True)


def moment_mu_l(d: Dictionary, l: int) -> float:
    """Exact average of the l-th power of pairwise coherences (ordered pairs)."""
    if l < 2 or l % 2:
        raise ValueError("need even l >= 2")
    g = np.abs(d.gram())
    np.fill_diagonal(g, 0.0)
    n = d.N
    if n == 1:
        return 0.0
    return float((g ** l).sum() / (n * (n - 1)))


def tight_frame_mean_sq(m: int, N: int) -> float:
    """Mean-square coherence forced on any unit-norm tight frame."""
    return (N - m) / (m * (N - 1))


def gram_submatrix(d: Dictionary, support) -> np.ndarray:
    sub = d.entries[:, support]
    return sub.conj().T @ sub


def hollow_gram_norm(d: Dictionary, support,
                     gram: Optional[np.ndarray] = None) -> float:
    """Spectral norm of Phi_I^H Phi_I - Id for one support I."""
    idx = np.asarray(support)
    if gram is not None:
        sub = gram[np.ix_(idx, idx)]
    else:
        sub = gram_submatrix(d, idx)
    hollow = sub - np.eye(len(idx), dtype=sub.dtype)
    vals = np.linalg.eigvalsh(hollow)
    return float(max(abs(vals[0]), abs(vals[-1])))
