"""Low-coherence binary dictionaries by random generators and by the
method of conditional expectations.

A random m x l binary generator spans 2^l codewords; the construction
succeeds when every nonzero codeword weight stays inside the band
[m/2 (1-mu), m/2 (1+mu)], which forces bipolar coherence at most mu.
The derandomized builder fixes generator entries one at a time, choosing
each bit to minimize the exact conditional expectation of the number of
out-of-band codewords; all probabilities are dyadic rationals, so the
bookkeeping is done in exact integer arithmetic (numerator at scale 2^m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from .dictionaries import BinaryCode, span_of_generator
from .seeding import derive_rng

HARD_M_CAP = 4096


class GvSpecError(ValueError):
    pass


class GvInfeasibleError(RuntimeError):
    """Initial conditional expectation is at least 1: the requested band is too tight."""


@dataclass
class GvSpec:
    l: int                       # log2 of the codeword count
    mu_target: float
    m: Optional[int] = None      # auto-sized to ceil(4 ln N / mu^2) when None

    def __post_init__(self):
        if self.l < 1:
            raise GvSpecError("need l >= 1")
        if not (0 < self.mu_target <= 1):
            raise GvSpecError("need 0 < mu <= 1")
        auto = self.auto_m()
        if self.m is None:
            self.m = auto
        if self.m < 1:
            raise GvSpecError("need m >= 1")
        if self.m > HARD_M_CAP:
            raise GvSpecError(f"m = {self.m} beyond the exact-arithmetic cap {HARD_M_CAP}")

    def auto_m(self) -> int:
        return math.ceil(4.0 * math.log(2 ** self.l) / self.mu_target ** 2)

    @property
    def N(self) -> int:
        return 2 ** self.l

    @property
    def band(self) -> tuple:
        """Inclusive integer weight window [m/2 (1-mu), m/2 (1+mu)]."""
        half = self.m / 2.0
        lo = math.ceil(half * (1.0 - self.mu_target) - 1e-12)
        hi = math.floor(half * (1.0 + self.mu_target) + 1e-12)
        return max(lo, 0), min(hi, self.m)


@dataclass
class GvResult:
    code: BinaryCode
    success: bool
    out_of_band: int
    expectation_trace: list = field(default_factory=list)  # Fractions, derandomized only


def _nonzero_weights(generator: np.ndarray) -> np.ndarray:
    words = span_of_generator(generator)
    weights = words.sum(axis=1)
    return weights[1:]  # row 0 is the zero combination


def gv_random(spec: GvSpec, seed: int) -> GvResult:
    """Uniform random generator rows; success iff all weights sit in the band."""
    rng = derive_rng(seed, "gv_random")
    generator = rng.integers(0, 2, size=(spec.m, spec.l), dtype=np.uint8)
    words = span_of_generator(generator)
    # duplicated words mean the generator columns are dependent; still a code,
    # but dedupe for the container invariant
    uniq = np.unique(words, axis=0)
    if uniq.shape[0] == spec.N:
        code = BinaryCode(m=spec.m, N=spec.N, words=words, generator=generator)
    else:
        code = BinaryCode(m=spec.m, N=uniq.shape[0], words=uniq)
    lo, hi = spec.band
    w = _nonzero_weights(generator)
    bad = int(((w < lo) | (w > hi)).sum())
    return GvResult(code=code, success=bad == 0 and uniq.shape[0] == spec.N,
                    out_of_band=bad)


class _BandTables:
    """Exact counts of binomial outcomes landing inside [lo-d, hi-d]."""

    def __init__(self, m: int, lo: int, hi: int):
        self.m = m
        self.lo = lo
        self.hi = hi
        # prefix[r][x] = sum_{j<=x} C(r, j), with clamping sentinels
        self.prefix = []
        for r in range(m + 1):
            row = [0] * (r + 2)
            acc = 0
            for j in range(r + 1):
                acc += comb(r, j)
                row[j + 1] = acc
            self.prefix.append(row)

    def inside(self, decided_ones: int, remaining: int) -> int:
        """# of Bin(remaining) outcomes j with decided_ones + j inside the band."""
        lo = self.lo - decided_ones
        hi = self.hi - decided_ones
        lo = max(lo, 0)
        hi = min(hi, remaining)
        if hi < lo:
            return 0
        row = self.prefix[remaining]
        return row[hi + 1] - row[lo]

    def outside_scaled(self, decided_ones: int, remaining: int, m: int) -> int:
        """2^m * P(out of band | decided): integer at the common scale."""
        total = 1 << remaining
        return (total - self.inside(decided_ones, remaining)) << (m - remaining)


def gv_derandomized(spec: GvSpec) -> GvResult:
    """Conditional-expectations generator: deterministic, zero out-of-band
    codewords whenever the initial expectation is below one.

    Entries are decided row-major; fixing entry (i, j) finalizes the row-i
    parity of exactly the 2^j codeword indices whose top set bit is j, since
    a parity stays uniform while any participating bit is undecided. The
    running expectation (kept as an exact integer numerator at scale 2^m)
    never increases because each decided bit picks the smaller branch of an
    average.
    """
    m, l, N = spec.m, spec.l, spec.N
    lo, hi = spec.band
    tables = _BandTables(m, lo, hi)
    scale = 1 << m

    ones = [0] * N            # decided-parity one counts per codeword index
    remaining = [m] * N
    partial = [0] * N         # parity of the decided prefix of the current row
    total = (N - 1) * tables.outside_scaled(0, m, m)
    initial = Fraction(total, scale)
    if initial >= 1:
        raise GvInfeasibleError(
            f"initial expectation {float(initial):.4g} >= 1; enlarge m "
            f"(auto size {spec.auto_m()})")
    trace = [initial]
    by_top_bit = [list(range(1 << j, 1 << (j + 1))) for j in range(l)]
    generator = np.zeros((m, l), dtype=np.uint8)

    for i in range(m):
        for u in range(1, N):
            partial[u] = 0
        for j in range(l):
            finalized = by_top_bit[j]
            delta = {0: 0, 1: 0}
            for u in finalized:
                old = tables.outside_scaled(ones[u], remaining[u], m)
                rem = remaining[u] - 1
                # bit b makes row parity = partial[u] ^ (b if u has bit j) ; all
                # u here have bit j set by construction
                for b in (0, 1):
                    par = partial[u] ^ b
                    delta[b] += tables.outside_scaled(ones[u] + par, rem, m) - old
            bit = 0 if delta[0] <= delta[1] else 1
            generator[i, j] = bit
            total += delta[bit]
            trace.append(Fraction(total, scale))
            for u in finalized:
                par = partial[u] ^ bit
                ones[u] += par
                remaining[u] -= 1
            # fold the decided bit into the running parities of every index
            # that contains bit j but also higher bits (still pending)
            if bit:
                for jj in range(j + 1, l):
                    for u in by_top_bit[jj]:
                        if u >> j & 1:
                            partial[u] ^= 1

    words = span_of_generator(generator)
    uniq = np.unique(words, axis=0)
    w = _nonzero_weights(generator)
    bad = int(((w < lo) | (w > hi)).sum())
    if uniq.shape[0] == N:
        code = BinaryCode(m=m, N=N, words=words, generator=generator)
    else:
        # a zero-weight combination is out of band whenever lo >= 1, so a
        # collapsed span can only happen on the trivial mu = 1 band
        code = BinaryCode(m=m, N=uniq.shape[0], words=uniq)
    return GvResult(code=code, success=bad == 0, out_of_band=bad,
                    expectation_trace=trace)


def code_width(code: BinaryCode) -> tuple:
    """(width, coherence): max deviation of nonzero pairwise distances from
    m/2, and the bipolar coherence 2 w / m it induces.

    For a linear code (generator present) pairwise distances are the nonzero
    codeword weights, so those are enumerated directly.
    """
    if code.N < 1:
        raise GvSpecError("empty code")
    half = code.m / 2.0
    if code.generator is not None:
        weights = _nonzero_weights(code.generator)
        if weights.size == 0:
            return 0.0, 0.0
        width = float(np.abs(weights - half).max())
    elif code.N == 1:
        return 0.0, 0.0
    else:
        bits = code.words.astype(np.int16)
        width = 0.0
        for i in range(code.N):
            dist = (bits[i + 1:] != bits[i]).sum(axis=1)
            if dist.size:
                width = max(width, float(np.abs(dist - half).max()))
    return width, 2.0 * width / code.m
