import math
from fractions import Fraction

import numpy as np
import pytest

import stripkit as sk
from stripkit.dictionaries import BinaryCode
from stripkit.gvforge import GvInfeasibleError, GvSpecError, GvSpec


class TestSpec:
    def test_auto_size_natural_log(self):
        spec = GvSpec(l=10, mu_target=0.5)
        assert spec.m == math.ceil(4 * math.log(1024) / 0.25) == 111

    def test_band_inclusive(self):
        spec = GvSpec(l=10, mu_target=0.5, m=111)
        assert spec.band == (28, 83)
        # every weight inside the band keeps coherence within the target
        lo, hi = spec.band
        for w in (lo, hi):
            assert abs(1 - 2 * w / 111) <= 0.5

    def test_rejects_bad_params(self):
        with pytest.raises(GvSpecError):
            GvSpec(l=0, mu_target=0.5)
        with pytest.raises(GvSpecError):
            GvSpec(l=4, mu_target=0.0)
        with pytest.raises(GvSpecError):
            GvSpec(l=4, mu_target=0.2, m=10_000)


class TestGvRandom:
    def test_single_column(self):
        spec = GvSpec(l=1, mu_target=0.5, m=16)
        res = sk.gv_random(spec, seed=3)
        weights = res.code.words.sum(axis=1)
        w = int(weights.max())        # the only nonzero word's weight
        lo, hi = spec.band
        assert res.success == (lo <= w <= hi and res.code.N == 2)

    def test_mu_one_always_succeeds(self):
        spec = GvSpec(l=3, mu_target=1.0, m=8)
        for seed in range(10):
            res = sk.gv_random(spec, seed)
            if res.code.generator is not None:
                assert res.success

    def test_success_rate_matches_failure_bound(self):
        # expected failure probability is at most 2/N = 2/1024
        spec = GvSpec(l=10, mu_target=0.5)
        wins = sum(sk.gv_random(spec, seed).success for seed in range(100))
        assert wins >= 90

    def test_success_implies_target_coherence(self):
        spec = GvSpec(l=6, mu_target=0.5)
        for seed in range(20):
            res = sk.gv_random(spec, seed)
            if res.success:
                width, mu = sk.code_width(res.code)
                assert mu <= spec.mu_target + 1e-12
                d = sk.from_binary_code(res.code)
                assert sk.coherence_profile(d).mu <= spec.mu_target + 1e-12


class TestGvDerandomized:
    def test_acceptance_size_succeeds(self):
        spec = GvSpec(l=10, mu_target=0.5, m=111)
        res = sk.gv_derandomized(spec)
        assert res.success and res.out_of_band == 0
        width, mu = sk.code_width(res.code)
        assert mu <= 0.5

    def test_trace_starts_below_one_and_never_increases(self):
        spec = GvSpec(l=8, mu_target=0.5)
        res = sk.gv_derandomized(spec)
        tr = res.expectation_trace
        assert len(tr) == spec.m * spec.l + 1
        assert tr[0] < 1
        assert all(b <= a for a, b in zip(tr, tr[1:]))
        assert tr[-1] == 0           # zero outliers guaranteed at the end

    def test_exact_rational_trace(self):
        spec = GvSpec(l=5, mu_target=0.6)
        res = sk.gv_derandomized(spec)
        assert all(isinstance(v, Fraction) for v in res.expectation_trace)

    def test_refusal_when_too_tight(self):
        # m far below 4 ln(16)/mu^2 = 177 makes the initial expectation >= 1
        with pytest.raises(GvInfeasibleError) as err:
            sk.gv_derandomized(GvSpec(l=4, mu_target=0.25, m=40))
        assert "expectation" in str(err.value)

    def test_refusal_threshold_matches_direct_expectation(self):
        # direct computation of (N-1) P(Bin(m) outside band) at the edge
        from math import comb
        spec_bad = GvSpec(l=4, mu_target=0.25, m=40)
        lo, hi = spec_bad.band
        p_out = 1 - sum(comb(40, j) for j in range(lo, hi + 1)) / 2 ** 40
        assert 15 * p_out >= 1       # hence the refusal above

    def test_determinism(self):
        spec = GvSpec(l=6, mu_target=0.5)
        a = sk.gv_derandomized(spec)
        b = sk.gv_derandomized(spec)
        assert np.array_equal(a.code.words, b.code.words)

    def test_mu_one_trivial_band(self):
        res = sk.gv_derandomized(GvSpec(l=3, mu_target=1.0, m=8))
        assert res.success and res.out_of_band == 0


class TestCodeWidth:
    def test_equidistant_code(self):
        words = np.array([[0, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1]],
                         dtype=np.uint8)
        width, mu = sk.code_width(BinaryCode(m=4, N=4, words=words))
        assert width == 0.0 and mu == 0.0

    def test_antipodal_pair(self):
        code = BinaryCode(m=6, N=2,
                          words=np.stack([np.zeros(6), np.ones(6)]).astype(np.uint8))
        width, mu = sk.code_width(code)
        assert width == 3.0 and mu == 1.0

    def test_linear_route_matches_pairwise(self):
        spec = GvSpec(l=5, mu_target=0.6)
        res = sk.gv_derandomized(spec)
        width_gen, _ = sk.code_width(res.code)
        stripped = BinaryCode(m=res.code.m, N=res.code.N,
                              words=res.code.words)     # no generator
        width_pairs, _ = sk.code_width(stripped)
        assert width_gen == width_pairs
