import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shl.errors import InsufficientSampleError
from shl.stats import (
    cantelli_confidence,
    chebyshev_confidence,
    chi2_sf,
    kolmogorov_sf,
    normal_sf,
    summarize,
)

# Frozen oracle values, computed once with 40-digit arithmetic
# (regularized incomplete gamma / erfc / the alternating series).
CHI2_ORACLE = {
    (3.841, 1): 0.05001368376395670,
    (5.0, 3): 0.17179714429673314,
    (27.5, 10): 0.002169477405398880,
}
KOLMOGOROV_ORACLE = {
    1.3581: 0.049999630431667436,
    0.5: 0.9639452436648751,
}
NORMAL_ORACLE = {
    1.6449: 0.04999521746834630,
    -1.0: 0.8413447460685429,
    2.5: 0.006209665325776135,
}


class TestSummarize:
    def test_hand_computed(self):
        s = summarize([1, 2, 3])
        assert s.n == 3
        assert s.mean == pytest.approx(2.0)
        assert s.s == pytest.approx(1.0)
        assert s.sem == pytest.approx(1 / math.sqrt(3))
        assert s.k_sigma == pytest.approx(2 * math.sqrt(3))
        assert not s.degenerate

    def test_constant_sample_degenerate(self):
        s = summarize([5, 5, 5, 5])
        assert s.mean == 5.0 and s.s == 0.0
        assert s.degenerate
        assert s.k_sigma == math.inf

    def test_negative_mean_gives_negative_k(self):
        assert summarize([-1.0, -2.0, -3.0]).k_sigma < 0

    def test_paper_scale_n30(self):
        s = summarize(list(range(1, 31)))
        assert s.n == 30
        assert s.mean == pytest.approx(15.5)
        # sd of 1..30 with n-1 divisor: sqrt(30*31/12) = sqrt(77.5)
        assert s.s == pytest.approx(math.sqrt(77.5))
        assert s.sem == pytest.approx(math.sqrt(77.5 / 30))

    def test_too_short(self):
        with pytest.raises(InsufficientSampleError):
            summarize([1.0])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
    def test_sem_times_sqrt_n_is_s(self, xs):
        s = summarize(xs)
        assert s.sem * math.sqrt(s.n) == pytest.approx(s.s, rel=1e-12, abs=1e-12)


class TestConfidenceBounds:
    def test_chebyshev_vacuous_at_1(self):
        assert chebyshev_confidence(1.0) == 0.0

    def test_chebyshev_9995(self):
        assert chebyshev_confidence(44.7214) == pytest.approx(0.9995, abs=1e-6)

    def test_chebyshev_67(self):
        assert chebyshev_confidence(67.0) == pytest.approx(0.999777, abs=1e-6)

    def test_cantelli_values(self):
        assert cantelli_confidence(1.0) == pytest.approx(0.5)
        assert cantelli_confidence(3.0) == pytest.approx(0.9)
        assert cantelli_confidence(67.0) == pytest.approx(0.9997773, abs=1e-6)

    @pytest.mark.parametrize("fn", [chebyshev_confidence, cantelli_confidence])
    def test_domain_error(self, fn):
        with pytest.raises(ValueError):
            fn(0.0)
        with pytest.raises(ValueError):
            fn(-2.0)

    def test_strictly_increasing_to_one(self):
        ks = np.linspace(0.5, 200, 400)
        for fn in (chebyshev_confidence, cantelli_confidence):
            vals = [fn(k) for k in ks]
            assert all(b >= a for a, b in zip(vals, vals[1:]))
            assert vals[-1] > 0.99997

    @given(st.floats(1.0 + 1e-9, 1e6))
    def test_closed_forms(self, k):
        assert chebyshev_confidence(k) == 1.0 - 1.0 / k**2
        assert cantelli_confidence(k) == 1.0 - 1.0 / (1.0 + k**2)


class TestChi2Sf:
    def test_full_tail_at_zero(self):
        for dof in (1, 2, 5, 30):
            assert chi2_sf(0.0, dof) == 1.0

    @pytest.mark.parametrize("args,expected", list(CHI2_ORACLE.items()))
    def test_oracle_values(self, args, expected):
        assert chi2_sf(*args) == pytest.approx(expected, abs=1e-10)

    def test_far_tail_order_of_magnitude(self):
        p = chi2_sf(100.0, 1)
        assert p == pytest.approx(1.523970604832105e-23, rel=1e-8)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            chi2_sf(-0.1, 1)

    @given(st.floats(0.0, 500.0))
    def test_dof2_closed_form(self, x):
        assert chi2_sf(x, 2) == pytest.approx(math.exp(-x / 2.0), abs=1e-12)

    def test_nonincreasing_in_x(self):
        xs = np.linspace(0, 60, 300)
        for dof in (1, 4, 11):
            vals = [chi2_sf(x, dof) for x in xs]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_extreme_underflow_clamps_to_zero(self):
        assert chi2_sf(1e7, 5) == 0.0


class TestKolmogorovSf:
    def test_clamp_at_zero(self):
        assert kolmogorov_sf(0.0) == 1.0

    @pytest.mark.parametrize("lam,expected", list(KOLMOGOROV_ORACLE.items()))
    def test_oracle_values(self, lam, expected):
        assert kolmogorov_sf(lam) == pytest.approx(expected, abs=1e-3)

    def test_series_collapse(self):
        assert kolmogorov_sf(10.0) < 1e-80


class TestNormalSf:
    def test_symmetry_point(self):
        assert normal_sf(0.0) == 0.5

    @pytest.mark.parametrize("z,expected", list(NORMAL_ORACLE.items()))
    def test_oracle_values(self, z, expected):
        assert normal_sf(z) == pytest.approx(expected, abs=1e-12)

    @given(st.floats(-8, 8))
    def test_reflection(self, z):
        assert normal_sf(z) + normal_sf(-z) == pytest.approx(1.0, abs=1e-12)
