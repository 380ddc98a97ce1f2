import math

import numpy as np
import pytest

from shl.errors import (
    DegenerateSequenceError,
    DegenerateTableError,
    InsufficientSampleError,
)
from shl.homogeneity import (
    ContingencyTable,
    RunSample,
    RunSet,
    audit,
    chi2_homogeneity,
    cusum_changepoint,
    ks_two_sample,
    lag1_autocorr_test,
    runs_test,
    tabulate,
)
from shl.rng import MasterSeed, make_stream


def categorical_runset(rows, m):
    return RunSet(
        [RunSample(i + 1, row, "categorical") for i, row in enumerate(rows)], m=m
    )


class TestTabulate:
    def test_counting(self):
        t = tabulate(categorical_runset([[1, 1, 2], [2, 2, 1]], m=2))
        assert t.counts.tolist() == [[2, 1], [1, 2]]

    def test_single_run_rejected(self):
        with pytest.raises(InsufficientSampleError):
            tabulate(categorical_runset([[1, 2, 1]], m=2))

    def test_mixed_kinds_rejected(self):
        with pytest.raises(TypeError):
            RunSet(
                [
                    RunSample(1, [1, 2], "categorical"),
                    RunSample(2, [0.5, 0.7], "real"),
                ],
                m=2,
            )

    def test_row_sums_are_run_lengths(self):
        rs = categorical_runset([[1, 2, 3, 1], [3, 3, 3]], m=3)
        assert tabulate(rs).counts.sum(axis=1).tolist() == [4, 3]


class TestChi2Homogeneity:
    def test_identical_rows(self):
        res = chi2_homogeneity(ContingencyTable([[10, 10], [10, 10]]))
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_disjoint_rows(self):
        # E = 25 in every cell, so each contributes 25; statistic = 100
        res = chi2_homogeneity(ContingencyTable([[50, 0], [0, 50]]))
        assert res.statistic == pytest.approx(100.0)
        assert res.dof == 1
        assert res.p_value == pytest.approx(1.523970604832105e-23, rel=1e-6)

    def test_zero_columns_dropped(self):
        res = chi2_homogeneity(ContingencyTable([[10, 10, 0], [10, 10, 0]]))
        assert res.detail["dropped_columns"] == [2]
        assert res.dof == 1

    def test_degenerate_table(self):
        with pytest.raises(DegenerateTableError):
            chi2_homogeneity(ContingencyTable([[10, 0], [20, 0]]))

    def test_small_expected_cell_is_a_warning_not_error(self):
        res = chi2_homogeneity(ContingencyTable([[1, 9], [0, 10]]))
        assert "warning" in res.detail


class TestKsTwoSample:
    def test_identical_samples(self):
        res = ks_two_sample([1, 2, 3], [1, 2, 3])
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_disjoint_supports(self):
        assert ks_two_sample([1, 2, 3], [4, 5, 6]).statistic == 1.0

    def test_empty_input(self):
        with pytest.raises(InsufficientSampleError):
            ks_two_sample([], [1.0])

    def test_null_behavior(self):
        ok = 0
        for rep in range(100):
            s = make_stream(MasterSeed(rep), 0)
            res = ks_two_sample(s.uniforms(10_000), s.uniforms(10_000))
            ok += res.p_value > 0.001
        assert ok >= 99


class TestRunsTest:
    def test_alternating(self):
        x = [1, 2] * 50
        res = runs_test(x)
        assert res.statistic == 100
        assert res.detail["mu"] == pytest.approx(51.0)
        assert res.detail["z"] == pytest.approx(9.85, abs=0.01)
        assert res.p_value < 1e-20

    def test_constant_sequence(self):
        with pytest.raises(DegenerateSequenceError):
            runs_test([3.0] * 100)

    def test_too_short(self):
        with pytest.raises(InsufficientSampleError):
            runs_test([1, 2] * 5)

    def test_null_behavior(self):
        ok = 0
        for rep in range(100):
            x = make_stream(MasterSeed(rep), 1).uniforms(10_000)
            ok += runs_test(x).p_value > 0.001
        assert ok >= 99


class TestLag1Autocorr:
    def test_perfect_anticorrelation(self):
        x = [1.0, -1.0] * 50
        res = lag1_autocorr_test(x)
        assert res.statistic == pytest.approx(-1.0, abs=0.02)
        assert abs(res.detail["z"]) > 9
        assert res.p_value < 1e-20

    def test_inflation_factor_at_zero(self):
        assert math.sqrt((1 + 0) / (1 - 0)) == 1.0  # closed form sanity
        x = make_stream(MasterSeed(0), 2).uniforms(10_000)
        res = lag1_autocorr_test(x)
        assert res.detail["sem_inflation"] == pytest.approx(1.0, abs=0.1)

    def test_zero_variance(self):
        with pytest.raises(DegenerateSequenceError):
            lag1_autocorr_test([2.0] * 100)

    def test_null_r1_bound(self):
        ok = 0
        for rep in range(100):
            x = make_stream(MasterSeed(rep), 3).uniforms(10_000)
            ok += abs(lag1_autocorr_test(x).statistic) < 0.04
        assert ok >= 99


class TestCusum:
    def test_constant_sequence(self):
        with pytest.raises(DegenerateSequenceError):
            cusum_changepoint([1.0] * 100, 99, make_stream(MasterSeed(0), 0))

    def test_step_change(self):
        x = [0.0] * 500 + [1.0] * 500
        res = cusum_changepoint(x, 99, make_stream(MasterSeed(1), 0))
        assert abs(res.detail["changepoint"] - 500) <= 2
        assert res.p_value == pytest.approx(1 / 100)

    def test_p_values_on_exact_grid(self):
        for rep in range(20):
            s = make_stream(MasterSeed(rep), 5)
            res = cusum_changepoint(s.uniforms(100), 99, s)
            assert round(res.p_value * 100) == pytest.approx(res.p_value * 100)
            assert 1 / 100 <= res.p_value <= 1.0

    def test_null_behavior(self):
        ok = 0
        for rep in range(100):
            s = make_stream(MasterSeed(rep), 6)
            ok += cusum_changepoint(s.uniforms(200), 99, s).p_value > 0.001
        assert ok >= 99


class TestAudit:
    def test_single_run_rejected(self):
        rs = categorical_runset([[1, 2, 3]], m=3)
        with pytest.raises(InsufficientSampleError):
            audit(rs, 0.01, make_stream(MasterSeed(0), 0))

    def test_bad_alpha(self):
        rs = categorical_runset([[1, 2], [2, 1]], m=2)
        with pytest.raises(ValueError):
            audit(rs, 1.5, make_stream(MasterSeed(0), 0))

    def test_homogeneous_control(self):
        ok = 0
        for rep in range(40):
            runs = [
                RunSample(
                    k + 1,
                    make_stream(MasterSeed(rep), k).sample_categoricals(
                        2000, [0.1, 0.2, 0.3, 0.2, 0.1, 0.1]
                    )
                    + 1,
                )
                for k in range(10)
            ]
            rep_ = audit(
                RunSet(runs, m=6), 0.01, make_stream(MasterSeed(rep), 1000)
            )
            ok += rep_.verdict == "HOMOGENEOUS"
        assert ok >= 37

    def test_shifted_runs_detected(self):
        runs = [
            RunSample(
                k + 1,
                make_stream(MasterSeed(3), k).sample_categoricals(
                    2000, [0.5, 0.5] if k < 5 else [0.2, 0.8]
                )
                + 1,
            )
            for k in range(10)
        ]
        rep = audit(RunSet(runs, m=2), 0.01, make_stream(MasterSeed(3), 1000))
        assert rep.verdict == "INHOMOGENEOUS"

    def test_real_valued_runset_uses_ks(self):
        runs = [
            RunSample(k + 1, make_stream(MasterSeed(5), k).uniforms(200), "real")
            for k in range(4)
        ]
        rep = audit(RunSet(runs), 0.05, make_stream(MasterSeed(5), 1000))
        names = [r.name for r in rep.results]
        assert sum(n.startswith("ks_run_") for n in names) == 4

    def test_verdict_pure_function_of_pvalues(self):
        rs = categorical_runset([[1, 2] * 50, [2, 1] * 50], m=2)
        a = audit(rs, 0.01, make_stream(MasterSeed(7), 0))
        b = audit(rs, 0.01, make_stream(MasterSeed(7), 0))
        assert a.verdict == b.verdict
        assert [r.p_value for r in a.results] == [r.p_value for r in b.results]

    def test_error_propagates_to_inconclusive(self):
        # constant runs: every sequence test degenerates
        rs = categorical_runset([[1] * 60, [1] * 60], m=2)
        rep = audit(rs, 0.01, make_stream(MasterSeed(0), 0))
        assert rep.verdict == "INCONCLUSIVE"
        assert rep.errors


def test_chi2_pvalue_monotone_under_contamination():
    """Adding a run from a shifted distribution should not raise the
    chi-square p-value on average."""
    base_w = [0.25, 0.25, 0.25, 0.25]
    shift_w = [0.4, 0.1, 0.25, 0.25]
    deltas = []
    for rep in range(30):
        runs = [
            RunSample(
                k + 1,
                make_stream(MasterSeed(rep), k).sample_categoricals(1000, base_w) + 1,
            )
            for k in range(5)
        ]
        p0 = chi2_homogeneity(tabulate(RunSet(runs, m=4))).p_value
        extra = RunSample(
            6, make_stream(MasterSeed(rep), 99).sample_categoricals(1000, shift_w) + 1
        )
        p1 = chi2_homogeneity(tabulate(RunSet(runs + [extra], m=4))).p_value
        deltas.append(p1 - p0)
    assert np.mean(deltas) < 0
