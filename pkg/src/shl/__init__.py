"""Sample-homogeneity test battery and Monte-Carlo laboratory."""

from .rng import MasterSeed, RandomStream, make_stream
from .stats import (
    SignificanceSummary,
    TestResult,
    cantelli_confidence,
    chebyshev_confidence,
    chi2_sf,
    kolmogorov_sf,
    normal_sf,
    summarize,
)
from .homogeneity import (
    ContingencyTable,
    HomogeneityReport,
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
from .breakdown import (
    BreakdownConfig,
    BreakdownResult,
    ContextSpec,
    b_statistic,
    default_config,
    run_experiment,
)
from .eberhard import (
    EberhardConfig,
    JEstimate,
    SettingCounts,
    SettingProbabilities,
    enumerate_lhv_strategies,
    estimate,
    expected_j_per_pair,
    j_from_counts,
    lhv_expected_j,
    quantum_probabilities,
    simulate,
)
from .optimize import OptResult, nelder_mead, optimize_settings

__all__ = [name for name in dir() if not name.startswith("_")]
