"""Sample-homogeneity test battery.

Two things can silently invalidate a pooled significance test: the runs
were not identically distributed (checked here by the chi-square
homogeneity test for categorical data and two-sample KS for real data),
or the trials within the pooled sequence were not independent (checked
by the Wald-Wolfowitz runs test and the lag-1 autocorrelation test).  A
CUSUM change-point scan with a permutation p-value covers mean drift
within a run.  `audit` runs the whole battery with a Bonferroni
correction and aggregates a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np

from .errors import (
    DegenerateSequenceError,
    DegenerateTableError,
    InsufficientSampleError,
    ShlError,
)
from .rng import RandomStream
from .stats import TestResult, chi2_sf, kolmogorov_sf, normal_sf

Verdict = Literal["HOMOGENEOUS", "INHOMOGENEOUS", "INCONCLUSIVE"]


@dataclass
class RunSample:
    """Outcome sequence of one run: categorical indices 1..m, or reals."""

    run_id: int
    outcomes: np.ndarray
    kind: Literal["categorical", "real"] = "categorical"

    def __post_init__(self):
        self.outcomes = np.asarray(
            self.outcomes,
            dtype=np.int64 if self.kind == "categorical" else np.float64,
        )
        if self.outcomes.size == 0:
            raise ValueError(f"run {self.run_id}: empty outcome sequence")


@dataclass
class RunSet:
    """Ordered collection of runs of the same kind; `m` is the number of
    categories in the categorical case."""

    runs: List[RunSample]
    m: Optional[int] = None

    def __post_init__(self):
        kinds = {r.kind for r in self.runs}
        if len(kinds) > 1:
            raise TypeError("mixed categorical/real runs in one RunSet")
        if self.kind == "categorical":
            if self.m is None:
                raise ValueError("categorical RunSet requires m")
            for r in self.runs:
                if r.outcomes.min() < 1 or r.outcomes.max() > self.m:
                    raise ValueError(f"run {r.run_id}: outcomes outside 1..{self.m}")

    @property
    def kind(self) -> str:
        return self.runs[0].kind if self.runs else "categorical"

    def concatenated(self) -> np.ndarray:
        return np.concatenate([r.outcomes.astype(np.float64) for r in self.runs])


@dataclass
class ContingencyTable:
    """Rows = runs, columns = outcome categories."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts < 0):
            raise ValueError("negative cell count")


@dataclass
class HomogeneityReport:
    results: List[TestResult]
    alpha: float
    corrected_alpha: float
    verdict: Verdict
    errors: dict = field(default_factory=dict)


def tabulate(rs: RunSet) -> ContingencyTable:
    """Count outcomes per run; requires a categorical RunSet with >= 2 runs."""
    if rs.kind != "categorical":
        raise TypeError("tabulate requires a categorical RunSet")
    if len(rs.runs) < 2:
        raise InsufficientSampleError("homogeneity tabulation needs >= 2 runs")
    counts = np.stack(
        [np.bincount(r.outcomes, minlength=rs.m + 1)[1:] for r in rs.runs]
    )
    return ContingencyTable(counts)


def chi2_homogeneity(t: ContingencyTable) -> TestResult:
    """Pearson chi-square test that all rows share one distribution.

    Columns with zero total are dropped first; at least two rows and two
    surviving columns are required.  A min expected cell below 1 is
    recorded as a warning in detail, not an error.
    """
    counts = t.counts
    if counts.shape[0] < 2:
        raise DegenerateTableError("need >= 2 rows")
    col_tot = counts.sum(axis=0)
    keep = col_tot > 0
    dropped = [int(i) for i in np.nonzero(~keep)[0]]
    counts = counts[:, keep]
    if counts.shape[1] < 2:
        raise DegenerateTableError("fewer than 2 surviving columns")
    row_tot = counts.sum(axis=1)
    if np.any(row_tot == 0):
        raise DegenerateTableError("empty row")
    total = counts.sum()
    expected = np.outer(row_tot, counts.sum(axis=0)) / total
    stat = float(np.sum((counts - expected) ** 2 / expected))
    dof = (counts.shape[0] - 1) * (counts.shape[1] - 1)
    detail = {
        "dropped_columns": dropped,
        "min_expected_cell": float(expected.min()),
    }
    if expected.min() < 1.0:
        detail["warning"] = "min expected cell below 1; asymptotics unreliable"
    return TestResult("chi2_homogeneity", stat, chi2_sf(stat, dof), dof, detail)


def ks_two_sample(x, y) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    if x.size == 0 or y.size == 0:
        raise InsufficientSampleError("both samples must be non-empty")
    support = np.concatenate([x, y])
    support.sort()
    cdf_x = np.searchsorted(x, support, side="right") / x.size
    cdf_y = np.searchsorted(y, support, side="right") / y.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    ne = math.sqrt(x.size * y.size / (x.size + y.size))
    return TestResult(
        "ks_two_sample", d, kolmogorov_sf(d * ne),
        detail={"n_x": int(x.size), "n_y": int(y.size)},
    )


def runs_test(x) -> TestResult:
    """Wald-Wolfowitz runs test for independence.

    Values are dichotomized strictly above/below the median; exact-median
    ties are discarded.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 20:
        raise InsufficientSampleError("runs test needs length >= 20")
    med = float(np.median(x))
    signs = x[x != med] > med
    n1 = int(signs.sum())
    n2 = int(signs.size - n1)
    if n1 == 0 or n2 == 0:
        raise DegenerateSequenceError("one dichotomized group is empty")
    r = int(1 + np.count_nonzero(signs[1:] != signs[:-1]))
    n = n1 + n2
    mu = 2.0 * n1 * n2 / n + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0))
    z = (r - mu) / math.sqrt(var)
    return TestResult(
        "runs_test", float(r), min(1.0, 2.0 * normal_sf(abs(z))),
        detail={"z": z, "n_above": n1, "n_below": n2, "mu": mu},
    )


def lag1_autocorr_test(x) -> TestResult:
    """Lag-1 autocorrelation test; detail carries the factor by which
    positive serial correlation would inflate the SEM."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 30:
        raise InsufficientSampleError("lag-1 test needs length >= 30")
    dev = x - x.mean()
    denom = float(np.sum(dev * dev))
    if denom == 0.0:
        raise DegenerateSequenceError("zero variance")
    r1 = float(np.sum(dev[:-1] * dev[1:]) / denom)
    z = r1 * math.sqrt(n)
    if r1 >= 1.0:
        inflation = math.inf
    elif r1 <= -1.0:
        inflation = 0.0
    else:
        inflation = math.sqrt((1.0 + r1) / (1.0 - r1))
    return TestResult(
        "lag1_autocorr", r1, min(1.0, 2.0 * normal_sf(abs(z))),
        detail={"z": z, "sem_inflation": inflation},
    )


def _cusum_stat(dev: np.ndarray) -> tuple[float, int]:
    s = np.cumsum(dev)
    i = int(np.argmax(np.abs(s)))
    return float(abs(s[i])), i + 1


def cusum_changepoint(x, n_perm: int, stream: RandomStream) -> TestResult:
    """Maximum-|CUSUM| change-point test with a permutation p-value,
    exact under exchangeability.  p-values lie in {1/(n_perm+1), ..., 1}."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 50:
        raise InsufficientSampleError("cusum test needs length >= 50")
    if n_perm < 99:
        raise ValueError("n_perm must be >= 99")
    dev = x - x.mean()
    if np.all(dev == 0.0):
        raise DegenerateSequenceError("zero variance")
    stat, k_hat = _cusum_stat(dev)
    exceed = 0
    for _ in range(n_perm):
        perm_stat, _ = _cusum_stat(dev[stream.permutation(n)])
        if perm_stat >= stat:
            exceed += 1
    p = (exceed + 1) / (n_perm + 1)
    return TestResult(
        "cusum_changepoint", stat, p,
        detail={"changepoint": k_hat, "n_perm": n_perm},
    )


def audit(
    rs: RunSet, alpha: float, stream: RandomStream, n_perm: int = 99
) -> HomogeneityReport:
    """Run the full battery and aggregate a verdict.

    Identical-distribution checks: chi-square homogeneity across runs
    (categorical) or per-run KS against the pooled sample (real-valued).
    Independence checks on the concatenated sequence: runs test, lag-1
    autocorrelation, CUSUM change point.  The family is Bonferroni
    corrected; any per-test error yields INCONCLUSIVE unless another
    test already established inhomogeneity.
    """
    if len(rs.runs) < 2:
        raise InsufficientSampleError("audit needs >= 2 runs")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")

    jobs = []
    if rs.kind == "categorical":
        jobs.append(("chi2_homogeneity", lambda: chi2_homogeneity(tabulate(rs))))
    else:
        pooled = rs.concatenated()
        for r in rs.runs:
            jobs.append(
                (
                    f"ks_run_{r.run_id}_vs_pooled",
                    lambda r=r: _renamed(
                        ks_two_sample(r.outcomes, pooled),
                        f"ks_run_{r.run_id}_vs_pooled",
                    ),
                )
            )
    concat = rs.concatenated()
    jobs.append(("runs_test", lambda: runs_test(concat)))
    jobs.append(("lag1_autocorr", lambda: lag1_autocorr_test(concat)))
    jobs.append(
        ("cusum_changepoint", lambda: cusum_changepoint(concat, n_perm, stream))
    )

    results: List[TestResult] = []
    errors: dict = {}
    for name, job in jobs:
        try:
            results.append(job())
        except ShlError as exc:
            errors[name] = str(exc)

    corrected = alpha / len(jobs)
    if any(res.p_value < corrected for res in results):
        verdict: Verdict = "INHOMOGENEOUS"
    elif errors:
        verdict = "INCONCLUSIVE"
    else:
        verdict = "HOMOGENEOUS"
    return HomogeneityReport(results, alpha, corrected, verdict, errors)


def _renamed(res: TestResult, name: str) -> TestResult:
    res.name = name
    return res
