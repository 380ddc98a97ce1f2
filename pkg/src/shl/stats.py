"""Descriptive statistics, distribution-free confidence bounds, and the
special functions the test battery needs.

Special functions are implemented in-repo (series / continued fraction)
so results are bit-stable across platforms.  Error budgets: chi2_sf
absolute error < 1e-10, normal_sf < 1e-12, kolmogorov_sf series truncated
below 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientSampleError

_EPS = 1e-16
_MAX_ITER = 10_000


@dataclass(frozen=True)
class SignificanceSummary:
    """Mean, sample standard deviation (n-1 divisor), SEM = s/sqrt(n),
    and the signed k_sigma = mean/SEM.

    A constant sample has s = 0; then `degenerate` is set and k_sigma is
    signed infinity (0.0 for a zero mean).
    """

    n: int
    mean: float
    s: float
    sem: float
    k_sigma: float
    degenerate: bool = False


@dataclass
class TestResult:
    """Carrier for any significance test: statistic, p-value, optional
    degrees of freedom, and free-form annotations in `detail`."""

    name: str
    statistic: float
    p_value: float
    dof: Optional[int] = None
    detail: dict = field(default_factory=dict)


def summarize(sample) -> SignificanceSummary:
    """Mean, s, SEM and signed k-sigma of a real sample (length >= 2)."""
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    if n < 2:
        raise InsufficientSampleError(f"need at least 2 values, got {n}")
    mean = float(x.mean())
    s = float(math.sqrt(float(np.sum((x - mean) ** 2)) / (n - 1)))
    sem = s / math.sqrt(n)
    if s == 0.0:
        k = math.copysign(math.inf, mean) if mean != 0.0 else 0.0
        return SignificanceSummary(n, mean, 0.0, 0.0, k, degenerate=True)
    return SignificanceSummary(n, mean, s, sem, mean / sem)


def chebyshev_confidence(k: float) -> float:
    """Two-sided Chebyshev lower bound on confidence at a k-SEM deviation."""
    if k <= 0:
        raise ValueError("k must be positive")
    return max(0.0, 1.0 - 1.0 / (k * k))


def cantelli_confidence(k: float) -> float:
    """One-sided Cantelli bound, 1 - 1/(1+k^2)."""
    if k <= 0:
        raise ValueError("k must be positive")
    return 1.0 - 1.0 / (1.0 + k * k)


def _gamma_p_series(a: float, x: float) -> float:
    # Lower regularized incomplete gamma by power series; valid x < a+1.
    term = 1.0 / a
    total = term
    for n in range(1, _MAX_ITER):
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    log_pref = -x + a * math.log(x) - math.lgamma(a)
    return total * math.exp(log_pref)


def _gamma_q_cf(a: float, x: float) -> float:
    # Upper regularized incomplete gamma by Lentz continued fraction;
    # valid x >= a+1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_pref = -x + a * math.log(x) - math.lgamma(a)
    if log_pref < -745.0:  # exp underflows; tail is numerically zero
        return 0.0
    return math.exp(log_pref) * h


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-square distribution with `dof` degrees of
    freedom, via the regularized incomplete gamma function."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if dof < 1:
        raise ValueError("dof must be a positive integer")
    a = dof / 2.0
    half = x / 2.0
    if half == 0.0:
        return 1.0
    if half < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, half)))
    return min(1.0, max(0.0, _gamma_q_cf(a, half)))


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function
    Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2),
    truncated when terms fall below 1e-12 and clamped to [0, 1]."""
    if lam <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, _MAX_ITER):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def normal_sf(z: float) -> float:
    """Standard normal upper tail, 1 - Phi(z), via erfc."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))
