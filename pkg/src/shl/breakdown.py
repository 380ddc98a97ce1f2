"""Six-outcome device demonstrating how pooling inhomogeneous runs breaks
SEM-based significance testing.

The device emits one of six outcomes per trial, each run operating in one
of several contexts (fixed outcome distributions).  The test statistic is
B, the run mean of a weight function f over the outcomes, with the null
hypothesis 1 - B >= 0.  With the default schedule, each high-context run
violates the null by thousands of SEM and each low-context run satisfies
it by the same margin, yet the pooled sample sits within a few SEM of the
boundary: a pooled significance test is meaningless without a
homogeneity audit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import InsufficientSampleError
from .homogeneity import RunSample, RunSet
from .rng import MasterSeed, make_stream
from .stats import SignificanceSummary, summarize

N_OUTCOMES = 6


@dataclass(frozen=True)
class ContextSpec:
    """One internal device context: a fixed distribution over the six
    outcomes."""

    label: str
    probs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != N_OUTCOMES:
            raise ValueError("context needs exactly 6 probabilities")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        if abs(sum(self.probs) - 1.0) >= 1e-12:
            raise ValueError("probabilities must sum to 1")


@dataclass(frozen=True)
class BreakdownConfig:
    f: Tuple[float, ...]
    contexts: Tuple[ContextSpec, ...]
    schedule: Tuple[str, ...]
    runs: int
    items_per_run: int

    def __post_init__(self):
        if len(self.f) != N_OUTCOMES:
            raise ValueError("f needs exactly 6 values")
        if len(self.schedule) != self.runs:
            raise ValueError("schedule length must equal runs")
        labels = {c.label for c in self.contexts}
        missing = set(self.schedule) - labels
        if missing:
            raise ValueError(f"schedule labels without context: {sorted(missing)}")
        if self.runs < 1 or self.items_per_run < 1:
            raise ValueError("runs and items_per_run must be positive")

    def context_for(self, label: str) -> ContextSpec:
        return next(c for c in self.contexts if c.label == label)


@dataclass
class PerRunResult:
    run_id: int
    summary: SignificanceSummary  # of the 1 - f(x) values
    one_minus_b: float
    k_sigma: float


@dataclass
class BreakdownResult:
    per_run: List[PerRunResult]
    pooled: SignificanceSummary
    runset: RunSet


def default_config() -> BreakdownConfig:
    """100 runs x 1e5 items alternating between a high and a low context.

    f spans 0.86..1.21 in steps of 0.07; context H concentrates on f = 1.07
    (within-run sd ~ 0.0099, so each H run violates 1 - B >= 0 by roughly
    2236 SEM) and context L mirrors it on f = 0.93.  Runs are H on odd
    indices and L on even ones, except that runs 49 and 50 are swapped so
    that runs 25, 50 and 75 are all H while the 50/50 balance is kept.
    """
    f = (0.86, 0.93, 1.00, 1.07, 1.14, 1.21)
    high = ContextSpec("H", (0.0, 0.0, 0.01, 0.98, 0.01, 0.0))
    low = ContextSpec("L", (0.01, 0.98, 0.01, 0.0, 0.0, 0.0))
    schedule = ["H" if r % 2 == 1 else "L" for r in range(1, 101)]
    schedule[48], schedule[49] = schedule[49], schedule[48]  # runs 49 <-> 50
    return BreakdownConfig(f, (high, low), tuple(schedule), 100, 100_000)


def b_statistic(f: Sequence[float], outcomes) -> float:
    """Mean of f over a categorical run (outcomes in 1..6)."""
    x = np.asarray(outcomes, dtype=np.int64)
    if x.size == 0:
        raise InsufficientSampleError("empty run")
    if x.min() < 1 or x.max() > N_OUTCOMES:
        raise ValueError("outcomes must lie in 1..6")
    return float(np.asarray(f, dtype=np.float64)[x - 1].mean())


def _simulate_run(cfg: BreakdownConfig, seed: MasterSeed, run_id: int):
    probs = cfg.context_for(cfg.schedule[run_id - 1]).probs
    stream = make_stream(seed, run_id)  # stream_id = run index
    outcomes = stream.sample_categoricals(cfg.items_per_run, probs) + 1
    return outcomes


def run_experiment(
    cfg: BreakdownConfig, seed: MasterSeed, threads: int = 1
) -> BreakdownResult:
    """Simulate all runs and evaluate the per-run and pooled significance
    of the null 1 - B >= 0.

    Each run draws from its own stream (stream_id = run index), so the
    result is identical for any thread count.
    """
    run_ids = list(range(1, cfg.runs + 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_outcomes = list(
                pool.map(lambda r: _simulate_run(cfg, seed, r), run_ids)
            )
    else:
        all_outcomes = [_simulate_run(cfg, seed, r) for r in run_ids]

    f = np.asarray(cfg.f, dtype=np.float64)
    per_run = []
    for run_id, outcomes in zip(run_ids, all_outcomes):
        y = 1.0 - f[outcomes - 1]
        summary = summarize(y)
        per_run.append(PerRunResult(run_id, summary, summary.mean, summary.k_sigma))
    pooled = summarize(1.0 - f[np.concatenate(all_outcomes) - 1])
    runset = RunSet(
        [RunSample(r, o, "categorical") for r, o in zip(run_ids, all_outcomes)],
        m=N_OUTCOMES,
    )
    return BreakdownResult(per_run, pooled, runset)
