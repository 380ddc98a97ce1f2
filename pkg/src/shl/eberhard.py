"""End-to-end simulation of a Giustina-style entangled-photon experiment.

A two-photon source in the state (|HV> + r|VH>)/sqrt(1+r^2) feeds two
polarization analyzers at settings (alpha_i, beta_j), i,j in {1,2}.  Each
photon is detected independently with efficiency eta, giving per-photon
outcomes o (ordinary channel), e (extraordinary) or u (undetected).  Per
setting and time bin we accumulate the nine joint counts; the Bell-type
statistic per bin is built from four coincidence counts and two singles
counts,

    J = nA_o(a1) + nB_o(b1) + n_oo(a2,b2)
        - n_oo(a1,b1) - n_oo(a1,b2) - n_oo(a2,b1),

which is non-negative in expectation under any local-hidden-variable
model (CH form of the Eberhard inequality).  The binned J values then go
through the same SEM-based significance machinery the homogeneity audit
scrutinizes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import InconsistentCountsError, InsufficientSampleError
from .rng import MasterSeed, make_stream
from .stats import (
    SignificanceSummary,
    cantelli_confidence,
    chebyshev_confidence,
    summarize,
)

SETTINGS: Tuple[Tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))
OUTCOMES = ("o", "e", "u")

# stream_id convention: setting_index * STREAM_STRIDE + bin_index, with
# setting_index the position of (i, j) in SETTINGS.  Keep stable: golden
# files depend on it.
STREAM_STRIDE = 10**6


@dataclass(frozen=True)
class EberhardConfig:
    """Model parameters: entanglement ratio r, analyzer angles (radians),
    detection efficiency eta, and the binning of the pair budget."""

    r: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    eta: float
    pairs_per_setting: int
    bins: int = 30

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError("r must be in (0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if self.bins < 1:
            raise ValueError("bins must be positive")
        if self.pairs_per_setting % self.bins != 0:
            raise ValueError("pairs_per_setting must be divisible by bins")

    def angles(self, setting: Tuple[int, int]) -> Tuple[float, float]:
        i, j = setting
        return (
            self.alpha1 if i == 1 else self.alpha2,
            self.beta1 if j == 1 else self.beta2,
        )


@dataclass(frozen=True)
class SettingProbabilities:
    """3x3 outcome law for one (alpha, beta): rows Alice, cols Bob, order
    (o, e, u)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (3, 3) or np.any(p < 0):
            raise ValueError("need a non-negative 3x3 matrix")
        if abs(p.sum() - 1.0) >= 1e-12:
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "p", p)


@dataclass
class SettingCounts:
    setting: Tuple[int, int]
    bin: int
    n_oo: int
    n_oe: int
    n_eo: int
    n_ee: int
    n_ou: int
    n_uo: int
    n_eu: int
    n_ue: int
    n_uu: int
    nA_o: int
    nB_o: int
    trials: int

    def __post_init__(self):
        joint = (
            self.n_oo + self.n_oe + self.n_eo + self.n_ee
            + self.n_ou + self.n_uo + self.n_eu + self.n_ue + self.n_uu
        )
        if joint != self.trials:
            raise InconsistentCountsError(
                f"joint counts sum to {joint}, trials = {self.trials}"
            )
        if self.nA_o != self.n_oo + self.n_oe + self.n_ou:
            raise InconsistentCountsError("nA_o does not match its marginal")
        if self.nB_o != self.n_oo + self.n_eo + self.n_uo:
            raise InconsistentCountsError("nB_o does not match its marginal")


@dataclass
class JEstimate:
    per_bin_j: List[float]
    summary: SignificanceSummary
    chebyshev_conf: float
    cantelli_conf: float


def quantum_probabilities(
    cfg: EberhardConfig, setting: Tuple[int, int]
) -> SettingProbabilities:
    """Outcome law for one setting under the entangled-state model with
    independent detection at efficiency eta."""
    alpha, beta = cfg.angles(setting)
    r = cfg.r
    norm = 1.0 + r * r
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    # Channel amplitudes from |psi> = (|HV> + r|VH>)/sqrt(1+r^2).
    q_oo = (ca * sb + r * sa * cb) ** 2 / norm
    q_oe = (ca * cb - r * sa * sb) ** 2 / norm
    q_eo = (-sa * sb + r * ca * cb) ** 2 / norm
    q_ee = (sa * cb + r * ca * sb) ** 2 / norm
    eta = cfg.eta
    e2 = eta * eta
    eu = eta * (1.0 - eta)
    p = np.array(
        [
            [e2 * q_oo, e2 * q_oe, eu * (q_oo + q_oe)],
            [e2 * q_eo, e2 * q_ee, eu * (q_eo + q_ee)],
            [eu * (q_oo + q_eo), eu * (q_oe + q_ee), (1.0 - eta) ** 2],
        ]
    )
    return SettingProbabilities(p)


def singles_prob_alice(cfg: EberhardConfig, alpha: float) -> float:
    """P(Alice clicks 'o' at angle alpha), marginal over Bob."""
    r2 = cfg.r * cfg.r
    return cfg.eta * (math.cos(alpha) ** 2 + r2 * math.sin(alpha) ** 2) / (1.0 + r2)


def singles_prob_bob(cfg: EberhardConfig, beta: float) -> float:
    r2 = cfg.r * cfg.r
    return cfg.eta * (math.sin(beta) ** 2 + r2 * math.cos(beta) ** 2) / (1.0 + r2)


def expected_j_per_pair(cfg: EberhardConfig) -> float:
    """Expectation of J per emitted pair under the quantum model; negative
    values are the model's violation of the local-realist bound J >= 0."""
    p_oo = {s: quantum_probabilities(cfg, s).p[0, 0] for s in SETTINGS}
    return (
        singles_prob_alice(cfg, cfg.alpha1)
        + singles_prob_bob(cfg, cfg.beta1)
        + p_oo[(2, 2)]
        - p_oo[(1, 1)]
        - p_oo[(1, 2)]
        - p_oo[(2, 1)]
    )


def lhv_expected_j(
    strategy_a: Dict[int, str], strategy_b: Dict[int, str]
) -> float:
    """Per-pair J for one deterministic local strategy (maps from setting
    index 1/2 to an outcome in {o, e, u})."""
    a1, a2 = strategy_a[1], strategy_a[2]
    b1, b2 = strategy_b[1], strategy_b[2]
    return float(
        (a1 == "o")
        + (b1 == "o")
        + (a2 == "o" and b2 == "o")
        - (a1 == "o" and b1 == "o")
        - (a1 == "o" and b2 == "o")
        - (a2 == "o" and b1 == "o")
    )


def enumerate_lhv_strategies() -> List[float]:
    """J values of all 81 deterministic local strategies."""
    values = []
    for a1 in OUTCOMES:
        for a2 in OUTCOMES:
            for b1 in OUTCOMES:
                for b2 in OUTCOMES:
                    values.append(
                        lhv_expected_j({1: a1, 2: a2}, {1: b1, 2: b2})
                    )
    return values


def _simulate_cell(
    cfg: EberhardConfig, seed: MasterSeed, s_idx: int, bin_idx: int
) -> SettingCounts:
    setting = SETTINGS[s_idx]
    probs = quantum_probabilities(cfg, setting).p.ravel()
    trials = cfg.pairs_per_setting // cfg.bins
    stream = make_stream(seed, s_idx * STREAM_STRIDE + bin_idx)
    draws = stream.sample_categoricals(trials, probs)
    c = np.bincount(draws, minlength=9)
    # ravel order: oo, oe, ou, eo, ee, eu, uo, ue, uu
    return SettingCounts(
        setting=setting,
        bin=bin_idx,
        n_oo=int(c[0]), n_oe=int(c[1]), n_ou=int(c[2]),
        n_eo=int(c[3]), n_ee=int(c[4]), n_eu=int(c[5]),
        n_uo=int(c[6]), n_ue=int(c[7]), n_uu=int(c[8]),
        nA_o=int(c[0] + c[1] + c[2]),
        nB_o=int(c[0] + c[3] + c[6]),
        trials=trials,
    )


def simulate(
    cfg: EberhardConfig, seed: MasterSeed, threads: int = 1
) -> List[SettingCounts]:
    """Draw per-(setting, bin) counts; each cell owns stream_id =
    setting_index * 1e6 + bin_index, so output is thread-count invariant."""
    cells = [(s, b) for s in range(len(SETTINGS)) for b in range(cfg.bins)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(
                pool.map(lambda sb: _simulate_cell(cfg, seed, *sb), cells)
            )
    return [_simulate_cell(cfg, seed, s, b) for s, b in cells]


def j_from_counts(counts: Sequence[SettingCounts]) -> float:
    """J for one bin from its four SettingCounts (equal trials required)."""
    by_setting = {c.setting: c for c in counts}
    if set(by_setting) != set(SETTINGS) or len(counts) != 4:
        raise InconsistentCountsError("need exactly one record per setting")
    trials = {c.trials for c in counts}
    if len(trials) != 1:
        raise InconsistentCountsError(f"unequal trials across settings: {trials}")
    c11 = by_setting[(1, 1)]
    return float(
        c11.nA_o
        + c11.nB_o
        + by_setting[(2, 2)].n_oo
        - c11.n_oo
        - by_setting[(1, 2)].n_oo
        - by_setting[(2, 1)].n_oo
    )


def j_from_counts_rescaled(counts: Sequence[SettingCounts]) -> float:
    """J for one bin with unequal trials: per-trial rates rescaled by the
    minimum trials, so the value stays on the count scale."""
    by_setting = {c.setting: c for c in counts}
    if set(by_setting) != set(SETTINGS) or len(counts) != 4:
        raise InconsistentCountsError("need exactly one record per setting")
    scale = min(c.trials for c in counts)
    c11 = by_setting[(1, 1)]
    return scale * (
        (c11.nA_o + c11.nB_o - c11.n_oo) / c11.trials
        + by_setting[(2, 2)].n_oo / by_setting[(2, 2)].trials
        - by_setting[(1, 2)].n_oo / by_setting[(1, 2)].trials
        - by_setting[(2, 1)].n_oo / by_setting[(2, 1)].trials
    )


def estimate(
    counts: Sequence[SettingCounts], bins: int, rescale_unequal: bool = False
) -> JEstimate:
    """Per-bin J values, their SEM summary, and the distribution-free
    confidence bounds at the observed |k_sigma|."""
    by_bin: Dict[int, List[SettingCounts]] = {}
    for c in counts:
        by_bin.setdefault(c.bin, []).append(c)
    if sorted(by_bin) != list(range(bins)):
        raise InconsistentCountsError(
            f"expected bins 0..{bins - 1}, got {sorted(by_bin)}"
        )
    if rescale_unequal and any(
        len({c.trials for c in by_bin[b]}) > 1 for b in range(bins)
    ):
        per_bin_j = [j_from_counts_rescaled(by_bin[b]) for b in range(bins)]
    else:
        per_bin_j = [j_from_counts(by_bin[b]) for b in range(bins)]
    if bins < 2:
        raise InsufficientSampleError("need >= 2 bins to estimate a SEM")
    summary = summarize(per_bin_j)
    k = abs(summary.k_sigma)
    if summary.degenerate or k == 0.0 or math.isinf(k):
        cheb = cant = 0.0
    else:
        cheb = chebyshev_confidence(k)
        cant = cantelli_confidence(k)
    return JEstimate(per_bin_j, summary, cheb, cant)
