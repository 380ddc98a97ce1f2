"""Derivative-free minimization of the expected per-pair J statistic over
analyzer angles and the entanglement ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from .eberhard import EberhardConfig, expected_j_per_pair
from .rng import MasterSeed, make_stream

R_MIN = 0.01  # keep r away from the product-state plateau at 0

# reflection, expansion, contraction, shrink
_ALPHA, _GAMMA, _RHO, _SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass
class OptResult:
    x: np.ndarray
    f: float
    iterations: int
    converged: bool


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 2000,
    initial_step: float = 0.1,
) -> OptResult:
    """Standard Nelder-Mead simplex minimization.

    Converges when the f-spread over the simplex drops below tol; hitting
    max_iter first returns converged=False with the best vertex so far.
    The returned vertex is never worse than objective(x0).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty vector")
    if tol <= 0:
        raise ValueError("tol must be positive")
    dim = x0.size
    simplex = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        v[i] += initial_step if x0[i] == 0 else initial_step * abs(x0[i]) + 1e-8
        simplex.append(v)
    fvals = [objective(v) for v in simplex]

    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        order = np.argsort(fvals)
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        if fvals[-1] - fvals[0] < tol:
            converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + _ALPHA * (centroid - simplex[-1])
        f_r = objective(reflected)
        if fvals[0] <= f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[0]:
            expanded = centroid + _GAMMA * (reflected - centroid)
            f_e = objective(expanded)
            if f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        else:
            contracted = centroid + _RHO * (simplex[-1] - centroid)
            f_c = objective(contracted)
            if f_c < fvals[-1]:
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                best = simplex[0]
                simplex = [best] + [
                    best + _SIGMA * (v - best) for v in simplex[1:]
                ]
                fvals = [fvals[0]] + [objective(v) for v in simplex[1:]]

    best = int(np.argmin(fvals))
    return OptResult(simplex[best], float(fvals[best]), iterations, converged)


def _j_objective(eta: float) -> Callable[[np.ndarray], float]:
    def objective(v: np.ndarray) -> float:
        a1, a2, b1, b2, r = v
        r = min(max(float(r), R_MIN), 1.0)
        cfg = EberhardConfig(
            r=r, alpha1=a1, alpha2=a2, beta1=b1, beta2=b2,
            eta=eta, pairs_per_setting=1, bins=1,
        )
        return expected_j_per_pair(cfg)

    return objective


def optimize_settings(
    eta: float, multistart: int, seed: MasterSeed
) -> OptResult:
    """Minimize expected per-pair J over (alpha1, alpha2, beta1, beta2, r)
    at fixed detection efficiency.

    Uses a few deterministic starts (the known maximally-entangled optimum
    pattern at several r values) plus seeded random restarts, then polishes
    the best candidate.  Output angles are reduced to [0, pi) (the
    objective has period pi in every angle) and r is clamped to
    (R_MIN, 1].
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    if multistart < 1:
        raise ValueError("multistart must be >= 1")
    objective = _j_objective(eta)

    d = math.pi / 16.0  # 11.25 degrees
    fixed_starts: List[np.ndarray] = [
        np.array([5 * d, d, 5 * d, d, r0]) for r0 in (0.05, 0.2, 0.5, 1.0)
    ]
    starts = fixed_starts[: max(0, multistart)]
    n_random = multistart - len(starts)
    for k in range(n_random):
        stream = make_stream(seed, k)
        u = stream.uniforms(5)
        starts.append(
            np.array(
                [
                    u[0] * math.pi,
                    u[1] * math.pi,
                    u[2] * math.pi,
                    u[3] * math.pi,
                    R_MIN + u[4] * (1.0 - R_MIN),
                ]
            )
        )

    best: OptResult | None = None
    total_iter = 0
    for x0 in starts:
        res = nelder_mead(objective, x0, tol=1e-14, max_iter=4000,
                          initial_step=0.1)
        total_iter += res.iterations
        if best is None or res.f < best.f:
            best = res
    assert best is not None

    polish = nelder_mead(objective, best.x, tol=1e-15, max_iter=4000,
                         initial_step=0.01)
    total_iter += polish.iterations
    if polish.f < best.f:
        best = polish

    x = best.x.copy()
    x[:4] = np.mod(x[:4], math.pi)
    x[4] = min(max(x[4], R_MIN), 1.0)
    f = objective(x)
    return OptResult(x, f, total_iter, best.converged)
