"""Upper-confidence-bound acquisition and its inner optimizer.

The acquisition is evaluated at the highest fidelity,

    a(x) = mu_T(x) + sqrt(beta) * sigma_T(x),

with one fixed set of base propagation draws shared by every candidate
(common random numbers), so a(x) is a continuous deterministic function of
x during a solve. The inner optimizer scores a scrambled quasi-random
candidate pool and refines the best few candidates with a derivative-free
pattern search in normalized coordinates.
"""

from __future__ import annotations

import numpy as np

from . import dgp
from .space import DesignSpace
from .streams import ACQUISITION, substream

# Pattern-search refinement runs in normalized [0, 1]^d coordinates from
# this initial step down to the convergence tolerance.
_REFINE_STEP0 = 0.1
_REFINE_TOL = 1e-6


def acquisition_base_draws(
    num_levels: int, num_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Standard-normal base draws, one row per propagated level."""
    return rng.standard_normal((max(num_levels - 1, 1), num_samples))


def ucb_values(model: dgp.MFDeepGP, X, beta: float, base_draws: np.ndarray) -> np.ndarray:
    """a(x) = mu_T + sqrt(beta) * sigma_T at each row of X, shared draws."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    mean, sigma = dgp.predict_level_many(
        model, X, model.num_levels, base_draws=base_draws
    )
    return mean + np.sqrt(beta) * sigma


def _pattern_search(score, u0: np.ndarray, best0: float) -> tuple[np.ndarray, float]:
    """Coordinate pattern search on [0, 1]^d; score takes a batch of rows."""
    u = u0.copy()
    best = best0
    step = _REFINE_STEP0
    d = u.shape[0]
    while step >= _REFINE_TOL:
        trials = []
        for j in range(d):
            for sign in (1.0, -1.0):
                cand = u.copy()
                cand[j] = min(1.0, max(0.0, cand[j] + sign * step))
                trials.append(cand)
        trials = np.asarray(trials)
        values = score(trials)
        k = int(np.argmax(values))
        if values[k] > best:
            u = trials[k]
            best = float(values[k])
        else:
            step *= 0.5
    return u, best


def solve_ucb(
    model: dgp.MFDeepGP,
    space: DesignSpace,
    config,
    rng_seed: int,
    base_draws: np.ndarray | None = None,
) -> np.ndarray:
    """Maximize the highest-fidelity UCB over the design box.

    Scores ``config.candidate_pool_size`` scrambled Sobol candidates, then
    pattern-searches from the top ``config.acquisition_restarts`` of them.
    Always returns the best point seen, inside the box.
    """
    if base_draws is None:
        draw_rng = substream(rng_seed, ACQUISITION, "draws")
        base_draws = acquisition_base_draws(
            model.num_levels, dgp.ACQUISITION_SAMPLES, draw_rng
        )
    pool_rng = substream(rng_seed, ACQUISITION, "pool")
    pool = space.sample_sobol(config.candidate_pool_size, pool_rng)
    values = ucb_values(model, pool, config.beta, base_draws)

    def score(U: np.ndarray) -> np.ndarray:
        return ucb_values(model, space.denormalize(U), config.beta, base_draws)

    order = np.argsort(values)[::-1]
    top = order[: max(config.acquisition_restarts, 1)]
    best_x = pool[order[0]]
    best_val = float(values[order[0]])
    for idx in top:
        u, val = _pattern_search(score, space.normalize(pool[idx]), float(values[idx]))
        if val > best_val:
            best_val = val
            best_x = space.denormalize(u)
    return space.clip(best_x)
