"""GP-UCB acquisition: confidence-width schedule and multi-start maximizer."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

BETA_FLOOR = 1e-2


@dataclass(frozen=True)
class BetaSchedule:
    """Confidence-width sequence 2d log(L d n^2 / 6 delta) + 4 log(pi n).

    ``lipschitz`` is the spatial Lipschitz constant of the objective
    (unknown for black boxes; benchmark configs supply one, else 1) and
    ``delta`` the failure probability.  Degenerate parameter combinations
    can push the value non-positive, in which case it is clamped to
    ``beta_floor`` so the optimizer stays well defined.
    """

    d: int
    lipschitz: float = 1.0
    delta: float = 0.05
    beta_floor: float = BETA_FLOOR

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.lipschitz <= 0:
            raise ValueError("Lipschitz constant must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def beta(schedule, n):
    """Exploration weight at iteration ``n >= 1`` (clamped from below)."""
    if n < 1:
        raise ValueError("iteration index must be >= 1")
    value = (2.0 * schedule.d
             * math.log(schedule.lipschitz * schedule.d * n * n
                        / (6.0 * schedule.delta))
             + 4.0 * math.log(math.pi * n))
    return max(value, schedule.beta_floor)


def ucb(posterior, schedule, n, q):
    """mu(q) + sqrt(beta_n) sigma(q)."""
    mean, var = posterior.predict(q)
    return mean + math.sqrt(beta(schedule, n)) * math.sqrt(var)


def _ucb_batch(posterior, sqrt_beta, X, t_now):
    means, variances = posterior.predict_batch(X, np.full(X.shape[0], t_now))
    return means + sqrt_beta * np.sqrt(variances)


def maximize(posterior, schedule, n, t_now, starts=10, rng=None):
    """Best of ``starts`` bounded local searches on x -> ucb(x, t_now).

    Start points are uniform in [0, 1]^d; each is refined by L-BFGS-B
    with finite-difference gradients and the overall argmax over starts
    and refined endpoints is returned.  Deterministic given ``rng``.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    rng = np.random.default_rng(rng)
    d = posterior.dataset.dim
    sqrt_beta = math.sqrt(beta(schedule, n))
    x0s = rng.uniform(size=(starts, d))

    candidates = [x0s]
    if len(posterior.dataset) > 0:
        box = [(0.0, 1.0)] * d

        def negative(x):
            m, v = posterior.predict_batch(x[None, :], [t_now])
            return -(m[0] + sqrt_beta * math.sqrt(v[0]))

        refined = np.empty_like(x0s)
        for i, x0 in enumerate(x0s):
            res = minimize(negative, x0, method="L-BFGS-B", bounds=box)
            refined[i] = np.clip(res.x, 0.0, 1.0)
        candidates.append(refined)

    pool = np.vstack(candidates)
    values = _ucb_batch(posterior, sqrt_beta, pool, t_now)
    return pool[int(np.argmax(values))].copy()
