"""Time-varying optimizers behind a single step interface.

Variants differ only in their surrogate's temporal structure and their
stale-data policy:

* ``BoltOptimizer``: spatio-temporal surrogate, dataset capped at the
  recommended size (recomputed every iteration from the online
  response-time fit), least-relevant observation evicted while over cap.
* ``GpUcbOptimizer``: time-agnostic surrogate, never removes.
* ``RGpUcbOptimizer``: time-agnostic surrogate, periodic dataset reset.
* ``TvGpUcbOptimizer``: per-index geometric forgetting between
  observations (a Markov-drift surrogate), never removes.
* ``WdboBudgetOptimizer``: spatio-temporal surrogate, fixed eviction
  budget per iteration instead of the recommended cap.

Each instance is single-owner and stepped sequentially; separate
instances share no mutable state.  All draws come from generators seeded
at construction, so a (seed, config) pair reproduces bit-identical runs.
"""

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import gp, relevancy
from .acquisition import BetaSchedule, maximize
from .kernels import MATERN12, MATERN32, MATERN52, KernelSpec
from .theory import RecommendedSize, recommended_size


# ---------------------------------------------------------------------------
# Clocks
# ---------------------------------------------------------------------------

class SimulatedClock:
    """Virtual time: observation costs advance it explicitly and model
    computation is charged through ``compute_model`` (seconds as a
    function of dataset size), keeping runs deterministic and fast."""

    def __init__(self, compute_model, start=0.0):
        self._t = float(start)
        self.compute_model = compute_model

    def now(self):
        return self._t

    def advance(self, seconds):
        self._t += seconds

    def charge_compute(self, dataset_size):
        seconds = float(self.compute_model(dataset_size))
        self._t += seconds
        return seconds


class WallClock:
    """Real time for live use; computation charges itself."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self):
        return time.monotonic() - self._t0

    def advance(self, seconds):
        pass

    def charge_compute(self, dataset_size):
        return 0.0


# ---------------------------------------------------------------------------
# Online response-time model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResponseTimeModel:
    """Cubic least-squares fit of measured response times against dataset
    size, evaluated with a floor at the smallest observed response so the
    modeled time stays positive."""

    coefficients: np.ndarray  # a0..a3
    r_floor: float
    constant: bool

    def evaluate(self, n):
        n = float(n)
        value = (self.coefficients[0] + self.coefficients[1] * n
                 + self.coefficients[2] * n**2 + self.coefficients[3] * n**3)
        return max(value, self.r_floor)


def fit_response_model(samples):
    """Least-squares cubic over (size, seconds) samples; fewer than four
    samples or fewer than four distinct sizes fall back to the constant
    mean model."""
    if not samples:
        raise ValueError("at least one response-time sample required")
    ns = np.array([s[0] for s in samples], dtype=float)
    rs = np.array([s[1] for s in samples], dtype=float)
    r_floor = float(rs.min())
    if len(samples) < 4 or len(np.unique(ns)) < 4:
        mean = float(rs.mean())
        return ResponseTimeModel(np.array([mean, 0.0, 0.0, 0.0]), r_floor, True)
    design = np.vander(ns, 4, increasing=True)
    coeffs, *_ = np.linalg.lstsq(design, rs, rcond=None)
    return ResponseTimeModel(coeffs, r_floor, False)


# ---------------------------------------------------------------------------
# Optimizer configuration and step record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    spatial_family: object = MATERN52
    temporal_family: object = MATERN32
    init_spatial_lengthscale: float = 0.3
    init_temporal_lengthscale: float = 60.0
    init_signal_variance: float = 1.0
    init_noise_variance: float = 0.01
    lipschitz: float = 1.0
    delta: float = 0.05
    warmup: int = 15
    acq_starts: int = 10
    hyperfit_every: int = 1
    hyperfit_restarts: int = 8
    size_cap: int = 2000
    relevancy_nodes: int = 256
    window_lengthscales: float = 3.0
    reset_period: float = 120.0
    forgetting: float = 0.01
    removal_rate: float = 1.0


@dataclass(frozen=True)
class StepResult:
    x: np.ndarray
    t: float
    y: float
    removed_indices: tuple
    measured_response: float
    compute_seconds: float
    dataset_size: int


class _BaseOptimizer:
    """Shared iteration loop; subclasses pick the surrogate's temporal
    structure (``_surrogate_*`` hooks) and the cleanup policy."""

    removes_observations = False

    def __init__(self, dim, config=None, seed=0):
        self.dim = int(dim)
        self.config = config or OptimizerConfig()
        self.dataset = gp.Dataset.empty(self.dim)
        self.spec = self._initial_spec()
        self.schedule = BetaSchedule(d=self.dim, lipschitz=self.config.lipschitz,
                                     delta=self.config.delta)
        self.iteration = 0
        self.rt_samples = []
        self.rt_model = None
        self.n_star: Optional[RecommendedSize] = None
        root = (seed if isinstance(seed, np.random.SeedSequence)
                else np.random.SeedSequence(seed))
        acq_seq, warm_seq, hyper_seq = root.spawn(3)
        self._acq_rng = np.random.default_rng(acq_seq)
        self._warm_rng = np.random.default_rng(warm_seq)
        self._hyper_rng = np.random.default_rng(hyper_seq)
        self._steps_since_hyperfit = None
        self.posterior = gp.fit(self.dataset, self.spec)

    # --- hooks -----------------------------------------------------------
    def _initial_spec(self):
        c = self.config
        return KernelSpec(
            spatial_family=c.spatial_family,
            spatial_lengthscale=c.init_spatial_lengthscale,
            temporal_family=c.temporal_family,
            temporal_lengthscale=c.init_temporal_lengthscale,
            signal_variance=c.init_signal_variance,
            noise_variance=c.init_noise_variance,
        )

    def _pre_step(self, t_now):
        pass

    def _surrogate_dataset(self):
        return self.dataset

    def _surrogate_query_time(self, t_now):
        return t_now

    def _optimize_temporal(self):
        return True

    def _cleanup(self, clock):
        return ()

    # --- iteration -------------------------------------------------------
    def _refit_hyperparameters(self, data):
        c = self.config
        due = (self._steps_since_hyperfit is None
               or self._steps_since_hyperfit + 1 >= c.hyperfit_every)
        if due and len(data) >= 2:
            self.spec = gp.fit_hyperparameters(
                data, self.spec, restarts=c.hyperfit_restarts,
                rng=self._hyper_rng, optimize_temporal=self._optimize_temporal())
            self._steps_since_hyperfit = 0
        elif self._steps_since_hyperfit is not None:
            self._steps_since_hyperfit += 1

    def step(self, objective, clock):
        """One full iteration: infer, acquire, observe, record response,
        clean up.  ``objective(x, t)`` must charge its own cost on the
        clock; model computation is charged through the clock's model."""
        t_start = clock.now()
        n_start = len(self.dataset)
        self._pre_step(t_start)
        if self.iteration < self.config.warmup:
            x = self._warm_rng.uniform(size=self.dim)
        else:
            data = self._surrogate_dataset()
            self._refit_hyperparameters(data)
            self.posterior = gp.fit(data, self.spec)
            x = maximize(self.posterior, self.schedule, self.iteration + 1,
                         self._surrogate_query_time(t_start),
                         starts=self.config.acq_starts, rng=self._acq_rng)
        y = float(objective(x, t_start))
        self.dataset = self.dataset.append(gp.Observation(x, t_start, y))
        compute = clock.charge_compute(n_start)
        measured = clock.now() - t_start
        self.rt_samples.append((n_start, measured))
        self.rt_model = fit_response_model(self.rt_samples)
        removed = self._cleanup(clock)
        self.iteration += 1
        return StepResult(x=x, t=t_start, y=y, removed_indices=tuple(removed),
                          measured_response=measured, compute_seconds=compute,
                          dataset_size=len(self.dataset))


class GpUcbOptimizer(_BaseOptimizer):
    """Vanilla UCB control: no temporal kernel, never removes."""

    def _initial_spec(self):
        return replace(super()._initial_spec(), temporal_family=None)


class RGpUcbOptimizer(GpUcbOptimizer):
    """UCB with a periodic dataset reset (sawtooth dataset size)."""

    removes_observations = True

    def __init__(self, dim, config=None, seed=0):
        super().__init__(dim, config, seed)
        self._next_reset = self.config.reset_period

    def _pre_step(self, t_now):
        if not math.isfinite(self._next_reset):
            return
        if t_now >= self._next_reset:
            self.dataset = gp.Dataset.empty(self.dim)
            while t_now >= self._next_reset:
                self._next_reset += self.config.reset_period


class TvGpUcbOptimizer(_BaseOptimizer):
    """Markov-drift surrogate: covariance between observations i and j is
    the spatial kernel times (1 - forgetting)^(|i-j|/2).

    The geometric factor equals a Matern-1/2 correlation over pseudo-times
    equal to insertion indices with lengthscale -2/log(1 - forgetting), so
    the standard surrogate machinery applies with the temporal lengthscale
    held fixed; the query sits at pseudo-time n+1 (one lag past the newest
    observation).  ``forgetting=0`` degenerates to ``GpUcbOptimizer``
    exactly.
    """

    def _initial_spec(self):
        base = super()._initial_spec()
        eps = self.config.forgetting
        if not 0.0 <= eps < 1.0:
            raise ValueError("forgetting must lie in [0, 1)")
        if eps == 0.0:
            return replace(base, temporal_family=None)
        return replace(base, temporal_family=MATERN12,
                       temporal_lengthscale=-2.0 / math.log1p(-eps))

    def _optimize_temporal(self):
        return False

    def _surrogate_dataset(self):
        n = len(self.dataset)
        pseudo_t = np.arange(1.0, n + 1.0)
        return gp.Dataset(self.dataset.X, pseudo_t, self.dataset.y, dim=self.dim)

    def _surrogate_query_time(self, t_now):
        return float(len(self.dataset) + 1)


class _RemovingOptimizer(_BaseOptimizer):
    removes_observations = True

    def _removal_domain(self, t_now):
        return relevancy.forward_window(
            self.spec, self.dim, t_now,
            lengthscales=self.config.window_lengthscales,
            nodes=self.config.relevancy_nodes)

    def _evict_least_relevant(self, clock):
        post = gp.fit(self.dataset, self.spec)
        index = relevancy.least_relevant(post, self._removal_domain(clock.now()))
        self.dataset = self.dataset.remove(index)
        return index


class BoltOptimizer(_RemovingOptimizer):
    """Spatio-temporal surrogate with the recommended maximal dataset size.

    The cap is recomputed every iteration from the current response-time
    fit (the online fit sharpens as samples accrue), warm-starting the
    finite-difference walk at the previous cap.
    """

    def _cleanup(self, clock):
        prev = self.n_star.n if self.n_star is not None else None
        self.n_star = recommended_size(
            self.spec.temporal_family, self.spec.temporal_lengthscale,
            self.rt_model.evaluate, n_max=self.config.size_cap,
            init=prev if prev is not None else 16)
        removed = []
        if not self.n_star.diverged:
            while len(self.dataset) > self.n_star.n:
                removed.append(self._evict_least_relevant(clock))
        return removed


class WdboBudgetOptimizer(_RemovingOptimizer):
    """Relevancy-based eviction with a fixed budget of ``removal_rate``
    removals per observation (fractional rates accumulate) instead of the
    recommended cap; removal only engages once the dataset exceeds the
    warmup size."""

    def __init__(self, dim, config=None, seed=0):
        super().__init__(dim, config, seed)
        if self.config.removal_rate < 0:
            raise ValueError("removal rate must be non-negative")
        self._budget = 0.0

    def _cleanup(self, clock):
        self._budget += self.config.removal_rate
        removed = []
        while self._budget >= 1.0 and len(self.dataset) > self.config.warmup:
            removed.append(self._evict_least_relevant(clock))
            self._budget -= 1.0
        if len(self.dataset) <= self.config.warmup:
            self._budget = 0.0
        return removed


_OPTIMIZERS = {
    "bolt": BoltOptimizer,
    "gpucb": GpUcbOptimizer,
    "rgpucb": RGpUcbOptimizer,
    "tvgpucb": TvGpUcbOptimizer,
    "wdbo": WdboBudgetOptimizer,
}


def optimizer_names():
    return sorted(_OPTIMIZERS)


def make_optimizer(name, dim, config=None, seed=0):
    try:
        cls = _OPTIMIZERS[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {name!r}; choose from {optimizer_names()}") from None
    return cls(dim, config=config, seed=seed)
