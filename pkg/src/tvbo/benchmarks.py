"""Synthetic time-varying benchmarks with noise, per-call cost and
ground-truth optimum tracking.

Each benchmark is a classical minimization test function over d+1 raw
coordinates; the first d are the spatial domain (normalized to [0,1]^d
for the optimizer) and the last is driven by virtual time over
[0, horizon] seconds mapped affinely onto the same per-coordinate bound.
Optimizers maximize, so evaluations return the negated raw value plus
centered Gaussian noise.
"""

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

HORIZON = 600.0


# ---------------------------------------------------------------------------
# Raw test functions (minimization form, z includes the time coordinate)
# ---------------------------------------------------------------------------

def _schwefel(z):
    return 418.9829 * z.shape[-1] - np.sum(z * np.sin(np.sqrt(np.abs(z))),
                                           axis=-1)


def _eggholder(z):
    a = z[..., 1] + 47.0
    return (-a * np.sin(np.sqrt(np.abs(z[..., 0] / 2.0 + a)))
            - z[..., 0] * np.sin(np.sqrt(np.abs(z[..., 0] - a))))


def _ackley(z):
    a, b, c = 20.0, 0.2, 2.0 * math.pi
    d = z.shape[-1]
    return (-a * np.exp(-b * np.sqrt(np.sum(z**2, axis=-1) / d))
            - np.exp(np.sum(np.cos(c * z), axis=-1) / d) + a + math.e)


_SHEKEL_BETA = np.array([1, 2, 2, 4, 4, 6, 3, 7, 5, 5]) / 10.0
# rows 3 and 4 repeat rows 1 and 2 (standard m=10 table)
_SHEKEL_C = np.array([
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
])


def _shekel(z):
    diffs = z[..., :, None] - _SHEKEL_C
    return -np.sum(1.0 / (np.sum(diffs**2, axis=-2) + _SHEKEL_BETA), axis=-1)


def _griewank(z):
    i = np.arange(1, z.shape[-1] + 1)
    return (np.sum(z**2, axis=-1) / 4000.0
            - np.prod(np.cos(z / np.sqrt(i)), axis=-1) + 1.0)


_HARTMANN3_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN3_A = np.array([
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
])
_HARTMANN3_P = 1e-4 * np.array([
    [3689.0, 1170.0, 2673.0],
    [4699.0, 4387.0, 7470.0],
    [1091.0, 8732.0, 5547.0],
    [381.0, 5743.0, 8828.0],
])

_HARTMANN6_ALPHA = _HARTMANN3_ALPHA
_HARTMANN6_A = np.array([
    [10.0, 3.0, 17.0, 3.50, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
_HARTMANN6_P = 1e-4 * np.array([
    [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
    [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
    [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
    [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
])


def _hartmann(alpha, A, P):
    def f(z):
        inner = np.sum(A * (z[..., None, :] - P) ** 2, axis=-1)
        return -np.sum(alpha * np.exp(-inner), axis=-1)
    return f


def _powell(z):
    groups = z.reshape(z.shape[:-1] + (-1, 4))
    z1, z2, z3, z4 = (groups[..., i] for i in range(4))
    return np.sum((z1 + 10.0 * z2) ** 2 + 5.0 * (z3 - z4) ** 2
                  + (z2 - 2.0 * z3) ** 4 + 10.0 * (z1 - z4) ** 4, axis=-1)


# ---------------------------------------------------------------------------
# Benchmark specification and registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkSpec:
    """A named objective with raw bounds (d+1 coordinates, time last),
    per-call noise variance and cost in virtual seconds."""

    name: str
    dim: int  # spatial dimensions
    lower: np.ndarray  # (dim + 1,)
    upper: np.ndarray
    noise_variance: float
    cost: float
    raw_fn: Callable[[np.ndarray], float]
    horizon: float = HORIZON

    def to_raw(self, x, t):
        """Map normalized spatial x in [0,1]^d and virtual time t to a raw
        coordinate vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected spatial point of shape ({self.dim},)")
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        z = np.empty(self.dim + 1)
        z[:self.dim] = self.lower[:self.dim] + x * (self.upper[:self.dim]
                                                    - self.lower[:self.dim])
        z[self.dim] = self.lower[self.dim] + (t / self.horizon) * (
            self.upper[self.dim] - self.lower[self.dim])
        return z

    def from_raw(self, z):
        """Inverse of the spatial part of ``to_raw``."""
        z = np.asarray(z, dtype=float)
        return (z[:self.dim] - self.lower[:self.dim]) / (
            self.upper[:self.dim] - self.lower[:self.dim])

    def noise_free(self, x, t):
        """Maximization-form value (negated raw function), without noise."""
        return float(-self.raw_fn(self.to_raw(x, t)))

    def noise_free_batch(self, X, t):
        """Noise-free values at many normalized spatial points, one time."""
        X = np.asarray(X, dtype=float)
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        Z = np.empty((X.shape[0], self.dim + 1))
        Z[:, :self.dim] = self.lower[:self.dim] + X * (
            self.upper[:self.dim] - self.lower[:self.dim])
        Z[:, self.dim] = self.lower[self.dim] + (t / self.horizon) * (
            self.upper[self.dim] - self.lower[self.dim])
        return -np.asarray(self.raw_fn(Z))

    def evaluate(self, x, t, rng):
        """Noisy observation: noise-free value plus N(0, noise_variance)."""
        value = self.noise_free(x, t)
        if self.noise_variance > 0:
            value += rng.normal(0.0, math.sqrt(self.noise_variance))
        return value


def _box(name, total_dims, lo, hi, noise, cost, fn):
    d = total_dims - 1
    return BenchmarkSpec(name=name, dim=d,
                         lower=np.full(total_dims, float(lo)),
                         upper=np.full(total_dims, float(hi)),
                         noise_variance=noise, cost=cost, raw_fn=fn)


_REGISTRY = {
    "shekel": _box("shekel", 4, 0.0, 10.0, 0.02, 0.50, _shekel),
    "hartmann3": _box("hartmann3", 3, 0.0, 1.0, 0.05, 1.00,
                      _hartmann(_HARTMANN3_ALPHA, _HARTMANN3_A, _HARTMANN3_P)),
    "ackley": _box("ackley", 4, -32.0, 32.0, 0.05, 0.05, _ackley),
    "griewank": _box("griewank", 6, -600.0, 600.0, 0.30, 0.05, _griewank),
    "eggholder": _box("eggholder", 2, -512.0, 512.0, 0.10, 0.05, _eggholder),
    "schwefel": _box("schwefel", 4, -500.0, 500.0, 0.25, 0.05, _schwefel),
    "hartmann6": _box("hartmann6", 6, 0.0, 1.0, 0.05, 0.10,
                      _hartmann(_HARTMANN6_ALPHA, _HARTMANN6_A, _HARTMANN6_P)),
    "powell": _box("powell", 4, -4.0, 5.0, 2.50, 1.00, _powell),
}


def benchmark_names():
    return sorted(_REGISTRY)


def get_benchmark(name):
    try:
        return _REGISTRY[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown benchmark {name!r}; choose from {benchmark_names()}") from None


# ---------------------------------------------------------------------------
# Ground truth and regret
# ---------------------------------------------------------------------------

class GroundTruth:
    """Per-time-instant maximizer cache: a Sobol scan over the spatial box
    plus local refinements from the best scan points, cached per queried
    timestamp.  Single-owner (one per run)."""

    def __init__(self, spec, scan_points=4096, refinements=8, seed=1234):
        self.spec = spec
        self.refinements = refinements
        sampler = qmc.Sobol(d=spec.dim, scramble=True, seed=seed)
        self._scan = sampler.random_base2(int(math.log2(scan_points)))
        self._cache = {}
        self._last_maximizer = None

    def max_at(self, t):
        """Noise-free maximum value and maximizer at time ``t``."""
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        values = self.spec.noise_free_batch(self._scan, t)
        order = np.argsort(values)[::-1][:self.refinements]
        starts = [self._scan[i] for i in order]
        if self._last_maximizer is not None:
            # the optimum drifts continuously, so the previous maximizer
            # is usually in the right basin
            starts.append(self._last_maximizer)
        best_x, best_v = None, -np.inf

        def negative(x):
            return -self.spec.noise_free(np.clip(x, 0.0, 1.0), t)

        for x0 in starts:
            res = minimize(negative, x0, method="L-BFGS-B",
                           bounds=[(0.0, 1.0)] * self.spec.dim)
            if -res.fun > best_v:
                best_v, best_x = -res.fun, np.clip(res.x, 0.0, 1.0)
        self._cache[t] = (best_v, best_x)
        self._last_maximizer = best_x
        return best_v, best_x


def instantaneous_regret(spec, truth, x, t):
    """Noise-free gap to the tracked maximum at time ``t``; clamped at 0
    (a negative gap beyond rounding means a stale ground-truth cache and
    is flagged)."""
    best, _ = truth.max_at(t)
    gap = best - spec.noise_free(x, t)
    if gap < -1e-9:
        warnings.warn(
            f"ground-truth cache beaten by {-gap:.3e} at t={t}; refresh the cache",
            RuntimeWarning)
    return max(gap, 0.0)


# ---------------------------------------------------------------------------
# Replay benchmark: gridded spatio-temporal data from CSV
# ---------------------------------------------------------------------------

def load_replay_benchmark(path, noise_variance=0.0, cost=1.0, name="replay"):
    """Benchmark backed by a CSV of samples with header ``x1,...,xd,t,y``,
    linearly interpolated over space-time.  Rows must be sorted by t
    (unsorted input is rejected); spatial bounds come from the data.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    d = len(header) - 2
    expected = [f"x{i}" for i in range(1, d + 1)] + ["t", "y"]
    if d < 1 or header != expected:
        raise ValueError(
            f"replay CSV header must be x1,...,xd,t,y; got {header}")
    if rows.shape[0] < 2:
        raise ValueError("replay CSV needs at least two rows")
    t_col = rows[:, d]
    if np.any(np.diff(t_col) < 0):
        raise ValueError("replay CSV rows must be sorted by t")

    from scipy.interpolate import LinearNDInterpolator

    points, values = rows[:, :d + 1], rows[:, d + 1]
    interp = LinearNDInterpolator(points, values)

    lower = points.min(axis=0)
    upper = points.max(axis=0)
    if np.any(upper <= lower):
        raise ValueError("replay CSV must span a non-degenerate box")

    def raw_fn(z):
        pts = np.atleast_2d(np.asarray(z, dtype=float))
        vals = np.asarray(interp(pts), dtype=float)
        for i in np.flatnonzero(np.isnan(vals)):
            # outside the convex hull of the samples: nearest data value
            idx = int(np.argmin(np.sum((points - pts[i]) ** 2, axis=1)))
            vals[i] = values[idx]
        out = -vals  # stored values are already in maximization form
        return out[0] if np.ndim(z) == 1 else out

    return BenchmarkSpec(name=name, dim=d, lower=lower, upper=upper,
                         noise_variance=noise_variance, cost=cost,
                         raw_fn=raw_fn)
