"""Exact Gaussian-process posterior over space-time observations.

The posterior object is immutable after construction: ``fit`` and
``downdate`` return new values, so instances are safe to share across
threads for concurrent reads.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from . import backends
from .kernels import KernelSpec

JITTER_INITIAL = 1e-10
JITTER_MAX = 1e-4
LOG2PI = math.log(2.0 * math.pi)


class NumericalConditioningError(RuntimeError):
    """Cholesky factorization failed even after jitter escalation."""


@dataclass(frozen=True)
class Observation:
    """One sample ((x, t), y): spatial point, timestamp in seconds, value."""

    x: np.ndarray
    t: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        if not np.all(np.isfinite(self.x)):
            raise ValueError("spatial coordinates must be finite")
        if not (math.isfinite(self.t) and math.isfinite(self.y)):
            raise ValueError("timestamp and value must be finite")


class Dataset:
    """Ordered observations with a fixed spatial dimension and
    non-decreasing timestamps."""

    __slots__ = ("X", "t", "y", "dim")

    def __init__(self, X, t, y, dim=None):
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.t = np.atleast_1d(np.asarray(t, dtype=float))
        self.y = np.atleast_1d(np.asarray(y, dtype=float))
        if len(self.t) == 0:
            self.X = self.X.reshape(0, dim if dim else self.X.shape[-1] or 1)
        if self.X.shape[0] != len(self.t) or len(self.t) != len(self.y):
            raise ValueError("X, t, y must have matching lengths")
        self.dim = self.X.shape[1]
        if dim is not None and self.dim != dim:
            raise ValueError(f"expected dimension {dim}, got {self.dim}")
        if len(self.t) > 1 and np.any(np.diff(self.t) < 0):
            raise ValueError("timestamps must be non-decreasing in insertion order")

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0), dim=dim)

    @classmethod
    def from_observations(cls, observations, dim=None):
        if not observations:
            if dim is None:
                raise ValueError("dim required for an empty dataset")
            return cls.empty(dim)
        X = np.stack([o.x for o in observations])
        t = np.array([o.t for o in observations])
        y = np.array([o.y for o in observations])
        return cls(X, t, y, dim=dim)

    def append(self, obs):
        if obs.x.shape[0] != self.dim:
            raise ValueError("observation dimension mismatch")
        if len(self) and obs.t < self.t[-1]:
            raise ValueError("timestamps must be non-decreasing")
        return Dataset(np.vstack([self.X, obs.x[None, :]]),
                       np.append(self.t, obs.t),
                       np.append(self.y, obs.y), dim=self.dim)

    def remove(self, index):
        index = int(index)
        if not 0 <= index < len(self):
            raise IndexError(f"index {index} out of range for size {len(self)}")
        keep = np.arange(len(self)) != index
        return Dataset(self.X[keep], self.t[keep], self.y[keep], dim=self.dim)

    def __len__(self):
        return len(self.t)

    def __repr__(self):
        return f"Dataset(n={len(self)}, d={self.dim})"


def _gram(dataset, spec):
    return backends.cross_cov(
        spec.signal_variance,
        spec.spatial_family.code, spec.spatial_lengthscale,
        spec.spatial_family.alpha,
        spec.temporal_code, spec.temporal_lengthscale, spec.temporal_alpha,
        dataset.X, dataset.t, dataset.X, dataset.t)


def _chol_with_jitter(K, noise_variance, signal_variance):
    """Lower Cholesky of K + (noise + jitter) I with escalating jitter."""
    n = K.shape[0]
    jitter = 0.0
    scale = JITTER_INITIAL * signal_variance
    while True:
        try:
            L = cholesky(K + (noise_variance + jitter) * np.eye(n), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            pass
        jitter = scale if jitter == 0.0 else jitter * 10.0
        if jitter > JITTER_MAX * signal_variance:
            cond = float(np.linalg.cond(K + noise_variance * np.eye(n)))
            raise NumericalConditioningError(
                f"Cholesky failed for n={n} after jitter escalation "
                f"(condition estimate {cond:.3e})")


class GpPosterior:
    """Posterior GP; answers means, variances and cross-covariances.

    Holds the lower Cholesky factor of K + (noise + jitter) I and the
    solved weight vector.  Immutable by convention: no method mutates.
    """

    __slots__ = ("dataset", "spec", "L", "alpha", "jitter")

    def __init__(self, dataset, spec, L, alpha, jitter):
        self.dataset = dataset
        self.spec = spec
        self.L = L
        self.alpha = alpha
        self.jitter = jitter

    def cross_cov(self, Xq, tq):
        """(m, n) covariance between query points and the dataset."""
        return backends.cross_cov(
            self.spec.signal_variance,
            self.spec.spatial_family.code, self.spec.spatial_lengthscale,
            self.spec.spatial_family.alpha,
            self.spec.temporal_code, self.spec.temporal_lengthscale,
            self.spec.temporal_alpha,
            Xq, tq, self.dataset.X, self.dataset.t)

    def predict_batch(self, Xq, tq):
        """Means and (clamped) variances at query points; hot path."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        if Xq.shape[1] != self.dataset.dim:
            raise ValueError(
                f"query dimension {Xq.shape[1]} != dataset dimension {self.dataset.dim}")
        lam = self.spec.signal_variance
        if len(self.dataset) == 0:
            m = Xq.shape[0]
            return np.zeros(m), np.full(m, lam)
        ks = self.cross_cov(Xq, tq)
        mean = ks @ self.alpha
        v = solve_triangular(self.L, ks.T, lower=True)
        var = lam - np.einsum("ij,ij->j", v, v)
        low = var.min()
        if low < -1e-10:
            warnings.warn(f"posterior variance clamped from {low:.3e}",
                          RuntimeWarning)
        return mean, np.clip(var, 0.0, lam)

    def predict(self, q):
        """Mean and variance at a single space-time point ``q = (x, t)``."""
        x, t = q
        mean, var = self.predict_batch(np.atleast_2d(x), [t])
        return float(mean[0]), float(var[0])

    def covariance(self, q1, q2):
        """Posterior cross-covariance between two space-time points."""
        x1, t1 = q1
        x2, t2 = q2
        x1 = np.atleast_2d(np.asarray(x1, dtype=float))
        x2 = np.atleast_2d(np.asarray(x2, dtype=float))
        if x1.shape[1] != x2.shape[1]:
            raise ValueError("query dimension mismatch")
        prior = backends.cross_cov(
            self.spec.signal_variance,
            self.spec.spatial_family.code, self.spec.spatial_lengthscale,
            self.spec.spatial_family.alpha,
            self.spec.temporal_code, self.spec.temporal_lengthscale,
            self.spec.temporal_alpha,
            x1, [t1], x2, [t2])[0, 0]
        if len(self.dataset) == 0:
            return float(prior)
        k1 = self.cross_cov(x1, [t1])[0]
        k2 = self.cross_cov(x2, [t2])[0]
        v1 = solve_triangular(self.L, k1, lower=True)
        v2 = solve_triangular(self.L, k2, lower=True)
        return float(prior - v1 @ v2)

    def __len__(self):
        return len(self.dataset)


def fit(dataset, spec):
    """Condition the prior on ``dataset``; empty datasets give the prior."""
    n = len(dataset)
    if n == 0:
        return GpPosterior(dataset, spec, np.zeros((0, 0)), np.zeros(0), 0.0)
    K = _gram(dataset, spec)
    L, jitter = _chol_with_jitter(K, spec.noise_variance, spec.signal_variance)
    alpha = cho_solve((L, True), dataset.y)
    return GpPosterior(dataset, spec, L, alpha, jitter)


def predict(posterior, q):
    return posterior.predict(q)


def covariance(posterior, q1, q2):
    return posterior.covariance(q1, q2)


def _chol_rank1_update(L, v):
    """In-place lower-Cholesky rank-one update: L L' + v v' = L~ L~'."""
    n = L.shape[0]
    for k in range(n):
        r = math.hypot(L[k, k], v[k])
        c = r / L[k, k]
        s = v[k] / L[k, k]
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + s * v[k + 1:]) / c
            v[k + 1:] = c * v[k + 1:] - s * L[k + 1:, k]
    return L


def downdate(posterior, index):
    """Posterior with observation ``index`` removed, at quadratic cost.

    Deletes row/column ``index`` from the stored Cholesky factor and
    re-triangularizes the trailing block with a rank-one update, which is
    numerically safer than Sherman-Morrison on the inverse.
    """
    n = len(posterior)
    index = int(index)
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for size {n}")
    new_data = posterior.dataset.remove(index)
    if n == 1:
        return GpPosterior(new_data, posterior.spec, np.zeros((0, 0)),
                           np.zeros(0), posterior.jitter)
    L = posterior.L
    m = n - 1
    Lnew = np.zeros((m, m))
    Lnew[:index, :index] = L[:index, :index]
    Lnew[index:, :index] = L[index + 1:, :index]
    trailing = L[index + 1:, index + 1:].copy()
    _chol_rank1_update(trailing, L[index + 1:, index].copy())
    Lnew[index:, index:] = trailing
    alpha = cho_solve((Lnew, True), new_data.y)
    return GpPosterior(new_data, posterior.spec, Lnew, alpha, posterior.jitter)


def log_marginal_likelihood(dataset, spec):
    """Gaussian log evidence of y under the prior N(0, K + noise I)."""
    if len(dataset) == 0:
        raise ValueError("log marginal likelihood requires observations")
    post = fit(dataset, spec)
    n = len(dataset)
    return float(-0.5 * dataset.y @ post.alpha
                 - np.sum(np.log(np.diag(post.L)))
                 - 0.5 * n * LOG2PI)


def _lml_value_and_grad(dataset, spec, rs, rt, optimize_temporal):
    """Log marginal likelihood and gradient in log-parameter space.

    Parameters are (log lam, log l_S[, log l_T], log noise); ``rs`` and
    ``rt`` are precomputed pairwise distance matrices.
    """
    n = len(dataset)
    sf, tf = spec.spatial_family, spec.temporal_family
    Ks = backends.corr_from_dist(sf.code, spec.spatial_lengthscale, sf.alpha, rs)
    if tf is None:
        Kt = np.ones_like(Ks)
    else:
        Kt = backends.corr_from_dist(tf.code, spec.temporal_lengthscale,
                                     tf.alpha, rt)
    Ksig = spec.signal_variance * Ks * Kt
    L, _ = _chol_with_jitter(Ksig, spec.noise_variance, spec.signal_variance)
    alpha = cho_solve((L, True), dataset.y)
    value = float(-0.5 * dataset.y @ alpha - np.sum(np.log(np.diag(L)))
                  - 0.5 * n * LOG2PI)
    # d lml / d theta = 0.5 * (alpha alpha' - Delta^-1) : dDelta/dtheta
    Kinv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - Kinv

    def half_trace(dK):
        return 0.5 * float(np.sum(W * dK))

    grads = [half_trace(Ksig)]
    dKs = backends.dcorr_dlog_lengthscale(sf.code, spec.spatial_lengthscale,
                                          sf.alpha, rs)
    grads.append(half_trace(spec.signal_variance * dKs * Kt))
    if optimize_temporal:
        dKt = backends.dcorr_dlog_lengthscale(tf.code, spec.temporal_lengthscale,
                                              tf.alpha, rt)
        grads.append(half_trace(spec.signal_variance * Ks * dKt))
    grads.append(half_trace(spec.noise_variance * np.eye(n)))
    return value, np.array(grads)


def default_bounds(dataset, spec):
    """Log-space box bounds [1e-3, 1e3] relative to the problem scale:
    sqrt(d) for l_S, observed time span for l_T, var(y) for lam and noise."""
    span = 1.0
    if len(dataset) > 1:
        span = max(float(dataset.t[-1] - dataset.t[0]), 1e-6)
    var_y = max(float(np.var(dataset.y)), 1e-12) if len(dataset) else 1.0
    sqrt_d = math.sqrt(dataset.dim)
    return {
        "signal_variance": (1e-3 * var_y, 1e3 * var_y),
        "spatial_lengthscale": (1e-3 * sqrt_d, 1e3 * sqrt_d),
        "temporal_lengthscale": (1e-3 * span, 1e3 * span),
        "noise_variance": (1e-3 * var_y, 1e3 * var_y),
    }


def fit_hyperparameters(dataset, init, bounds=None, restarts=8, rng=None,
                        optimize_temporal=True):
    """Maximize the log evidence over log-parameterized hyperparameters.

    Multi-restart L-BFGS with analytic gradients; restart 0 starts at
    ``init`` and the rest start log-uniformly inside the bounds.  The
    returned spec never has lower evidence than ``init``.  If every
    restart fails conditioning, ``init`` is returned with a warning.
    """
    if len(dataset) < 2:
        raise ValueError("hyperparameter fitting requires at least 2 observations")
    if bounds is None:
        bounds = default_bounds(dataset, init)
    rng = np.random.default_rng(rng)
    has_temporal = init.temporal_family is not None
    optimize_temporal = optimize_temporal and has_temporal

    names = ["signal_variance", "spatial_lengthscale"]
    if optimize_temporal:
        names.append("temporal_lengthscale")
    names.append("noise_variance")
    log_bounds = [tuple(np.log(bounds[k])) for k in names]

    rs = np.sqrt(((dataset.X[:, None, :] - dataset.X[None, :, :]) ** 2).sum(-1))
    rt = np.abs(dataset.t[:, None] - dataset.t[None, :])

    def spec_from(theta):
        vals = dict(zip(names, np.exp(theta)))
        return KernelSpec(
            spatial_family=init.spatial_family,
            spatial_lengthscale=vals["spatial_lengthscale"],
            temporal_family=init.temporal_family,
            temporal_lengthscale=vals.get("temporal_lengthscale",
                                          init.temporal_lengthscale),
            signal_variance=vals["signal_variance"],
            noise_variance=max(vals["noise_variance"], 1e-12),
        )

    def objective(theta):
        try:
            value, grad = _lml_value_and_grad(dataset, spec_from(theta), rs, rt,
                                              optimize_temporal)
        except NumericalConditioningError:
            return 1e12, np.zeros(len(theta))
        return -value, -grad

    x_init = np.log([getattr(init, k) for k in names])
    x_init = np.clip(x_init, [lo for lo, _ in log_bounds],
                     [hi for _, hi in log_bounds])
    starts = [x_init]
    for _ in range(max(restarts - 1, 0)):
        starts.append(np.array([rng.uniform(lo, hi) for lo, hi in log_bounds]))

    best_theta, best_value = None, -np.inf
    for x0 in starts:
        try:
            res = minimize(objective, x0, jac=True, method="L-BFGS-B",
                           bounds=log_bounds)
        except NumericalConditioningError:
            continue
        if res.fun < 1e11 and -res.fun > best_value:
            best_value, best_theta = -res.fun, res.x

    try:
        init_value = log_marginal_likelihood(dataset, init)
    except NumericalConditioningError:
        init_value = -np.inf
    if best_theta is None:
        warnings.warn("all hyperparameter restarts failed conditioning; "
                      "keeping the initial spec", RuntimeWarning)
        return init
    if init_value >= best_value:
        return init
    return spec_from(best_theta)
