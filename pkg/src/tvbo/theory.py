"""Calculators for the regret bounds and the dataset-size recommendation.

All functions are pure.  The temporal-correlation-norm machinery
(``u_norm_sq``/``recommended_size``) quantifies how much correlated signal
a dataset of size n retains when consecutive observations are R(n) apart;
its argmax is the recommended maximal dataset size.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import erfcx

from . import backends
from .kernels import KernelSpec, power_spectral_distribution, spectral_density

DEFAULT_SIZE_CAP = 2000
DEFAULT_SIZE_INIT = 16


@dataclass(frozen=True)
class TheoryParams:
    """Inputs shared by the bound calculators: problem dimension, spatial
    Lipschitz constant, kernel hyperparameters and per-call cost (s)."""

    d: int
    lipschitz: float
    spec: KernelSpec
    cost: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.lipschitz <= 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.cost <= 0:
            raise ValueError("per-call cost must be positive")
        if self.spec.temporal_family is None:
            raise ValueError("theory calculators need a temporal kernel")


def inverse_mills(z):
    """phi(z) / (1 - Phi(z)), stable for large z via the scaled
    complementary error function (naive phi/(1-Phi) underflows to 0/0)."""
    return math.sqrt(2.0 / math.pi) / erfcx(z / math.sqrt(2.0))


def sigma_c_sq(params):
    """Variance scale of the per-iteration regret floor at sampling period
    ``cost``: 2 lam (1 + kS(sqrt d)) (1 - F_T(1/cost)), clamped at 0."""
    spec = params.spec
    ks = float(backends.corr_from_dist(
        spec.spatial_family.code, spec.spatial_lengthscale,
        spec.spatial_family.alpha, math.sqrt(params.d)))
    tail = 1.0 - power_spectral_distribution(
        spec.temporal_family, spec.temporal_lengthscale, 1.0 / params.cost)
    return max(2.0 * spec.signal_variance * (1.0 + ks) * tail, 0.0)


def regret_slope(params):
    """Per-iteration lower-bound constant:
    sigma_c * mills(L sqrt d / sigma_c) - L sqrt d; 0 when sigma_c = 0."""
    sc = math.sqrt(sigma_c_sq(params))
    if sc == 0.0:
        return 0.0
    ld = params.lipschitz * math.sqrt(params.d)
    return sc * inverse_mills(ld / sc) - ld


def expected_truncated_regret(mu_r, sigma_r):
    """Mean of a Gaussian(mu_r, sigma_r^2) truncated to [0, inf):
    mu_r + sigma_r * mills(-mu_r / sigma_r)."""
    if sigma_r <= 0:
        raise ValueError("sigma_r must be positive")
    return mu_r + sigma_r * inverse_mills(-mu_r / sigma_r)


def u_norm_sq(family, lengthscale, response_time, n):
    """Squared norm of (kT(R(n)), kT(2 R(n)), ..., kT(n R(n)))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r = float(response_time(n))
    lags = r * np.arange(1, n + 1)
    k = backends.corr_from_dist(family.code, lengthscale, family.alpha, lags)
    return float(k @ k)


class RecommendedSize(NamedTuple):
    n: int
    diverged: bool


def recommended_size(family, lengthscale, response_time,
                     n_max=DEFAULT_SIZE_CAP, init=DEFAULT_SIZE_INIT):
    """Maximal-argument search for ``u_norm_sq`` by finite-difference walk.

    From ``init``, steps in the direction of the sign of
    u(n+1) - u(n) until the difference changes sign, returning the
    larger-norm endpoint; the relaxed objective is unimodal so the walk
    finds the argmax.  If the difference never turns non-positive by
    ``n_max`` (non-divergent response times keep the norm increasing
    forever), the cap is returned with ``diverged=True``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = int(min(max(init, 1), n_max))

    def delta(m):
        return (u_norm_sq(family, lengthscale, response_time, m + 1)
                - u_norm_sq(family, lengthscale, response_time, m))

    if delta(n) > 0.0:
        while n < n_max and delta(n) > 0.0:
            n += 1
        if n == n_max and delta(n) > 0.0:
            return RecommendedSize(n_max, True)
        return RecommendedSize(n, False)
    while n > 1 and delta(n - 1) <= 0.0:
        n -= 1
    return RecommendedSize(n, False)


def upper_bound(params, beta_t, iterations, n, response_time):
    """Cumulative-regret envelope after ``iterations`` steps for a
    UCB optimizer capped at dataset size ``n``:
    2 + sqrt(4 lam beta_T T (T - lam kS^2(sqrt d)/(lam + noise) ||u_n||^2)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if iterations < n:
        raise ValueError("the envelope requires iterations >= n")
    spec = params.spec
    lam = spec.signal_variance
    ks = float(backends.corr_from_dist(
        spec.spatial_family.code, spec.spatial_lengthscale,
        spec.spatial_family.alpha, math.sqrt(params.d)))
    u = u_norm_sq(spec.temporal_family, spec.temporal_lengthscale,
                  response_time, n)
    inner = iterations - lam * ks**2 / (lam + spec.noise_variance) * u
    return 2.0 + math.sqrt(4.0 * lam * beta_t * iterations * inner)


def circulant_eigs(family, lengthscale, cost, n):
    """Exact eigenvalues of the circulant approximation to the temporal
    Gram matrix over n samples spaced ``cost`` seconds apart.

    First row: kT(0) on the diagonal position and
    kT(cost*l) + kT(cost*(n-l)) elsewhere; the eigenvalues are its DFT
    and are real with a symmetric spectrum.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    lags = np.arange(n, dtype=float)
    row = (backends.corr_from_dist(family.code, lengthscale, family.alpha,
                                   cost * lags)
           + backends.corr_from_dist(family.code, lengthscale, family.alpha,
                                     cost * (n - lags)))
    row[0] = 1.0
    return np.fft.fft(row).real


def circulant_eig_prediction(family, lengthscale, cost, n):
    """Spectral-density prediction for ``circulant_eigs``.

    Equals (2/cost) times the one-sided cosine transform of the temporal
    correlation, i.e. (1/cost) times the symmetric density returned by
    ``spectral_density`` (see the kernels module for the factor-2
    convention), evaluated at the DFT frequencies j/(n*cost).
    """
    j = np.arange(n, dtype=float)
    return spectral_density(family, lengthscale, j / (n * cost)) / cost


Response = Callable[[int], float]


def cubic_response(r0, gamma):
    """Response-time model r0 + gamma n^3 (cubic inference cost)."""
    if r0 <= 0 or gamma < 0:
        raise ValueError("r0 must be positive and gamma non-negative")
    return lambda n: r0 + gamma * float(n) ** 3


def constant_response(c):
    """Degenerate constant response time (never divergent)."""
    if c <= 0:
        raise ValueError("c must be positive")
    return lambda n: c
