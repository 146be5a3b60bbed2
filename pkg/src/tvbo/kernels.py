"""Stationary correlation families, their separable product, and temporal
spectral densities.

Spectral convention
-------------------
``spectral_density(family, l, f)`` returns the symmetric (two-sided)
spectral density ``S(f) = \\int k(\\tau) e^{-2\\pi i f \\tau} d\\tau``
evaluated at non-negative frequencies, in Hz.  Because the correlation
functions here satisfy ``k(0) = 1``, the density carries unit total mass,
which for the one-sided evaluation reads ``2 \\int_0^\\infty S(z) dz = 1``.
The power spectral distribution ``F(x) = 2 \\int_0^x S(z) dz`` keeps that
factor 2 explicit; mixing the two conventions is the classic factor-2 bug
this docstring exists to prevent.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import erf, gamma

from . import backends


@dataclass(frozen=True)
class KernelFamily:
    """An isotropic correlation family; ``alpha`` is only meaningful for
    the rational quadratic and must be positive there."""

    name: str
    alpha: float = math.nan

    def __post_init__(self):
        if self.name not in _CODES:
            raise ValueError(f"unknown kernel family {self.name!r}")
        if self.name == "rq":
            if not (isinstance(self.alpha, (int, float)) and self.alpha > 0):
                raise ValueError("rational quadratic requires alpha > 0")

    @property
    def code(self):
        return _CODES[self.name]

    def __str__(self):
        if self.name == "rq":
            return f"rq({self.alpha:g})"
        return self.name


_CODES = {"matern12": 0, "matern32": 1, "matern52": 2, "rbf": 3, "rq": 4}

MATERN12 = KernelFamily("matern12")
MATERN32 = KernelFamily("matern32")
MATERN52 = KernelFamily("matern52")
RBF = KernelFamily("rbf")


def rational_quadratic(alpha):
    return KernelFamily("rq", float(alpha))


def family_from_name(name, alpha=None):
    """Parse a family from config strings like ``"matern32"`` or ``"rq"``
    (the latter requires ``alpha``)."""
    name = name.lower()
    if name == "rq":
        if alpha is None:
            raise ValueError("family 'rq' requires an alpha parameter")
        return rational_quadratic(alpha)
    return KernelFamily(name)


@dataclass(frozen=True)
class KernelSpec:
    """Hyperparameters of the separable spatio-temporal covariance
    ``signal_variance * kS(||x - x'||) * kT(|t - t'|)``.

    ``temporal_family=None`` denotes a time-agnostic surrogate (temporal
    factor identically 1), used by baselines that ignore drift.
    """

    spatial_family: KernelFamily
    spatial_lengthscale: float
    temporal_family: "KernelFamily | None"
    temporal_lengthscale: float
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        if self.spatial_lengthscale <= 0:
            raise ValueError("spatial lengthscale must be positive")
        if self.temporal_family is not None and self.temporal_lengthscale <= 0:
            raise ValueError("temporal lengthscale must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")

    # Backend encoding: family code 5 means "constant 1".
    @property
    def temporal_code(self):
        return 5 if self.temporal_family is None else self.temporal_family.code

    @property
    def temporal_alpha(self):
        return math.nan if self.temporal_family is None else self.temporal_family.alpha


def correlation(family, lengthscale, distance):
    """Isotropic correlation at ``distance`` (scalar or array); exactly 1
    at distance 0, non-increasing, valued in [0, 1]."""
    if lengthscale <= 0:
        raise ValueError("lengthscale must be positive")
    dist = np.asarray(distance, dtype=float)
    if np.any(dist < 0):
        raise ValueError("distance must be non-negative")
    out = backends.corr_from_dist(family.code, lengthscale, family.alpha, dist)
    if np.ndim(distance) == 0:
        return float(out)
    return out


def spatio_temporal_cov(spec, p, q):
    """Covariance between space-time points ``p = (x, t)`` and ``q = (x', t')``."""
    x, t = p
    xq, tq = q
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xq = np.atleast_1d(np.asarray(xq, dtype=float))
    if x.shape != xq.shape:
        raise ValueError(f"spatial dimension mismatch: {x.shape} vs {xq.shape}")
    value = spec.signal_variance * correlation(
        spec.spatial_family, spec.spatial_lengthscale,
        float(np.linalg.norm(x - xq)))
    if spec.temporal_family is not None:
        value *= correlation(spec.temporal_family, spec.temporal_lengthscale,
                             abs(float(t) - float(tq)))
    return value


# ---------------------------------------------------------------------------
# Spectral densities and power spectral distributions
# ---------------------------------------------------------------------------

_MATERN_NU = {0: 0.5, 1: 1.5, 2: 2.5}


def _matern_psd_params(nu, lengthscale):
    # S(f) = coef * (a^2 + (2 pi f)^2)^(-(nu + 1/2)), unit total mass.
    a2 = 2.0 * nu / lengthscale**2
    coef = (2.0 * math.sqrt(math.pi) * gamma(nu + 0.5) * (2.0 * nu) ** nu
            / (gamma(nu) * lengthscale ** (2.0 * nu)))
    return coef, a2


def spectral_density(family, lengthscale, frequency):
    """Two-sided spectral density of the unit-variance correlation, at
    non-negative frequencies in Hz (see module docstring for convention)."""
    if lengthscale <= 0:
        raise ValueError("lengthscale must be positive")
    f = np.asarray(frequency, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequency must be non-negative")
    code = family.code
    if code in _MATERN_NU:
        nu = _MATERN_NU[code]
        coef, a2 = _matern_psd_params(nu, lengthscale)
        out = coef * (a2 + (2.0 * math.pi * f) ** 2) ** (-(nu + 0.5))
    elif code == 3:
        out = (math.sqrt(2.0 * math.pi) * lengthscale
               * np.exp(-2.0 * math.pi**2 * lengthscale**2 * f**2))
    else:
        if family.alpha <= 0.5:
            raise ValueError(
                "rational quadratic spectral density requires alpha > 1/2")
        out = lengthscale * np.vectorize(
            lambda g: _rq_density_unit(family.alpha, g))(lengthscale * f)
    if np.ndim(frequency) == 0:
        return float(out)
    return np.asarray(out)


def power_spectral_distribution(family, lengthscale, cutoff):
    """``F(x) = 2 \\int_0^x S(z) dz``: non-decreasing, 0 at 0, -> 1."""
    if lengthscale <= 0:
        raise ValueError("lengthscale must be positive")
    x = np.asarray(cutoff, dtype=float)
    if np.any(x < 0):
        raise ValueError("cutoff must be non-negative")
    code = family.code
    if code in _MATERN_NU:
        nu = _MATERN_NU[code]
        coef, a2 = _matern_psd_params(nu, lengthscale)
        a = math.sqrt(a2)
        u = 2.0 * math.pi * x
        if code == 0:
            integral = np.arctan(u / a) / a
        elif code == 1:
            integral = (u / (2.0 * a2 * (a2 + u**2))
                        + np.arctan(u / a) / (2.0 * a**3))
        else:
            integral = (u / (4.0 * a2 * (a2 + u**2) ** 2)
                        + 3.0 * u / (8.0 * a2**2 * (a2 + u**2))
                        + 3.0 * np.arctan(u / a) / (8.0 * a**5))
        out = (coef / math.pi) * integral
    elif code == 3:
        out = erf(math.sqrt(2.0) * math.pi * lengthscale * x)
    else:
        if family.alpha <= 0.5:
            raise ValueError(
                "rational quadratic spectral density requires alpha > 1/2")
        out = np.vectorize(
            lambda g: _rq_distribution_unit(family.alpha, g))(lengthscale * x)
    out = np.clip(out, 0.0, 1.0)
    if np.ndim(cutoff) == 0:
        return float(out)
    return out


# Rational quadratic: no elementary transform for general alpha, so both
# spectral quantities are computed by Fourier quadrature on the
# unit-lengthscale kernel (S(f; l) = l S(lf; 1), F(x; l) = F(lx; 1)) and
# cached.  lru_cache keeps concurrent reads safe and fills idempotent.

def _rq_corr_unit(alpha, tau):
    return (1.0 + tau * tau / (2.0 * alpha)) ** (-alpha)


@lru_cache(maxsize=4096)
def _rq_density_unit(alpha, f):
    if f == 0.0:
        val, _ = integrate.quad(lambda t: _rq_corr_unit(alpha, t), 0.0,
                                np.inf, limit=400)
        return 2.0 * val
    w = 2.0 * math.pi * f
    head, _ = integrate.quad(lambda t: _rq_corr_unit(alpha, t) * math.cos(w * t),
                             0.0, 1.0, limit=400)
    tail, _ = integrate.quad(lambda t: _rq_corr_unit(alpha, t), 1.0, np.inf,
                             weight="cos", wvar=w, limit=400)
    return max(2.0 * (head + tail), 0.0)


@lru_cache(maxsize=4096)
def _rq_distribution_unit(alpha, x):
    # F(x) = (2/pi) * int_0^inf k(tau) sin(2 pi x tau) / tau dtau.
    # The integrand is smooth at 0 (limit 2 pi x) but oscillatory, so the
    # first half-period is integrated plainly and the rest with the
    # QUADPACK sine weight.
    if x == 0.0:
        return 0.0
    w = 2.0 * math.pi * x
    split = min(1.0, math.pi / w)
    head, _ = integrate.quad(
        lambda t: _rq_corr_unit(alpha, t) * math.sin(w * t) / t,
        0.0, split, limit=400)
    mid = 0.0
    if split < 1.0:
        mid, _ = integrate.quad(lambda t: _rq_corr_unit(alpha, t) / t,
                                split, 1.0, weight="sin", wvar=w, limit=400)
    tail, _ = integrate.quad(lambda t: _rq_corr_unit(alpha, t) / t, 1.0,
                             np.inf, weight="sin", wvar=w, limit=400)
    return (2.0 / math.pi) * (head + mid + tail)
