"""NumPy reference implementation of the hot kernel operations.

The compiled backend (``tvbo.backends._native``) implements the same three
functions with fused loops; this module is the always-available fallback
and the ground truth for backend parity tests.

Family codes (shared with the compiled backend):
    0 = Matern-1/2, 1 = Matern-3/2, 2 = Matern-5/2, 3 = RBF,
    4 = rational quadratic (uses ``alpha``), 5 = constant 1.
"""

import numpy as np

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


def corr_from_dist(code, lengthscale, alpha, dist):
    """Elementwise correlation value at non-negative distances ``dist``."""
    u = np.asarray(dist, dtype=float) / lengthscale
    if code == 0:
        return np.exp(-u)
    if code == 1:
        su = SQRT3 * u
        return (1.0 + su) * np.exp(-su)
    if code == 2:
        su = SQRT5 * u
        return (1.0 + su + su * su / 3.0) * np.exp(-su)
    if code == 3:
        return np.exp(-0.5 * u * u)
    if code == 4:
        return (1.0 + u * u / (2.0 * alpha)) ** (-alpha)
    if code == 5:
        return np.ones_like(u)
    raise ValueError(f"unknown kernel family code {code}")


def dcorr_dlog_lengthscale(code, lengthscale, alpha, dist):
    """Elementwise d corr / d log(lengthscale) at distances ``dist``."""
    u = np.asarray(dist, dtype=float) / lengthscale
    if code == 0:
        return u * np.exp(-u)
    if code == 1:
        su = SQRT3 * u
        return su * su * np.exp(-su)
    if code == 2:
        su = SQRT5 * u
        return (su * su / 3.0) * (1.0 + su) * np.exp(-su)
    if code == 3:
        return u * u * np.exp(-0.5 * u * u)
    if code == 4:
        return u * u * (1.0 + u * u / (2.0 * alpha)) ** (-alpha - 1.0)
    if code == 5:
        return np.zeros_like(u)
    raise ValueError(f"unknown kernel family code {code}")


def cross_cov(lam, s_code, s_ls, s_alpha, t_code, t_ls, t_alpha,
              xa, ta, xb, tb):
    """Dense cross-covariance matrix lam * kS(||xa-xb||) * kT(|ta-tb|).

    ``xa``: (na, d), ``ta``: (na,), ``xb``: (nb, d), ``tb``: (nb,).
    Returns an (na, nb) array.
    """
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    diff = xa[:, None, :] - xb[None, :, :]
    rs = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    rt = np.abs(np.asarray(ta, dtype=float)[:, None]
                - np.asarray(tb, dtype=float)[None, :])
    out = corr_from_dist(s_code, s_ls, s_alpha, rs)
    if t_code != 5:
        out = out * corr_from_dist(t_code, t_ls, t_alpha, rt)
    return lam * out
