"""Backend selection for the hot kernel operations.

At import time the compiled Cython module is preferred; the NumPy
reference implementation is used when the extension is unavailable or
when ``TVBO_BACKEND=reference`` is set in the environment.  Both expose
the same three functions (``corr_from_dist``, ``dcorr_dlog_lengthscale``,
``cross_cov``) with identical semantics; ``scripts/bench_backends.py``
times them against each other.
"""

import os

from . import reference

_requested = os.environ.get("TVBO_BACKEND", "native").lower()

if _requested == "reference":
    _impl = reference
    BACKEND = "reference"
elif _requested in ("native", "auto"):
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        _impl = reference
        BACKEND = "reference"
else:
    raise ImportError(
        f"TVBO_BACKEND={_requested!r} is not one of 'native', 'reference', 'auto'"
    )

corr_from_dist = _impl.corr_from_dist
dcorr_dlog_lengthscale = _impl.dcorr_dlog_lengthscale
cross_cov = _impl.cross_cov

__all__ = [
    "BACKEND",
    "corr_from_dist",
    "cross_cov",
    "dcorr_dlog_lengthscale",
    "reference",
]
