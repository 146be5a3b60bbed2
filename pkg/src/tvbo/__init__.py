"""Time-varying Bayesian optimization toolkit.

Subpackages cover the separable spatio-temporal surrogate (``kernels``,
``gp``), the UCB acquisition (``acquisition``), Wasserstein-based
observation relevancy (``relevancy``), regret-bound and dataset-size
calculators (``theory``), the optimizer implementations (``algorithms``),
synthetic time-varying benchmarks (``benchmarks``) and the simulated-clock
experiment runner (``harness``, CLI in ``cli``).
"""

from .backends import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
