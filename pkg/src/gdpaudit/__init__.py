"""Gaussian-DP auditing of marginal-based DP synthetic data generators.

The audit runs a distinguishing game between two worst-case neighboring
datasets, trains a classifier on the released artifacts, and turns its
test-set errors into a credible lower bound on the GDP parameter mu.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
