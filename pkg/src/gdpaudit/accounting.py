"""Conversions between (epsilon, delta)-DP, rho-zCDP and mu-GDP, and the
theoretical tradeoff frontiers they induce.

Every audit compares against ``implied_mu``: the budget is turned into a
zCDP parameter the way MST/AIM do it internally, and the Gaussian-only
mechanism then maps that rho to mu = sqrt(2 rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import norm_cdf, norm_ppf, norm_sf

# Renyi-order search range for the zCDP -> DP conversion
RENYI_MAX = 500.0
_RENYI_MIN = 1.0 + 1e-9
_GRID = np.geomspace(1e-9, RENYI_MAX - 1.0, 256) + 1.0
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

BISECT_TOL = 1e-9
MU_BRACKET = (0.0, 100.0)


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) budget together with its derived parameters."""

    epsilon: float
    delta: float
    rho: float
    mu_implied: float
    mu_direct: float

    @classmethod
    def from_dp(cls, epsilon: float, delta: float) -> "PrivacyBudget":
        rho = rho_from_dp(epsilon, delta)
        mu_direct = mu_from_dp(epsilon, delta) if delta < 1.0 else 0.0
        return cls(epsilon, delta, rho, rho_to_mu(rho), mu_direct)


@dataclass(frozen=True)
class TradeoffPoint:
    alpha: float  # FPR
    beta: float  # FNR

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError(f"tradeoff point out of range: {self}")


def _log_delta(order: float, rho: float, epsilon: float) -> float:
    return (
        (order - 1.0) * (order * rho - epsilon)
        + order * math.log1p(-1.0 / order)
        - math.log(order - 1.0)
    )


def zcdp_delta(rho: float, epsilon: float) -> float:
    """Smallest delta such that rho-zCDP implies (epsilon, delta)-DP.

    Minimizes, over Renyi orders a in (1, 500], the log of
    exp((a-1)(a rho - eps)) (1 - 1/a)^a / (a - 1): a coarse geometric grid
    brackets the minimum, golden-section search polishes it.
    """
    if rho < 0 or epsilon < 0:
        raise ValueError("rho and epsilon must be nonnegative")
    if rho == 0:
        return 0.0

    vals = [_log_delta(a, rho, epsilon) for a in _GRID]
    i = int(np.argmin(vals))
    lo = _GRID[max(i - 1, 0)]
    hi = _GRID[min(i + 1, len(_GRID) - 1)]
    best = vals[i]

    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = _log_delta(c, rho, epsilon), _log_delta(d, rho, epsilon)
    for _ in range(200):
        if hi - lo <= 1e-12 * hi:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = _log_delta(c, rho, epsilon)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = _log_delta(d, rho, epsilon)
    best = min(best, fc, fd)
    if best >= 0.0:
        return 1.0
    return math.exp(best)


def rho_from_dp(epsilon: float, delta: float) -> float:
    """Smallest rho (to within 1e-9) whose zCDP guarantee implies (epsilon, delta)-DP."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]; delta = 0 has no finite rho")
    if delta == 1.0:
        return 0.0

    lo, hi = 0.0, epsilon * epsilon
    while zcdp_delta(hi, epsilon) <= delta:
        lo, hi = hi, 2.0 * hi
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if zcdp_delta(mid, epsilon) <= delta:
            lo = mid
        else:
            hi = mid
    return lo


def rho_to_mu(rho: float) -> float:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return math.sqrt(2.0 * rho)


def zcdp_epsilon_simple(rho: float, delta: float) -> float:
    """The classic rho + 2 sqrt(rho log(1/delta)) bound."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def zcdp_epsilon(rho: float, delta: float) -> float:
    """Smallest epsilon with zcdp_delta(rho, epsilon) <= delta (bisection)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if rho == 0:
        return 0.0
    lo, hi = 0.0, zcdp_epsilon_simple(rho, delta)
    while zcdp_delta(rho, hi) > delta:
        hi *= 2.0
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if zcdp_delta(rho, mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def gdp_delta(mu: float, epsilon: float) -> float:
    """delta(epsilon) of the mu-GDP privacy profile."""
    if mu < 0 or epsilon < 0:
        raise ValueError("mu and epsilon must be nonnegative")
    if mu == 0:
        return 0.0
    a = -epsilon / mu + mu / 2.0
    b = -epsilon / mu - mu / 2.0
    val = norm_cdf(a) - math.exp(epsilon) * norm_cdf(b)
    return min(max(val, 0.0), 1.0)


def mu_from_dp(epsilon: float, delta: float) -> float:
    """The mu whose GDP profile passes through (epsilon, delta)."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    lo, hi = MU_BRACKET
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if gdp_delta(mid, epsilon) < delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def implied_mu(epsilon: float, delta: float) -> float:
    """Theoretical audit target: (eps, delta) -> rho -> mu."""
    return rho_to_mu(rho_from_dp(epsilon, delta))


def gauss_tradeoff(mu: float, alpha):
    """G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu); vectorized over alpha."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    # Phi^{-1}(1 - a) = -Phi^{-1}(a), avoiding the rounding in 1 - a
    z = -norm_ppf(alpha)
    return norm_sf(mu - z) if np.ndim(z) == 0 else norm_sf(mu - np.asarray(z))


def dp_tradeoff(epsilon: float, delta: float, alpha):
    """Two-line (epsilon, delta)-DP frontier."""
    if epsilon < 0 or not 0.0 <= delta <= 1.0:
        raise ValueError("invalid (epsilon, delta)")
    alpha = np.asarray(alpha, dtype=float)
    out = np.maximum.reduce([
        np.zeros_like(alpha),
        1.0 - delta - math.exp(epsilon) * alpha,
        math.exp(-epsilon) * (1.0 - delta - alpha),
    ])
    return float(out) if out.ndim == 0 else out
