"""Robust upper and lower prices of a corridor claim ``1{a <= S_T <= b}``.

The stock is ``S_t = exp((mu - sigma^2/2) t + sigma B_t)`` with ``S_0 = 1``.
Under the ambiguity set of Girsanov kernels ``|theta| <= k`` the upper price
solves the k-ignorance BSDE with terminal value ``1{a_B <= B_T <= b_B}`` and the
lower price solves the same equation with driver ``-k|z|``.

Quotes are undiscounted; multiply by ``exp(-r (T - t))`` if a discounted figure
is wanted (the CLI does this behind ``--discount``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .closed_form import indicator_Y
from .errors import DomainError
from .payoffs import KIgnoranceModel


@dataclass(frozen=True)
class MarketModel:
    mu: float
    sigma: float
    r: float = 0.0
    S0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.r)):
            raise DomainError("mu and r must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        if self.S0 != 1.0:
            raise DomainError("the corridor formulas assume S0 = 1")


@dataclass(frozen=True)
class CorridorClaim:
    a: float
    b: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"lower barrier a must be > 0, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b > self.a):
            raise DomainError(f"need b > a, got a={self.a!r}, b={self.b!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"T must be positive, got {self.T!r}")


@dataclass(frozen=True)
class PriceQuote:
    upper: float
    lower: float
    t: float
    b_t: float

    def discounted(self, r, T):
        f = math.exp(-r * (T - self.t))
        return PriceQuote(self.upper * f, self.lower * f, self.t, self.b_t)


def map_claim_to_bm(claim: CorridorClaim, market: MarketModel):
    """Barriers in Brownian coordinates ``(a_B, b_B, c)`` with ``c`` the corridor midpoint."""
    drift = (market.mu - 0.5 * market.sigma**2) * claim.T
    a_B = (math.log(claim.a) - drift) / market.sigma
    b_B = (math.log(claim.b) - drift) / market.sigma
    return a_B, b_B, 0.5 * (a_B + b_B)


def center_direct(claim: CorridorClaim, market: MarketModel):
    """``c = ln(ab) / (2 sigma) - (mu - sigma^2/2) T / sigma``, written without the barriers."""
    s = market.sigma
    return math.log(claim.a * claim.b) / (2.0 * s) - (market.mu - 0.5 * s * s) * claim.T / s


def _check_k(k):
    if not math.isfinite(k) or k < 0:
        raise DomainError(f"ambiguity radius k must be finite and >= 0, got {k!r}")


def upper_price(claim: CorridorClaim, market: MarketModel, k, t, b_t):
    """``ess sup_Q E_Q[xi | F_t]``; the indicator solution on the mapped barriers."""
    _check_k(k)
    a_B, b_B, _ = map_claim_to_bm(claim, market)
    return indicator_Y(KIgnoranceModel(k, claim.T), t, b_t, a_B, b_B)


def lower_price(claim: CorridorClaim, market: MarketModel, k, t, b_t):
    """``ess inf_Q E_Q[xi | F_t]``: the same formula with ``k`` replaced by ``-k``."""
    _check_k(k)
    a_B, b_B, _ = map_claim_to_bm(claim, market)
    return indicator_Y(KIgnoranceModel(-k, claim.T), t, b_t, a_B, b_B)


def upper_price_t0(claim: CorridorClaim, market: MarketModel, k):
    _check_k(k)
    s = market.sigma
    T = claim.T
    c = center_direct(claim, market)
    half = math.log(claim.b / claim.a) / (2.0 * s)
    return float(
        ndtr(-(abs(c) - k * T - half) / math.sqrt(T))
        - math.exp(-k * math.log(claim.b / claim.a) / s) * ndtr(-(abs(c) - k * T + half) / math.sqrt(T))
    )


def lower_price_t0(claim: CorridorClaim, market: MarketModel, k):
    _check_k(k)
    s = market.sigma
    T = claim.T
    c = center_direct(claim, market)
    half = math.log(claim.b / claim.a) / (2.0 * s)
    return float(
        ndtr(-(abs(c) + k * T - half) / math.sqrt(T))
        - math.exp(k * math.log(claim.b / claim.a) / s) * ndtr(-(abs(c) + k * T + half) / math.sqrt(T))
    )


def quote(claim: CorridorClaim, market: MarketModel, k, t=0.0, b_t=0.0) -> PriceQuote:
    return PriceQuote(
        float(upper_price(claim, market, k, t, b_t)),
        float(lower_price(claim, market, k, t, b_t)),
        float(t),
        float(b_t),
    )


def bs_reference_digital(claim: CorridorClaim, market: MarketModel):
    """Discounted corridor price with the published drift ``(2 mu - r - sigma^2/2)``.

    This is transcribed as published. For ``r == mu`` it is the usual
    risk-neutral digital price; for ``r != mu`` it does not match the
    risk-neutral measure ``Q`` and should not be used as a price.
    """
    s, T, r = market.sigma, claim.T, market.r
    m = (2.0 * market.mu - r - 0.5 * s * s) * T
    sq = s * math.sqrt(T)
    return math.exp(-r * T) * float(
        ndtr((math.log(claim.b) - m) / sq) - ndtr((math.log(claim.a) - m) / sq)
    )
