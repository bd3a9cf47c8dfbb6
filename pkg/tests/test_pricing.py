import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kignorance import checks, pricing
from kignorance.errors import DomainError
from kignorance.pde import Grid1D, solve_payoff
from kignorance.payoffs import TerminalPayoff

MU, SIGMA, R = checks.PRICE_MARKET
MARKET = pricing.MarketModel(MU, SIGMA, R)


def _Phi(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _direct(claim, market, k, t, b_t, sign):
    """Corridor price written out in market variables; ``sign=+1`` upper, ``-1`` lower."""
    s = market.sigma
    tau = claim.T - t
    c = math.log(claim.a * claim.b) / (2 * s) - (market.mu - s * s / 2) * claim.T / s
    half = math.log(claim.b / claim.a) / (2 * s)
    d = abs(b_t - c)
    return (_Phi(-(d - sign * k * tau - half) / math.sqrt(tau))
            - math.exp(-sign * k * math.log(claim.b / claim.a) / s) * _Phi(-(d - sign * k * tau + half) / math.sqrt(tau)))


claims = st.tuples(st.floats(0.5, 1.2), st.floats(0.02, 0.8)).map(lambda p: pricing.CorridorClaim(p[0], p[0] + p[1], 1.0))
radii = st.floats(0.0, 1.0)
states = st.tuples(st.floats(0.0, 0.9), st.floats(-2.0, 2.0))


def test_validation():
    with pytest.raises(DomainError):
        pricing.MarketModel(0.05, 0.0)
    with pytest.raises(DomainError):
        pricing.MarketModel(0.05, 0.2, S0=2.0)
    with pytest.raises(DomainError):
        pricing.CorridorClaim(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        pricing.CorridorClaim(1.2, 1.1, 1.0)
    with pytest.raises(DomainError):
        pricing.upper_price(pricing.CorridorClaim(0.9, 1.1, 1.0), MARKET, -0.1, 0.0, 0.0)


def test_mapping_example():
    claim = pricing.CorridorClaim(0.9, 1.1, 1.0)
    a_B, b_B, c = pricing.map_claim_to_bm(claim, MARKET)
    assert a_B == pytest.approx((math.log(0.9) - 0.03) / 0.2, abs=1e-15)
    assert b_B == pytest.approx((math.log(1.1) - 0.03) / 0.2, abs=1e-15)
    assert c == pytest.approx(pricing.center_direct(claim, MARKET), abs=1e-14)


@given(claims, radii, states)
def test_matches_written_out_formulas(claim, k, state):
    t, b_t = state
    assert pricing.upper_price(claim, MARKET, k, t, b_t) == pytest.approx(_direct(claim, MARKET, k, t, b_t, 1), abs=1e-13)
    assert pricing.lower_price(claim, MARKET, k, t, b_t) == pytest.approx(_direct(claim, MARKET, k, t, b_t, -1), abs=1e-13)


@given(claims, radii)
def test_t0_formulas_agree(claim, k):
    assert abs(pricing.upper_price_t0(claim, MARKET, k) - pricing.upper_price(claim, MARKET, k, 0.0, 0.0)) <= 1e-14
    assert abs(pricing.lower_price_t0(claim, MARKET, k) - pricing.lower_price(claim, MARKET, k, 0.0, 0.0)) <= 1e-14


@given(claims, radii, states)
def test_bracket(claim, k, state):
    q = pricing.quote(claim, MARKET, k, *state)
    mid = pricing.upper_price(claim, MARKET, 0.0, *state)
    assert 0.0 <= q.lower <= mid <= q.upper <= 1.0


@given(claims, radii, st.floats(0.01, 0.5), states)
def test_monotone_in_k(claim, k, dk, state):
    assert pricing.upper_price(claim, MARKET, k + dk, *state) >= pricing.upper_price(claim, MARKET, k, *state)
    assert pricing.lower_price(claim, MARKET, k + dk, *state) <= pricing.lower_price(claim, MARKET, k, *state)


@given(claims, radii, states)
def test_reflection_about_center(claim, k, state):
    t, b_t = state
    c = pricing.map_claim_to_bm(claim, MARKET)[2]
    q = pricing.quote(claim, MARKET, k, t, b_t)
    m = pricing.quote(claim, MARKET, k, t, 2 * c - b_t)
    assert m.upper == pytest.approx(q.upper, abs=1e-14)
    assert m.lower == pytest.approx(q.lower, abs=1e-14)


def test_k0_bounds_coincide():
    claim = pricing.CorridorClaim(0.8, 1.25, 1.0)
    q = pricing.quote(claim, MARKET, 0.0)
    assert q.upper == q.lower


def test_upper_below_one_for_wide_corridor():
    q = pricing.quote(pricing.CorridorClaim(1e-8, 1e8, 1.0), MARKET, 0.3)
    assert q.upper <= 1.0 and q.upper == pytest.approx(1.0, abs=1e-12)
    assert q.lower == pytest.approx(1.0, abs=1e-12)


def test_discounting():
    q = pricing.PriceQuote(0.5, 0.25, 0.2, 0.0).discounted(0.05, 1.0)
    f = math.exp(-0.05 * 0.8)
    assert (q.upper, q.lower) == (0.5 * f, 0.25 * f)


def test_check_suite_passes():
    res = checks.check_pricing(checks.VerifySettings())
    assert all(r.passed for r in res), [r.line() for r in res if not r.passed]


def test_lower_price_matches_pde_on_mapped_problem():
    claim = pricing.CorridorClaim(0.8, 1.25, 1.0)
    a_B, b_B, _ = pricing.map_claim_to_bm(claim, MARKET)
    p = TerminalPayoff.indicator(a_B, b_B)
    sol = solve_payoff(p, -0.2, Grid1D.for_payoff(p, 1.0, 1601, 1600))
    hs = np.array([-0.5, 0.0, 0.5])
    want = [pricing.lower_price(claim, MARKET, 0.2, 0.0, h) for h in hs]
    assert np.max(np.abs(sol.value(1.0, hs) - want)) <= 1e-3


# ---------------------------------------------------------------- reference digital

def test_reference_is_lognormal_probability_when_r_equals_mu():
    claim = pricing.CorridorClaim(0.9, 1.1, 1.0)
    m = pricing.MarketModel(MU, SIGMA, MU)
    s, mu = SIGMA, MU
    want = math.exp(-mu) * (_Phi((math.log(1.1) - (mu - s * s / 2)) / s) - _Phi((math.log(0.9) - (mu - s * s / 2)) / s))
    assert pricing.bs_reference_digital(claim, m) == pytest.approx(want, abs=1e-15)


def test_reference_wide_corridor_is_discount_factor():
    m = pricing.MarketModel(0.07, 0.3, 0.02)
    assert pricing.bs_reference_digital(pricing.CorridorClaim(1e-12, 1e12, 2.0), m) == pytest.approx(math.exp(-0.04), abs=1e-12)


def test_reference_uses_published_drift():
    # for r != mu the published drift 2 mu - r - sigma^2/2 differs from r - sigma^2/2
    claim = pricing.CorridorClaim(1.0, 1.5, 1.0)
    m = pricing.MarketModel(0.10, 0.2, 0.02)
    mean = 2 * 0.10 - 0.02 - 0.02
    want = math.exp(-0.02) * (_Phi((math.log(1.5) - mean) / 0.2) - _Phi(-mean / 0.2))
    assert pricing.bs_reference_digital(claim, m) == pytest.approx(want, abs=1e-15)
