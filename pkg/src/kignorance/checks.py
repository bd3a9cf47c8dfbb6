"""Verification batteries behind ``kignorance verify``.

Each check compares an implementation against an independent oracle and
returns a :class:`CheckResult` carrying the achieved error and its tolerance.
Output is a pure function of the settings (no timings, fixed seeds).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import closed_form as cf
from . import mc, pde, pricing
from .core_math import JointLaw, joint_density_atom, joint_density_continuous, local_time_laplace, std_normal_pdf
from .payoffs import KIgnoranceModel, TerminalPayoff

SUITES = ("signs", "oracles", "density", "pricing")

FIG_A, FIG_B, FIG_K, FIG_T = 0.0, 1.0, 0.1, 1.0
INDICATOR_H = (-0.5, 0.0, 0.25, 0.5, 0.75, 1.5)
INDICATOR_T = (0.0, 0.5)
QUAD_K = (0.25, 0.5, 1.0)
QUAD_H = (0.0, 0.5, 1.0)
DENSITY_CASES = ((0.25, -1.0), (1.0, 0.0), (4.0, 0.7))
MARGINAL_X = (-2.0, -0.5, 0.0, 0.5, 2.0)
PRICE_K = (0.0, 0.05, 0.1, 0.2, 0.4)
PRICE_CLAIMS = ((0.9, 1.1), (0.8, 1.25), (1.0, 1.5))
PRICE_MARKET = (0.05, 0.2, 0.05)  # mu, sigma, r


@dataclass(frozen=True)
class VerifySettings:
    nx: int = 2001
    nt: int = 4000
    n_paths: int = 200_000
    n_steps: int = 2000
    tanaka_paths: int = 100_000
    tanaka_steps: int = 10_000
    seed: int = mc.DEFAULT_SEED
    sign_grid: int = 21

    @classmethod
    def quick(cls, seed=mc.DEFAULT_SEED):
        return cls(n_paths=40_000, n_steps=1000, tanaka_paths=20_000, tanaka_steps=2000, seed=seed)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    achieved: float
    tolerance: float
    inputs: str = ""

    def line(self):
        s = f"{'PASS' if self.passed else 'FAIL'}  {self.suite}/{self.name}  achieved={self.achieved:.3e}  tol={self.tolerance:.1e}"
        if not self.passed and self.inputs:
            s += f"  inputs: {self.inputs}"
        return s


def _le(suite, name, achieved, tol, inputs=""):
    achieved = float(achieved)
    return CheckResult(suite, name, bool(achieved <= tol), achieved, float(tol), inputs)


def ramp_payoff(a=FIG_A, b=FIG_B, width=0.01):
    """Piecewise linear approximation of ``1{a <= x <= b}``, symmetric about the midpoint."""
    c, half = 0.5 * (a + b), 0.5 * (b - a)

    def phi(x):
        return np.clip((half + 0.5 * width - np.abs(np.asarray(x) - c)) / width, 0.0, 1.0)

    def dphi(x):
        d = np.asarray(x) - c
        inside = np.abs(np.abs(d) - half) < 0.5 * width
        return np.where(inside, -np.sign(d) / width, 0.0)

    return TerminalPayoff.general(phi, dphi, c, -1, breakpoints=(a - width / 2, a + width / 2, b - width / 2, b + width / 2))


class SmoothSymmetricDriver:
    """``g(z) = k z^2 / (1 + |z|)``: even in ``z``, Lipschitz with constant ``k``, ``g(0) = 0``."""

    def __init__(self, k):
        self.k = float(k)
        self.lipschitz = abs(self.k)

    def __call__(self, t, y, z):
        return self.k * z * z / (1.0 + np.abs(z))


# ------------------------------------------------------------ cached solves

@lru_cache(maxsize=None)
def _indicator_solve(a, b, k, T, nx, nt):
    p = TerminalPayoff.indicator(a, b)
    return pde.solve_payoff(p, k, pde.Grid1D.for_payoff(p, T, nx, nt))


@lru_cache(maxsize=None)
def _quadratic_solve(k, T, nx, nt):
    return pde.solve_k_ignorance(lambda x: x * x, k, pde.Grid1D.centered(0.0, 0.0, T, nx, nt))


@lru_cache(maxsize=None)
def _sign_drift_solve(k, T, nx, nt):
    return pde.solve_sign_drift(lambda x: x * x, k, 0.0, 1, pde.Grid1D.centered(0.0, 0.0, T, nx, nt))


# ------------------------------------------------------------ density

def check_density(s: VerifySettings):
    out = []
    for t, level in DENSITY_CASES:
        law = JointLaw(t, level)
        st = math.sqrt(t)
        X, Ymax = 10.0 * st, 12.0 * st
        edges = sorted({-X, X, 0.0, level})
        cont = sum(
            integrate.dblquad(lambda y, x: joint_density_continuous(law, x, y), lo, hi, 0.0, Ymax,
                              epsabs=1e-10, epsrel=1e-10)[0]
            for lo, hi in zip(edges, edges[1:])
        )
        atom = integrate.quad(lambda x: joint_density_atom(law, x), -X, X, points=edges[1:-1],
                              epsabs=1e-12, limit=200)[0]
        tag = f"t={t},l={level}"
        out.append(_le("density", f"mass[{tag}]", abs(cont + atom - 1.0), 1e-6, tag))
        worst = 0.0
        for x in MARGINAL_X:
            m = integrate.quad(lambda y: joint_density_continuous(law, x, y), 0.0, Ymax, epsabs=1e-13)[0]
            worst = max(worst, abs(m + joint_density_atom(law, x) - std_normal_pdf(x / st) / st))
        out.append(_le("density", f"marginal[{tag}]", worst, 1e-6, tag))
        lap = 0.0
        for x in MARGINAL_X:
            for rate in (-0.8, 0.5):
                num = integrate.quad(lambda y: math.exp(-rate * y) * joint_density_continuous(law, x, y),
                                     0.0, Ymax + 40.0 * abs(rate) * t, epsabs=1e-13, limit=200)[0]
                lap = max(lap, abs(num - local_time_laplace(law, x, rate)))
        out.append(_le("density", f"laplace[{tag}]", lap, 1e-9, tag))
        xs = np.array(MARGINAL_X)
        mirror = JointLaw(t, -level)
        sym = max(
            np.max(np.abs(joint_density_atom(law, xs) - joint_density_atom(mirror, -xs))),
            np.max(np.abs(joint_density_continuous(law, xs, 0.3) - joint_density_continuous(mirror, -xs, 0.3))),
        )
        out.append(_le("density", f"reflection[{tag}]", sym, 1e-15, tag))
    return out


# ------------------------------------------------------------ signs

def _sign_battery():
    ind = TerminalPayoff.indicator(FIG_A, FIG_B)
    m_ind = KIgnoranceModel(FIG_K, FIG_T)
    m_q = KIgnoranceModel(0.5, 1.0)
    ramp = ramp_payoff()
    return [
        ("indicator", m_ind, ind, lambda t, h: cf.indicator_Z(m_ind, t, h, FIG_A, FIG_B)),
        ("quadratic", m_q, TerminalPayoff.quadratic(), lambda t, h: cf.quadratic_Z(m_q, t, h)),
        ("digital_low", m_ind, TerminalPayoff.digital_low(FIG_B),
         lambda t, h: cf.digital_low_YZ(m_ind, t, h, FIG_B)[1]),
        ("digital_high", m_ind, TerminalPayoff.digital_high(FIG_A),
         lambda t, h: cf.digital_high_YZ(m_ind, t, h, FIG_A)[1]),
        ("general_ramp", m_ind, ramp,
         lambda t, h: np.array([cf.general_Z(m_ind, ramp, t, float(x)) for x in np.atleast_1d(h)])),
    ]


def sign_grid(model, payoff, n):
    """``n x n`` grid of ``t`` in ``[0, 0.95 T]`` and ``h`` in ``c +- 2`` (``h = c`` included for odd ``n``)."""
    ts = np.linspace(0.0, 0.95 * model.T, n)
    ref = payoff.center if math.isfinite(payoff.center) else payoff.breakpoints[0]
    hs = ref + np.linspace(-2.0, 2.0, n)
    return ts, hs


def expected_sign(payoff, h):
    c = payoff.center
    if math.isinf(c):
        # h - c is -inf for c = +inf and +inf for c = -inf
        return np.full(np.shape(h), int(payoff.direction) * (-1.0 if c > 0 else 1.0))
    return int(payoff.direction) * np.sign(np.asarray(h) - c)


def check_signs(s: VerifySettings):
    out = []
    for name, model, payoff, zfun in _sign_battery():
        ts, hs = sign_grid(model, payoff, s.sign_grid)
        want = expected_sign(payoff, hs)
        off = hs != payoff.center  # h = c is covered by the nodal check
        bad, nodal = 0, 0.0
        for t in ts:
            z = np.asarray(zfun(t, hs), dtype=float)
            bad += int(np.count_nonzero((np.sign(z) != want) & off))
            if math.isfinite(payoff.center):
                nodal = max(nodal, abs(float(np.asarray(zfun(t, np.array([payoff.center])))[0])))
        out.append(_le("signs", f"sign_law[{name}]", bad, 0, f"{len(ts)}x{len(hs)} grid"))
        if math.isfinite(payoff.center):
            out.append(_le("signs", f"nodal[{name}]", nodal, 1e-10))

    def pde_signs(name, sol, c, direction):
        x = sol.x
        dx = sol.grid.dx
        band = np.abs(x - c) > 2.0 * dx
        window = np.abs(x - c) <= 4.0
        bad, worst = 0, 0.0
        j = int(np.argmin(np.abs(x - c)))
        for i in range(1, len(sol.t)):
            w = sol.w[i]
            sel = band & window & (np.abs(w) > 1e-12)
            bad += int(np.count_nonzero(np.sign(w[sel]) != direction * np.sign(x[sel] - c)))
            worst = max(worst, abs(w[j]))
        return [
            _le("signs", f"pde_sign_law[{name}]", bad, 0, f"nx={s.nx}, nt={s.nt}"),
            _le("signs", f"pde_nodal[{name}]", worst, 10.0 * dx),
        ]

    out += pde_signs("indicator", _indicator_solve(FIG_A, FIG_B, FIG_K, FIG_T, s.nx, s.nt), 0.5, -1)
    out += pde_signs("quadratic", _quadratic_solve(0.5, 1.0, s.nx, s.nt), 0.0, 1)
    g = SmoothSymmetricDriver(0.5)
    sol = pde.solve_generic_symmetric_driver(lambda x: x * x, g, pde.Grid1D.centered(0.0, 0.0, 1.0, s.nx, s.nt),
                                             store_every=max(1, s.nt // 20))
    out += pde_signs("generic_driver", sol, 0.0, 1)
    return out


# ------------------------------------------------------------ oracles

def _cfg(s, **kw):
    return replace(mc.PathConfig(n_steps=s.n_steps, n_paths=s.n_paths, seed=s.seed), **kw)


def check_oracles(s: VerifySettings):
    out = []
    m = KIgnoranceModel(FIG_K, FIG_T)
    ind = TerminalPayoff.indicator(FIG_A, FIG_B)
    sol = _indicator_solve(FIG_A, FIG_B, FIG_K, FIG_T, s.nx, s.nt)
    hs = np.array(INDICATOR_H)
    for t in INDICATOR_T:
        closed = cf.indicator_Y(m, t, hs, FIG_A, FIG_B)
        err = np.max(np.abs(sol.value(FIG_T - t, hs) - closed))
        out.append(_le("oracles", f"indicator_pde[t={t}]", err, 1e-3))
        est = mc.estimate_Y(m, ind, t, hs, _cfg(s))
        z = max(abs(e.z_score(y)) for e, y in zip(est, closed))
        out.append(_le("oracles", f"indicator_mc[t={t}]", z, 3.0, f"paths={s.n_paths}, steps={s.n_steps}"))

    q = TerminalPayoff.quadratic()
    qh = np.array(QUAD_H)
    for k in QUAD_K:
        mk = KIgnoranceModel(k, 1.0)
        qs = _quadratic_solve(k, 1.0, s.nx, s.nt)
        out.append(_le("oracles", f"quadratic_Y_pde[k={k}]", np.max(np.abs(qs.value(1.0, qh) - cf.quadratic_Y(mk, 0, qh))), 2e-3))
        out.append(_le("oracles", f"quadratic_Z_pde[k={k}]", np.max(np.abs(qs.derivative(1.0, qh) - cf.quadratic_Z(mk, 0, qh))), 2e-3))
        est = mc.estimate_Y(mk, q, 0.0, qh, _cfg(s))
        z = max(abs(e.z_score(y)) for e, y in zip(est, qs.value(1.0, qh)))
        out.append(_le("oracles", f"quadratic_mc_vs_pde[k={k}]", z, 3.0, f"paths={s.n_paths}, steps={s.n_steps}"))

    mq = KIgnoranceModel(0.5, 1.0)
    out.append(_le("oracles", "general_H_quadratic", abs(cf.general_H(mq, q, 0.0, 0.5) - cf.quadratic_Y(mq, 0.0, 0.5)), 1e-4))
    ramp = ramp_payoff()
    out.append(_le("oracles", "general_H_ramp", abs(cf.general_H(m, ramp, 0.0, 0.0) - cf.indicator_Y(m, 0.0, 0.0, FIG_A, FIG_B)), 5e-3))
    out.append(_le("oracles", "general_Z_ramp", abs(cf.general_Z(m, ramp, 0.0, 0.0) - cf.indicator_Z(m, 0.0, 0.0, FIG_A, FIG_B)), 5e-3))
    out.append(_le("oracles", "initial_value_joint_law",
                   abs(cf.initial_value_joint_law(mq, q) - cf.general_H(mq, q, 0.0, 0.0)), 1e-8))

    drift = _sign_drift_solve(0.5, 1.0, s.nx, s.nt)
    out.append(_le("oracles", "pde_equivalence", np.max(np.abs(drift.u - _quadratic_solve(0.5, 1.0, s.nx, s.nt).u)), 2e-3))
    sd = _sign_drift_solve(0.3, 1.0, s.nx, s.nt)
    out.append(_le("oracles", "sign_drift_quadratic", abs(sd.value(0.5, 0.7) - cf.sign_drift_quadratic(0.5, 0.7, 0.3)), 2e-3))

    lt = []
    cfg = mc.PathConfig(n_steps=s.tanaka_steps, n_paths=s.tanaka_paths, seed=s.seed)
    for _, paths in mc.simulate_paths(cfg, 0.0):
        lt.append(mc.local_time_tanaka(paths, 0.0))
    lt = np.concatenate(lt)
    se = lt.std(ddof=1) / math.sqrt(lt.size)
    out.append(_le("oracles", "tanaka_mean_local_time", abs(lt.mean() - math.sqrt(2.0 / math.pi)) / se, 3.0,
                   f"paths={s.tanaka_paths}, steps={s.tanaka_steps}"))

    xs = np.array([0.4, 0.8])
    est = mc.estimate_w(mq, q, 0.0, xs, _cfg(s))
    z = max(abs(e.z_score(w)) for e, w in zip(est, cf.quadratic_Z(mq, 0.0, xs)))
    out.append(_le("oracles", "stopped_w_mc", z, 3.0, f"paths={s.n_paths}, steps={s.n_steps}"))
    return out


# ------------------------------------------------------------ pricing

def check_pricing(s: VerifySettings):
    out = []
    mu, sigma, r = PRICE_MARKET
    market = pricing.MarketModel(mu, sigma, r)
    worst_bracket, worst_mono, worst_t0, worst_c = 0.0, 0.0, 0.0, 0.0
    for a, b in PRICE_CLAIMS:
        claim = pricing.CorridorClaim(a, b, 1.0)
        up = [pricing.upper_price(claim, market, k, 0.0, 0.0) for k in PRICE_K]
        lo = [pricing.lower_price(claim, market, k, 0.0, 0.0) for k in PRICE_K]
        mid = up[0]
        for u, l in zip(up, lo):
            worst_bracket = max(worst_bracket, l - u, l - mid, mid - u, -l, u - 1.0, 0.0)
        worst_mono = max(worst_mono, -min(np.diff(up)), max(np.diff(lo)), 0.0)
        for k in PRICE_K:
            worst_t0 = max(
                worst_t0,
                abs(pricing.upper_price_t0(claim, market, k) - pricing.upper_price(claim, market, k, 0.0, 0.0)),
                abs(pricing.lower_price_t0(claim, market, k) - pricing.lower_price(claim, market, k, 0.0, 0.0)),
            )
        worst_c = max(worst_c, abs(pricing.map_claim_to_bm(claim, market)[2] - pricing.center_direct(claim, market)))
    out.append(_le("pricing", "bracket", worst_bracket, 1e-14))
    out.append(_le("pricing", "ambiguity_monotone", worst_mono, 0.0))
    out.append(_le("pricing", "t0_formulas", worst_t0, 1e-14))
    out.append(_le("pricing", "center_identity", worst_c, 1e-14))

    claim = pricing.CorridorClaim(0.9, 1.1, 1.0)
    a_B, b_B, _ = pricing.map_claim_to_bm(claim, market)
    for k, label, fn in ((0.1, "upper", pricing.upper_price), (-0.1, "lower", pricing.lower_price)):
        sol = _indicator_solve(a_B, b_B, k, 1.0, s.nx, s.nt)
        err = abs(float(sol.value(1.0, 0.0)) - fn(claim, market, abs(k), 0.0, 0.0))
        out.append(_le("pricing", f"{label}_pde", err, 1e-3))

    rn = pricing.MarketModel(mu, sigma, mu)
    ref = pricing.bs_reference_digital(claim, rn)
    n = 1_000_000
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(s.seed)))
    ST = np.exp((mu - 0.5 * sigma**2) + sigma * rng.standard_normal(n))
    hit = ((ST >= claim.a) & (ST <= claim.b)) * math.exp(-mu)
    z = abs(hit.mean() - ref) / (hit.std(ddof=1) / math.sqrt(n))
    out.append(_le("pricing", "bs_reference_mc[r=mu]", z, 3.0, "paths=1000000"))
    return out


RUNNERS = {"density": check_density, "signs": check_signs, "oracles": check_oracles, "pricing": check_pricing}


def run_suite(name, settings: VerifySettings):
    """Run ``name`` (one of :data:`SUITES` or ``"all"``) and return the list of results."""
    names = SUITES if name == "all" else (name,)
    if any(n not in RUNNERS for n in names):
        raise ValueError(f"unknown suite {name!r}")
    results = []
    for n in names:
        results += RUNNERS[n](settings)
    return results
