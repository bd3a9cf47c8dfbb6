"""Explicit solutions ``Y_t = H(B_t)``, ``Z_t = dH/dh (B_t)`` of the k-ignorance BSDE.

All functions take the current Brownian value ``h = B_t`` and broadcast over
array ``t``/``h``. ``tau = T - t`` is the time to maturity throughout.

Two quadratic-payoff variants exist. :func:`quadratic_Y` / :func:`quadratic_Z`
are the corrected expressions that agree with both numerical oracles;
:func:`quadratic_Y_literal` / :func:`quadratic_Z_literal` transcribe the
originally published ones, which differ for ``h != 0`` (see FORMULA_ERRATA.md).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .core_math import JointLaw, _out, joint_density_atom, joint_density_continuous, local_time_laplace
from .errors import DomainError, QuadratureError
from .payoffs import Kind, KIgnoranceModel, TerminalPayoff

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _check_h(h):
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)):
        raise DomainError("h must be finite")
    return h


def _check_corridor(a, b):
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise DomainError(f"need finite a < b, got a={a}, b={b}")


# ---------------------------------------------------------------- indicator

def indicator_Y(model: KIgnoranceModel, t, h, a, b):
    """Solution for ``phi = 1{a <= x <= b}``."""
    _check_corridor(a, b)
    tau = model.remaining(t)
    h = _check_h(h)
    k = model.k
    c = 0.5 * (a + b)
    half = 0.5 * (b - a)
    d = np.abs(h - c)
    st = np.sqrt(tau)
    y = ndtr(-(d - k * tau - half) / st) - math.exp(-k * (b - a)) * ndtr(-(d - k * tau + half) / st)
    return _out(y)


def indicator_Z(model: KIgnoranceModel, t, h, a, b):
    _check_corridor(a, b)
    tau = model.remaining(t)
    h = _check_h(h)
    k = model.k
    c = 0.5 * (a + b)
    half = 0.5 * (b - a)
    d = np.abs(h - c)
    # e^{-u^2/2tau} - e^{-k(b-a)} e^{-v^2/2tau} = e^{-u^2/2tau} (1 - e^{-2 half d / tau})
    u = d - k * tau - half
    bracket = np.exp(-u * u / (2.0 * tau)) * -np.expm1(-2.0 * half * d / tau)
    z = -np.sign(h - c) * bracket / np.sqrt(2.0 * np.pi * tau)
    return _out(z)


def digital_low_YZ(model: KIgnoranceModel, t, h, b):
    """``phi = 1{x <= b}``; returns ``(Y, Z)`` with ``Z < 0``."""
    tau = model.remaining(t)
    h = _check_h(h)
    st = np.sqrt(tau)
    arg = (h - model.k * tau - b) / st
    return _out(ndtr(-arg)), _out(-_pdf(arg) / st)


def digital_high_YZ(model: KIgnoranceModel, t, h, a):
    """``phi = 1{x >= a}``; returns ``(Y, Z)`` with ``Z > 0``."""
    tau = model.remaining(t)
    h = _check_h(h)
    st = np.sqrt(tau)
    arg = (h + model.k * tau - a) / st
    return _out(ndtr(arg)), _out(_pdf(arg) / st)


# ---------------------------------------------------------------- quadratic

def _quadratic_k(model):
    if model.k == 0:
        raise DomainError(
            "quadratic closed form divides by k; for k = 0 use Y = h**2 + (T - t), Z = 2 h"
        )
    return model.k


def _quadratic_value(k, tau, x):
    st = np.sqrt(tau)
    m = x + k * tau
    inv = 1.0 / (2.0 * k * k)
    return (
        inv
        + np.sqrt(tau / (2.0 * np.pi)) * (m + 1.0 / k) * np.exp(-m * m / (2.0 * tau))
        + (m * m + tau - inv) * ndtr(m / st)
        + np.exp(-2.0 * k * x) * (tau - x / k - inv) * ndtr(-(x - k * tau) / st)
    )


def quadratic_Y(model: KIgnoranceModel, t, h):
    """Solution for ``phi(x) = x**2`` (``k != 0``)."""
    k = _quadratic_k(model)
    tau = model.remaining(t)
    return _out(_quadratic_value(k, tau, np.abs(_check_h(h))))


def quadratic_Z(model: KIgnoranceModel, t, h):
    k = _quadratic_k(model)
    tau = model.remaining(t)
    h = _check_h(h)
    x = np.abs(h)
    st = np.sqrt(tau)
    m = x + k * tau
    n = k * tau - x
    z = 2.0 * np.sign(h) * (m * ndtr(m / st) - n * np.exp(-2.0 * k * x) * ndtr(n / st))
    return _out(z)


def quadratic_Y_literal(model: KIgnoranceModel, t, h):
    """Published quadratic-payoff ``Y`` transcribed term by term (incorrect for h != 0)."""
    k = _quadratic_k(model)
    tau = model.remaining(t)
    x = np.abs(_check_h(h))
    st = np.sqrt(tau)
    m = x + k * tau
    inv = 1.0 / (2.0 * k * k)
    y = (
        inv
        + np.sqrt(tau / (2.0 * np.pi)) * (m + 1.0 / k) * np.exp(-m * m / (2.0 * tau))
        + (m * m + tau - inv) * ndtr(m / st)
        + np.exp(-2.0 * k * x) * (x + tau - inv) * ndtr(-(x - k * tau) / st)
    )
    return _out(y)


def quadratic_Z_literal(model: KIgnoranceModel, t, h):
    """Published quadratic-payoff ``Z`` transcribed term by term."""
    k = _quadratic_k(model)
    tau = model.remaining(t)
    h = _check_h(h)
    s = np.sign(h)
    x = np.abs(h)
    st = np.sqrt(tau)
    m = x + k * tau
    inv = 1.0 / (2.0 * k * k)
    g = np.exp(-m * m / (2.0 * tau))
    e = np.exp(-2.0 * k * x)
    z = (
        np.sqrt(tau / (2.0 * np.pi)) * s * g * (1.0 + (m + 1.0 / k) * (-m / tau))
        + 2.0 * s * m * ndtr(m / st)
        + (m * m - k * tau - inv) * s / np.sqrt(2.0 * np.pi * tau) * g
        + e * s * ndtr(-(x - k * tau) / st) * (-2.0 * k * (x + tau - inv) + 1.0)
        - e * (x + tau - inv) * s / np.sqrt(2.0 * np.pi * tau)
        * np.exp(-(x - k * tau) ** 2 / (2.0 * tau))
    )
    return _out(z)


def sign_drift_quadratic(t, x, k):
    """Solution of ``v_t = v_xx / 2 + k sgn(x) v_x``, ``v(0, x) = x**2`` at time ``t > 0``."""
    if k == 0:
        raise DomainError("formula divides by k; for k = 0 use v = x**2 + t")
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise DomainError("t must be > 0")
    return _out(_quadratic_value(k, t, np.abs(_check_h(x))))


def sign_drift_quadratic_literal(t, x, k, T):
    """Published form of the same solution, which carries a stray ``T - t``."""
    if k == 0:
        raise DomainError("formula divides by k")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be > 0")
    x = np.abs(_check_h(x))
    st = np.sqrt(t)
    m = x + k * t
    inv = 1.0 / (2.0 * k * k)
    v = (
        inv
        + np.sqrt(t / (2.0 * np.pi)) * (m + 1.0 / k) * np.exp(-m * m / (2.0 * t))
        + (m * m + t - inv) * ndtr(m / st)
        + np.exp(-2.0 * k * x) * (x + T - t - inv) * ndtr(-(x - k * t) / st)
    )
    return _out(v)


# ---------------------------------------------------------------- general payoffs

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_rule(edges, width):
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((hi - lo) / width)))
        e = np.linspace(lo, hi, n + 1)
        half = 0.5 * np.diff(e)[:, None]
        mid = 0.5 * (e[:-1] + e[1:])[:, None]
        nodes.append((mid + half * _GL_NODES).ravel())
        weights.append((half * _GL_WEIGHTS).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _H_once(payoff, k, tau, h, width, window):
    c = payoff.center
    s = int(payoff.direction)
    lo, hi = h - window, h + window
    cuts = {lo, hi}
    for p in (c, *payoff.breakpoints):
        if lo < p < hi:
            cuts.add(p)
    x_end, w = _panel_rule(np.array(sorted(cuts)), width)
    law = JointLaw(tau, c - h)
    x = x_end - h  # Brownian increment over [t, T]
    dist = abs(c - h)
    tilt = np.exp(s * k * (np.abs(x_end - c) - dist))
    dens = local_time_laplace(law, x, s * k) + joint_density_atom(law, x)
    return math.exp(-0.5 * k * k * tau) * float(np.sum(w * payoff.phi(x_end) * tilt * dens))


def general_H(model: KIgnoranceModel, payoff: TerminalPayoff, t, h, rtol=1e-10, atol=1e-13):
    """``Y_t = H(h)`` by integrating the payoff against the (Brownian, local time) law.

    The exponential tilt is ``exp(+-k (|x - c + h| - |c - h| - y))`` with the sign
    given by ``payoff.direction``. The local-time variable is integrated
    analytically (:func:`local_time_laplace`); the remaining integral over the
    terminal position uses composite Gauss-Legendre panels split at the center
    and at the payoff's breakpoints, refined once to estimate the error.
    """
    if not math.isfinite(payoff.center):
        raise DomainError("general_H needs a finite symmetry center")
    tau = float(model.remaining(t))
    h = float(_check_h(h))
    k = model.k
    st = math.sqrt(tau)
    window = 14.0 * st + 2.0 * abs(k) * tau
    coarse = _H_once(payoff, k, tau, h, 0.1 * st, window)
    fine = _H_once(payoff, k, tau, h, 0.05 * st, window)
    err = abs(fine - coarse)
    if err > max(atol, rtol * abs(fine)):
        raise QuadratureError(
            f"general_H did not converge at h={h}, t={t}: |fine - coarse| = {err:.3e}",
            achieved=err,
            requested=max(atol, rtol * abs(fine)),
        )
    return fine


def general_Z(model: KIgnoranceModel, payoff: TerminalPayoff, t, h, **quad):
    """``Z = dH/dh`` by a central difference refined once with Richardson extrapolation."""
    h = float(_check_h(h))
    step = max(1e-5, 1e-7 * abs(h))

    def central(dh):
        return (general_H(model, payoff, t, h + dh, **quad) - general_H(model, payoff, t, h - dh, **quad)) / (2.0 * dh)

    return (4.0 * central(0.5 * step) - central(step)) / 3.0


def initial_value_joint_law(model: KIgnoranceModel, payoff: TerminalPayoff, epsabs=1e-11):
    """``Y_0`` evaluated as a genuine 2-D integral over ``(B_T, L_T^c)``.

    Independent of :func:`general_H`: the local-time variable is integrated
    numerically here with :func:`scipy.integrate.dblquad`.
    """
    c = payoff.center
    if not math.isfinite(c):
        raise DomainError("needs a finite symmetry center")
    k, T = model.k, model.T
    s = int(payoff.direction)
    law = JointLaw(T, c)
    rT = math.sqrt(T)
    R = 12.0 * rT + 2.0 * abs(k) * T
    ymax = 14.0 * rT + 2.0 * abs(k) * T
    cuts = sorted({-R + min(c, 0.0), R + max(c, 0.0), c, *(p for p in payoff.breakpoints)})

    def cont(y, x):
        return float(payoff.phi(x)) * math.exp(s * k * (abs(x - c) - abs(c) - y)) * joint_density_continuous(law, x, y)

    def atom(x):
        return float(payoff.phi(x)) * math.exp(s * k * (abs(x - c) - abs(c))) * joint_density_atom(law, x)

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, _ = integrate.dblquad(cont, lo, hi, 1e-300, ymax, epsabs=epsabs, epsrel=1e-11)
        total += v
        v, _ = integrate.quad(atom, lo, hi, epsabs=epsabs, epsrel=1e-11, limit=200)
        total += v
    return math.exp(-0.5 * k * k * T) * total


# ---------------------------------------------------------------- dispatch

def solution_Y(model: KIgnoranceModel, payoff: TerminalPayoff, t, h):
    """``Y_t`` for any payoff family (closed form where one exists)."""
    if payoff.kind is Kind.INDICATOR:
        return indicator_Y(model, t, h, payoff.a, payoff.b)
    if payoff.kind is Kind.DIGITAL_LOW:
        return digital_low_YZ(model, t, h, payoff.b)[0]
    if payoff.kind is Kind.DIGITAL_HIGH:
        return digital_high_YZ(model, t, h, payoff.a)[0]
    if payoff.kind is Kind.QUADRATIC:
        if model.k == 0:
            return _out(np.asarray(h, dtype=float) ** 2 + model.remaining(t))
        return quadratic_Y(model, t, h)
    return general_H(model, payoff, t, h)


def solution_Z(model: KIgnoranceModel, payoff: TerminalPayoff, t, h):
    if payoff.kind is Kind.INDICATOR:
        return indicator_Z(model, t, h, payoff.a, payoff.b)
    if payoff.kind is Kind.DIGITAL_LOW:
        return digital_low_YZ(model, t, h, payoff.b)[1]
    if payoff.kind is Kind.DIGITAL_HIGH:
        return digital_high_YZ(model, t, h, payoff.a)[1]
    if payoff.kind is Kind.QUADRATIC:
        if model.k == 0:
            model.remaining(t)
            return _out(2.0 * np.asarray(h, dtype=float))
        return quadratic_Z(model, t, h)
    return general_Z(model, payoff, t, h)
