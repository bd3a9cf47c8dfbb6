"""Finite-difference oracle for ``u_t = u_xx / 2 + g(t, u, u_x)``, ``u(0, x) = phi(x)``.

Here ``t`` is time to maturity: ``Y_t = u(T - t, B_t)``, ``Z_t = u_x(T - t, B_t)``.

Scheme
------
Backward Euler in time, central differences in space. The driver is
linearised around the current iterate ``z0 = D0 u``,
``g(z) ~ beta z + s`` with ``beta = g'(z0)`` and ``s = g(z0) - beta z0``, so each step solves

    (I - dt (D2 / 2 + beta D0)) u^{n+1} = u^n + dt s

and the linearisation is refreshed from ``u^{n+1}`` until it stops changing
(Newton's method on the implicit step, usually 2-3 sweeps). For
``g = k|z|`` the slope is ``k sgn(u_x)`` and ``s = 0``. The matrix is an M-matrix whenever ``L dx <= 1`` for the
Lipschitz constant ``L`` of ``g`` in ``z``, which makes every linear step
monotone and positivity preserving.

Dirichlet data at both ends are Gaussian expectations ``E[phi(x + beta t + sqrt(t) N)]``
with the boundary slope frozen at its value from the start of the step;
``boundary="heat"`` drops the drift.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .errors import ConfigurationError
from .payoffs import TerminalPayoff

logger = logging.getLogger(__name__)

_GH_X, _GH_W = np.polynomial.hermite_e.hermegauss(48)
_GH_W = _GH_W / _GH_W.sum()


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    nx: int
    nt: int
    T: float

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise ConfigurationError("need x_min < x_max")
        if self.nx < 3:
            raise ConfigurationError("nx must be >= 3")
        if self.nt < 1:
            raise ConfigurationError("nt must be >= 1")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigurationError("T must be positive")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self):
        return self.T / self.nt

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @classmethod
    def centered(cls, center, radius, T, nx=2001, nt=4000):
        """Grid on ``center +- max(8 sqrt(T), radius + 8 sqrt(T))``.

        With odd ``nx`` the center is a grid node and the node set is
        mirror symmetric about it.
        """
        half = max(8.0 * math.sqrt(T), radius + 8.0 * math.sqrt(T))
        return cls(center - half, center + half, nx, nt, T)

    @classmethod
    def for_payoff(cls, payoff: TerminalPayoff, T, nx=2001, nt=4000):
        c = payoff.center if math.isfinite(payoff.center) else payoff.breakpoints[0]
        return cls.centered(c, payoff.support_radius, T, nx, nt)


@dataclass
class PdeSolution:
    grid: Grid1D
    t: np.ndarray  # stored time levels
    u: np.ndarray  # shape (len(t), nx)
    w: np.ndarray  # u_x, same shape
    sweeps: np.ndarray  # fixed-point sweeps used per step

    @property
    def x(self):
        return self.grid.x

    def _row(self, arr, tau):
        pos = tau / (self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0
        i = int(round(pos))
        if abs(pos - i) < 1e-9:
            if not 0 <= i < len(self.t):
                raise ValueError(f"time {tau} outside the solved range")
            return arr[i]
        lo = int(math.floor(pos))
        if lo < 0 or lo + 1 >= len(self.t):
            raise ValueError(f"time {tau} outside the solved range")
        f = pos - lo
        return (1.0 - f) * arr[lo] + f * arr[lo + 1]

    def value(self, tau, x):
        """``u(tau, x)``, linear interpolation in ``x`` (and in ``tau`` off the stored levels)."""
        return np.interp(x, self.x, self._row(self.u, tau))

    def derivative(self, tau, x):
        return np.interp(x, self.x, self._row(self.w, tau))


class KIgnoranceDriver:
    """``g(t, y, z) = k |z|`` with its exact secant slope ``k sgn(z)``."""

    def __init__(self, k):
        self.k = float(k)
        self.lipschitz = abs(self.k)

    def __call__(self, t, y, z):
        return self.k * np.abs(z)

    def slope(self, t, y, z):
        return self.k * np.sign(z)


class SignDrift:
    """Frozen coefficient ``drift_sign * k * sgn(x - c)``; used by :func:`solve_sign_drift`."""

    def __init__(self, k, c, drift_sign, x):
        if drift_sign not in (1, -1):
            raise ConfigurationError("drift_sign must be +1 or -1")
        self.lipschitz = abs(float(k))
        self.coef = drift_sign * float(k) * np.sign(x - c)

    def slope(self, t, y, z):
        return self.coef


def _linearize(driver, t, y, z, L):
    """Slope ``beta`` and source ``g(z0) - beta z0`` of the driver around ``z0``.

    Objects with a ``slope`` method are treated as exactly linear in ``z``
    (no source). Plain callables get a Newton linearisation with a central
    difference derivative.
    """
    if hasattr(driver, "slope"):
        return np.clip(np.asarray(driver.slope(t, y, z), dtype=float), -L, L), None
    g0 = np.asarray(driver(t, y, z), dtype=float)
    step = 1e-6 * np.maximum(1.0, np.abs(z))
    dg = (np.asarray(driver(t, y, z + step), dtype=float) - np.asarray(driver(t, y, z - step), dtype=float)) / (2.0 * step)
    beta = np.clip(dg, -L, L)
    return beta, g0 - beta * z


@numba.njit(cache=True)
def _implicit_step(rhs, beta, dt, dx, left, right):
    n = rhs.shape[0]
    diff = 0.5 / (dx * dx)
    adv = 0.5 / dx
    cp = np.empty(n)
    dp = np.empty(n)
    out = np.empty(n)
    cp[0] = 0.0
    dp[0] = left
    for j in range(1, n - 1):
        lo = -dt * (diff - beta[j] * adv)
        di = 1.0 + 2.0 * dt * diff
        up = -dt * (diff + beta[j] * adv)
        m = di - lo * cp[j - 1]
        cp[j] = up / m
        dp[j] = (rhs[j] - lo * dp[j - 1]) / m
    out[n - 1] = right
    for j in range(n - 2, -1, -1):
        out[j] = dp[j] - cp[j] * out[j + 1]
    return out


def _gradient(u, dx):
    z = np.empty_like(u)
    z[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    z[0] = (u[1] - u[0]) / dx
    z[-1] = (u[-1] - u[-2]) / dx
    return z


def extract_w(sol_or_u, dx=None):
    """``u_x``: central differences inside, one-sided at the two ends.

    Accepts a :class:`PdeSolution` or a raw ``(..., nx)`` array plus ``dx``.
    """
    if isinstance(sol_or_u, PdeSolution):
        u, dx = sol_or_u.u, sol_or_u.grid.dx
    else:
        u = np.asarray(sol_or_u, dtype=float)
    return np.gradient(u, dx, axis=-1, edge_order=1)


def _boundary_value(phi, x, drift, t):
    return float(np.dot(_GH_W, phi(x + drift * t + math.sqrt(t) * _GH_X)))


def check_budget(grid: Grid1D, lipschitz):
    """Reject grids on which the linearised step could lose monotonicity."""
    L = abs(float(lipschitz))
    if L * grid.dt / grid.dx > 0.5:
        raise ConfigurationError(
            f"stability budget violated: L*dt/dx = {L * grid.dt / grid.dx:.3g} > 0.5"
        )
    if L * grid.dx > 1.0:
        raise ConfigurationError(
            f"cell Peclet bound violated: L*dx = {L * grid.dx:.3g} > 1"
        )


def solve_generic_symmetric_driver(
    phi: Callable,
    g,
    grid: Grid1D,
    lipschitz=None,
    store_every=1,
    boundary="drift",
    max_sweeps=50,
    sweep_tol=1e-12,
) -> PdeSolution:
    """Solve ``u_t = u_xx / 2 + g(t, u, u_x)`` with ``g(t, y, 0) = 0``.

    ``g`` is a vectorised callable ``g(t, y, z)``; an object with a
    ``slope(t, y, z)`` method supplies the secant slope directly, and a
    ``lipschitz`` attribute is used when the argument is omitted. Sweeps
    stop once the slope repeats exactly or the update falls below
    ``sweep_tol`` relative to ``max |u|``.
    """
    if lipschitz is None:
        lipschitz = getattr(g, "lipschitz", None)
    if lipschitz is None:
        raise ConfigurationError("a Lipschitz constant for g in z is required")
    L = abs(float(lipschitz))
    check_budget(grid, L)
    if boundary not in ("drift", "heat"):
        raise ConfigurationError("boundary must be 'drift' or 'heat'")
    if store_every < 1:
        raise ConfigurationError("store_every must be >= 1")

    x = grid.x
    dx, dt = grid.dx, grid.dt
    u = np.asarray(phi(x), dtype=float).copy()
    if u.shape != x.shape:
        raise ConfigurationError("phi must be vectorised")

    rows, times = [u.copy()], [0.0]
    sweeps = np.zeros(grid.nt, dtype=np.int64)
    for n in range(grid.nt):
        t_next = (n + 1) * dt
        cur = u
        beta = None
        for sweep in range(1, max_sweeps + 1):
            z = _gradient(cur, dx)
            new_beta, src = _linearize(g, t_next, cur, z, L)
            if src is None and beta is not None and np.array_equal(new_beta, beta):
                break
            beta = new_beta
            if sweep == 1:
                # boundary data use the slope from the start of the step
                bl, br = (beta[0], beta[-1]) if boundary == "drift" else (0.0, 0.0)
                left = _boundary_value(phi, x[0], bl, t_next)
                right = _boundary_value(phi, x[-1], br, t_next)
            rhs = u if src is None else u + dt * src
            nxt = _implicit_step(rhs, beta, dt, dx, left, right)
            if sweep > 1 and np.max(np.abs(nxt - cur)) <= sweep_tol * max(1.0, np.max(np.abs(nxt))):
                cur = nxt
                break
            cur = nxt
        else:
            logger.debug("fixed point not reached at step %d", n)
        sweeps[n] = sweep
        u = cur
        if (n + 1) % store_every == 0:
            rows.append(u.copy())
            times.append(t_next)

    U = np.array(rows)
    return PdeSolution(grid, np.array(times), U, extract_w(U, dx), sweeps)


def solve_k_ignorance(phi: Callable, k, grid: Grid1D, **kw) -> PdeSolution:
    """``u_t = u_xx / 2 + k |u_x|``; negative ``k`` gives the lower (``-|k| |u_x|``) equation."""
    return solve_generic_symmetric_driver(phi, KIgnoranceDriver(k), grid, **kw)


def solve_sign_drift(phi: Callable, k, c, drift_sign, grid: Grid1D, **kw) -> PdeSolution:
    """Linear ``v_t = v_xx / 2 + drift_sign * k * sgn(x - c) v_x``."""
    return solve_generic_symmetric_driver(phi, SignDrift(k, c, drift_sign, grid.x), grid, **kw)


def solve_payoff(payoff: TerminalPayoff, k, grid: Grid1D, **kw) -> PdeSolution:
    """k-ignorance solve with jump payoffs mollified at scale ``dx`` (``eps = dx**2``)."""
    return solve_k_ignorance(payoff.mollified(grid.dx**2), k, grid, **kw)
