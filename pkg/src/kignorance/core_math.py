"""Normal distribution helpers and the joint law of Brownian motion and its local time.

Density conventions
-------------------
The law of ``(B_t, L_t^l)`` (Brownian motion started at 0 and its local time
at level ``l``) has two pieces:

* a continuous part on ``y > 0``, returned by :func:`joint_density_continuous`
  as a density **per unit dx dy**;
* an atom on ``y = 0`` (paths that never reach ``l``), returned by
  :func:`joint_density_atom` as a density **per unit dx** only.

Integrating the first over ``x`` and ``y > 0`` and adding the integral of the
second over ``x`` gives total mass one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import DomainError

SQRT_2PI = np.sqrt(2.0 * np.pi)


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return arr


def _out(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr


def std_normal_cdf(x):
    """Standard normal cdf, accurate to ~1e-16 absolute (erfc based)."""
    return _out(ndtr(_finite("x", x)))


def std_normal_pdf(x):
    x = _finite("x", x)
    return _out(np.exp(-0.5 * x * x) / SQRT_2PI)


@dataclass(frozen=True)
class JointLaw:
    """Law of ``(B_t, L_t^level)`` for a standard Brownian motion with ``B_0 = 0``."""

    t: float
    level: float

    def __post_init__(self):
        if not np.isfinite(self.t) or self.t <= 0:
            raise DomainError(f"t must be a positive finite time, got {self.t!r}")
        if not np.isfinite(self.level):
            raise DomainError(f"level must be finite, got {self.level!r}")

    def reach(self, x):
        """``|x - l| + |l|``: shortest path length from 0 to ``x`` through ``l``."""
        return np.abs(np.asarray(x, dtype=float) - self.level) + abs(self.level)


def _scalars(*vals):
    return all(type(v) is float and math.isfinite(v) for v in vals)


def joint_density_continuous(law: JointLaw, x, y):
    if _scalars(x, y):
        # scalar fast path for quadrature callbacks
        if y <= 0:
            raise DomainError("y must be > 0; use joint_density_atom for the y = 0 mass")
        s = y + abs(x - law.level) + abs(law.level)
        return s * math.exp(-s * s / (2.0 * law.t)) / math.sqrt(2.0 * math.pi * law.t**3)
    x = _finite("x", x)
    y = _finite("y", y)
    if np.any(y <= 0):
        raise DomainError("y must be > 0; use joint_density_atom for the y = 0 mass")
    t = law.t
    s = y + law.reach(x)
    return _out(s * np.exp(-s * s / (2.0 * t)) / np.sqrt(2.0 * np.pi * t**3))


def joint_density_atom(law: JointLaw, x):
    t = law.t
    if _scalars(x):
        r = abs(x - law.level) + abs(law.level)
        return math.exp(-x * x / (2.0 * t)) * -math.expm1(-(r * r - x * x) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    x = _finite("x", x)
    r = law.reach(x)
    # exp(-x^2/2t) - exp(-r^2/2t) with r >= |x|, written to stay >= 0 in floating point
    val = np.exp(-x * x / (2.0 * t)) * -np.expm1(-(r * r - x * x) / (2.0 * t))
    return _out(val / np.sqrt(2.0 * np.pi * t))


def local_time_laplace(law: JointLaw, x, rate):
    """``int_0^inf exp(-rate * y) * joint_density_continuous(law, x, y) dy``.

    Closed form obtained by completing the square in ``y``; ``rate`` may have
    either sign. With ``rate = 0`` this is the mass of paths ending at ``x``
    that touched the level, so adding :func:`joint_density_atom` recovers the
    Gaussian density.
    """
    x = _finite("x", x)
    rate = float(rate)
    t = law.t
    r = law.reach(x)
    gauss = np.exp(-r * r / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)
    if rate == 0.0:
        return _out(gauss)
    arg = -(r + rate * t) / np.sqrt(t)
    tail = np.exp(rate * r + 0.5 * rate * rate * t + log_ndtr(arg))
    return _out(gauss - rate * tail)
