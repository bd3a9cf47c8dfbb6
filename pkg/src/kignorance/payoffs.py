"""Model parameters and terminal payoffs for the k-ignorance BSDE

    Y_t = phi(B_T) + int_t^T k |Z_s| ds - int_t^T Z_s dB_s.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr

from .errors import DomainError


class Kind(enum.Enum):
    QUADRATIC = "quadratic"
    INDICATOR = "indicator"
    DIGITAL_LOW = "digital_low"
    DIGITAL_HIGH = "digital_high"
    GENERAL = "general"


class Direction(enum.IntEnum):
    """Monotonicity of the payoff on ``[c, inf)``; the value is the sign multiplier."""

    INCREASING = 1
    DECREASING = -1


@dataclass(frozen=True)
class KIgnoranceModel:
    k: float
    T: float

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise DomainError(f"k must be finite, got {self.k!r}")
        if not math.isfinite(self.T) or self.T <= 0:
            raise DomainError(f"T must be positive, got {self.T!r}")

    def remaining(self, t):
        """Time to maturity ``T - t``; rejects ``t`` outside ``[0, T)``."""
        t = np.asarray(t, dtype=float)
        if np.any(~np.isfinite(t)) or np.any(t < 0):
            raise DomainError(f"t must be finite and >= 0, got {t!r}")
        if np.any(t >= self.T):
            raise DomainError(
                "t must be < T; at t = T the solution is the terminal payoff itself"
            )
        return self.T - t


@dataclass(frozen=True)
class SolutionSample:
    t: float
    b: float
    y: float
    z: float


@dataclass(frozen=True)
class TerminalPayoff:
    """Symmetric payoff ``phi`` about ``center`` and monotone on ``[center, inf)``.

    Use the constructors :meth:`quadratic`, :meth:`indicator`,
    :meth:`digital_low`, :meth:`digital_high` and :meth:`general`.
    Digital payoffs have an infinite center (``-inf`` for ``1{x <= b}``,
    ``+inf`` for ``1{x >= a}``); both count as decreasing on the right half,
    which is what makes ``sgn Z = -sgn(h - c)`` hold for them as well.
    """

    kind: Kind
    center: float
    direction: Direction
    a: Optional[float] = None
    b: Optional[float] = None
    phi_fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    dphi_fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    breakpoints: tuple = ()

    @classmethod
    def quadratic(cls):
        return cls(Kind.QUADRATIC, 0.0, Direction.INCREASING)

    @classmethod
    def indicator(cls, a, b):
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
            raise DomainError(f"indicator needs finite a < b, got a={a}, b={b}")
        return cls(Kind.INDICATOR, 0.5 * (a + b), Direction.DECREASING, a=a, b=b,
                   breakpoints=(a, b))

    @classmethod
    def digital_low(cls, b):
        b = float(b)
        if not math.isfinite(b):
            raise DomainError("b must be finite")
        return cls(Kind.DIGITAL_LOW, -math.inf, Direction.DECREASING, b=b, breakpoints=(b,))

    @classmethod
    def digital_high(cls, a):
        a = float(a)
        if not math.isfinite(a):
            raise DomainError("a must be finite")
        return cls(Kind.DIGITAL_HIGH, math.inf, Direction.DECREASING, a=a, breakpoints=(a,))

    @classmethod
    def general(cls, phi, dphi, center, direction, breakpoints=(), check=True):
        """Wrap a vectorised ``phi`` (and optionally ``phi'``).

        With ``check=True`` symmetry about ``center`` and monotonicity on the
        right half are verified on a sample of points.
        """
        direction = Direction(direction)
        p = cls(Kind.GENERAL, float(center), direction, phi_fn=phi, dphi_fn=dphi,
                breakpoints=tuple(float(x) for x in breakpoints))
        if check:
            p.check_assumptions()
        return p

    def check_assumptions(self, radius=6.0, n=241, atol=1e-12):
        c = self.center
        d = np.linspace(0.0, radius, n)
        right = np.asarray(self.phi(c + d), dtype=float)
        left = np.asarray(self.phi(c - d), dtype=float)
        scale = max(1.0, float(np.max(np.abs(right))))
        if np.max(np.abs(right - left)) > atol * scale:
            raise DomainError(f"payoff is not symmetric about c={c}")
        steps = np.diff(right) * int(self.direction)
        if np.any(steps < -atol * scale):
            raise DomainError(
                f"payoff is not {self.direction.name.lower()} on [c, inf) for c={c}"
            )
        return True

    @property
    def has_derivative(self):
        return self.kind is Kind.QUADRATIC or self.dphi_fn is not None

    @property
    def support_radius(self):
        """Half-width of the region around ``center`` where the payoff varies."""
        if self.kind is Kind.INDICATOR:
            return 0.5 * (self.b - self.a)
        if self.breakpoints and math.isfinite(self.center):
            return max(abs(x - self.center) for x in self.breakpoints)
        return 0.0

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is Kind.QUADRATIC:
            return x * x
        if self.kind is Kind.INDICATOR:
            return ((x >= self.a) & (x <= self.b)).astype(float)
        if self.kind is Kind.DIGITAL_LOW:
            return (x <= self.b).astype(float)
        if self.kind is Kind.DIGITAL_HIGH:
            return (x >= self.a).astype(float)
        return np.asarray(self.phi_fn(x), dtype=float)

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is Kind.QUADRATIC:
            return 2.0 * x
        if self.dphi_fn is None:
            raise DomainError(f"{self.kind.value} payoff has no evaluable derivative")
        return np.asarray(self.dphi_fn(x), dtype=float)

    def mollified(self, eps):
        """Gaussian smoothing ``x -> E[phi(x + sqrt(eps) N)]`` for the jump payoffs.

        Other kinds are returned unchanged.
        """
        if eps <= 0:
            raise DomainError("eps must be > 0")
        s = math.sqrt(eps)
        if self.kind is Kind.INDICATOR:
            a, b = self.a, self.b
            return lambda x: ndtr((b - np.asarray(x)) / s) - ndtr((a - np.asarray(x)) / s)
        if self.kind is Kind.DIGITAL_LOW:
            b = self.b
            return lambda x: ndtr((b - np.asarray(x)) / s)
        if self.kind is Kind.DIGITAL_HIGH:
            a = self.a
            return lambda x: ndtr((np.asarray(x) - a) / s)
        return self.phi
