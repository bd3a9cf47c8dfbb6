"""Monte Carlo oracles for the k-ignorance BSDE.

``estimate_Y`` reweights Brownian paths by ``exp(+-k int sgn(X - c) dX - k^2 tau / 2)``,
computing the stochastic integral through the discrete Tanaka identity
``int sgn(X - c) dX = |X_tau - c| - |h - c| - L_tau^c``.

``estimate_w`` evaluates the stopped representation of ``u_x``: paths that
reach ``c`` contribute nothing, the rest carry ``phi'(X_tau)`` times the same
exponential weight.

Randomness
----------
Paths are grouped in fixed blocks of :data:`BLOCK_SIZE`. Block ``j`` draws
its increments from a Philox stream keyed by ``SeedSequence(seed, spawn_key=(j,))``,
so every path is a pure function of ``(seed, index, n_steps)`` and results do
not depend on how blocks are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numba
import numpy as np

from .errors import ConfigurationError, DomainError, MonteCarloError
from .payoffs import KIgnoranceModel, TerminalPayoff

BLOCK_SIZE = 512
DEFAULT_SEED = 20180517
MAX_REJECT_FRACTION = 1e-3


@dataclass(frozen=True)
class PathConfig:
    n_steps: int = 2000
    n_paths: int = 200_000
    seed: int = DEFAULT_SEED
    T: float = 1.0

    def __post_init__(self):
        if int(self.n_steps) < 1 or int(self.n_paths) < 1:
            raise ConfigurationError("n_steps and n_paths must be >= 1")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigurationError("T must be positive")

    @property
    def dt(self):
        return self.T / self.n_steps

    @property
    def n_blocks(self):
        return -(-self.n_paths // BLOCK_SIZE)

    def block_range(self, block):
        lo = block * BLOCK_SIZE
        return lo, min(lo + BLOCK_SIZE, self.n_paths)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_paths: int
    n_steps: int
    n_rejected: int = 0

    def z_score(self, target):
        if self.std_error == 0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.std_error

    def within(self, target, n_se=3.0):
        return abs(self.mean - target) <= n_se * self.std_error


def block_increments(cfg: PathConfig, block):
    """``N(0, dt)`` increments for one block, shape ``(paths_in_block, n_steps)``."""
    lo, hi = cfg.block_range(block)
    if lo >= hi:
        raise IndexError(f"block {block} is empty")
    ss = np.random.SeedSequence(int(cfg.seed), spawn_key=(int(block),))
    rng = np.random.Generator(np.random.Philox(ss))
    out = rng.standard_normal((hi - lo, cfg.n_steps))
    out *= math.sqrt(cfg.dt)
    return out


def _cumulate(start, dW):
    paths = np.empty((dW.shape[0], dW.shape[1] + 1))
    paths[:, 0] = start
    np.cumsum(dW, axis=1, out=paths[:, 1:])
    paths[:, 1:] += start
    return paths


def simulate_paths(cfg: PathConfig, start):
    """Yield ``(first_index, paths)`` per block; ``paths`` has shape ``(m, n_steps + 1)``."""
    for block in range(cfg.n_blocks):
        yield cfg.block_range(block)[0], _cumulate(float(start), block_increments(cfg, block))


def simulate_path(cfg: PathConfig, start, index):
    """Regenerate path ``index`` on its own."""
    if not 0 <= index < cfg.n_paths:
        raise IndexError(index)
    block, offset = divmod(index, BLOCK_SIZE)
    return _cumulate(float(start), block_increments(cfg, block)[offset:offset + 1])[0]


def tanaka_parts(path, level):
    """``(|X_T - l| - |X_0 - l|, sum sgn(X_i - l) dX_i)`` along the last axis."""
    path = np.asarray(path, dtype=float)
    dx = np.diff(path, axis=-1)
    ito = np.sum(np.sign(path[..., :-1] - level) * dx, axis=-1)
    return np.abs(path[..., -1] - level) - np.abs(path[..., 0] - level), ito


def local_time_tanaka(path, level):
    """Local time at ``level`` as the Tanaka residual, clamped at zero."""
    jump, ito = tanaka_parts(path, level)
    lt = np.maximum(jump - ito, 0.0)
    return float(lt) if np.ndim(lt) == 0 else lt


@numba.njit(cache=True, nogil=True)
def _path_functionals(dW, starts, level, coarsen, bridge, dt):
    nb, n = dW.shape
    ns = starts.shape[0]
    x_end = np.empty((ns, nb))
    ito = np.empty((ns, nb))
    surv = np.empty((ns, nb))
    hdt = coarsen * dt
    for i in range(ns):
        for p in range(nb):
            x = starts[i]
            acc_ito = 0.0
            alive = 1.0
            j = 0
            while j < n:
                inc = 0.0
                for q in range(coarsen):
                    inc += dW[p, j + q]
                j += coarsen
                d0 = x - level
                s = 0.0
                if d0 > 0:
                    s = 1.0
                elif d0 < 0:
                    s = -1.0
                xn = x + inc
                acc_ito += s * inc
                if alive > 0.0:
                    d1 = xn - level
                    if d0 * d1 <= 0.0:
                        alive = 0.0
                    elif bridge:
                        alive *= 1.0 - math.exp(-2.0 * d0 * d1 / hdt)
                x = xn
            x_end[i, p] = x
            ito[i, p] = acc_ito
            surv[i, p] = alive
    return x_end, ito, surv


def _run_blocks(cfg, starts, level, coarsen=(1,), bridge=False, workers=1):
    """Kernel outputs for each monitoring factor in ``coarsen`` from one set of draws."""
    for m in coarsen:
        if m < 1 or cfg.n_steps % m:
            raise ConfigurationError("n_steps must be a positive multiple of coarsen")
    starts = np.ascontiguousarray(starts, dtype=float)

    def one(block):
        dW = block_increments(cfg, block)
        return [_path_functionals(dW, starts, float(level), int(m), bool(bridge), cfg.dt)
                for m in coarsen]

    blocks = range(cfg.n_blocks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, blocks))
    else:
        parts = [one(b) for b in blocks]
    return [
        tuple(np.concatenate([p[j][i] for p in parts], axis=1) for i in range(3))
        for j in range(len(coarsen))
    ]


def _horizon_cfg(model, t, cfg):
    tau = float(model.remaining(t))
    return tau, replace(cfg, T=tau)


def summarize(values, n_steps):
    """Mean and standard error of per-path values, dropping non-finite ones (at most 0.1%)."""
    ok = np.isfinite(values)
    n_bad = int(values.size - np.count_nonzero(ok))
    if n_bad > MAX_REJECT_FRACTION * values.size:
        raise MonteCarloError(f"{n_bad} of {values.size} weights were not finite")
    v = values[ok]
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return Estimate(float(np.mean(v)), se, int(v.size), int(n_steps), n_bad)


def path_functionals(model: KIgnoranceModel, payoff: TerminalPayoff, t, h, cfg: PathConfig, workers=1):
    """Per-path ``B_T``, local time at ``c``, weight and weighted payoff for each start in ``h``.

    Arrays have shape ``(len(h), n_paths)``.
    """
    hs = np.atleast_1d(np.asarray(h, dtype=float))
    tau, cfg = _horizon_cfg(model, t, cfg)
    c = payoff.center
    s = int(payoff.direction)
    k = model.k
    x_end, ito, _ = _run_blocks(cfg, hs, c, workers=workers)[0]
    if math.isfinite(c):
        jump = np.abs(x_end - c) - np.abs(hs - c)[:, None]
        lt = np.maximum(jump - ito, 0.0)
        signed = jump - lt
    else:
        # level at +-inf: sgn is constant along every path and no local time accrues
        lt = np.zeros_like(x_end)
        signed = ito
    with np.errstate(over="ignore", invalid="ignore"):
        weight = np.exp(s * k * signed - 0.5 * k * k * tau)
        value = payoff.phi(x_end) * weight
    return {"B_T": x_end, "L_T": lt, "weight": weight, "value": value}


def estimate_Y(model: KIgnoranceModel, payoff: TerminalPayoff, t, h, cfg: PathConfig = PathConfig(), workers=1):
    """Weighted-path estimate of ``Y_t`` at ``B_t = h``; a list if ``h`` is an array.

    All starting points share the same Brownian increments.
    """
    f = path_functionals(model, payoff, t, h, cfg, workers)
    est = [summarize(v, cfg.n_steps) for v in f["value"]]
    return est[0] if np.ndim(h) == 0 else est


def _w_values(model, payoff, tau, outputs):
    s = int(payoff.direction)
    k = model.k
    x_end, ito, surv = outputs
    with np.errstate(over="ignore", invalid="ignore"):
        weight = np.exp(s * k * ito - 0.5 * k * k * tau)
        return np.where(surv > 0.0, surv * weight * payoff.dphi(x_end), 0.0)


def _w_setup(payoff, x):
    if not payoff.has_derivative:
        raise DomainError("estimate_w needs a payoff with an evaluable derivative")
    if not math.isfinite(payoff.center):
        raise DomainError("estimate_w needs a finite symmetry center")
    return np.atleast_1d(np.asarray(x, dtype=float))


def estimate_w(model: KIgnoranceModel, payoff: TerminalPayoff, t, x, cfg: PathConfig = PathConfig(),
               coarsen=1, bridge=True, workers=1):
    """Stopped-path estimate of ``Z_t = u_x(T - t, x)``; a list if ``x`` is an array.

    Paths are killed when consecutive monitoring points straddle or touch
    ``c``. With ``bridge=True`` (default) surviving paths are further
    multiplied by the Brownian-bridge probability of not touching ``c``
    between monitoring dates, which removes the discrete-monitoring bias.
    ``coarsen = m`` monitors only every ``m``-th step of the same paths.
    """
    xs = _w_setup(payoff, x)
    tau, cfg = _horizon_cfg(model, t, cfg)
    out = _run_blocks(cfg, xs, payoff.center, (coarsen,), bridge, workers)[0]
    value = _w_values(model, payoff, tau, out)
    est = [summarize(v, cfg.n_steps // coarsen) for v in value]
    return est[0] if np.ndim(x) == 0 else est


def estimate_w_refinement(model: KIgnoranceModel, payoff: TerminalPayoff, t, x,
                          cfg: PathConfig = PathConfig(n_steps=8000), factor=4, bridge=False, workers=1):
    """Coupled ``(coarse, fine)`` estimates: the same paths monitored every ``factor`` steps and every step.

    Without the bridge factor, coarse monitoring misses more barrier hits, so
    on average the coarse estimate lies further from zero than the fine one.
    """
    xs = _w_setup(payoff, x)
    tau, cfg = _horizon_cfg(model, t, cfg)
    coarse, fine = _run_blocks(cfg, xs, payoff.center, (factor, 1), bridge, workers)
    ec = [summarize(v, cfg.n_steps // factor) for v in _w_values(model, payoff, tau, coarse)]
    ef = [summarize(v, cfg.n_steps) for v in _w_values(model, payoff, tau, fine)]
    if np.ndim(x) == 0:
        return ec[0], ef[0]
    return ec, ef
