"""Command line front end: ``kignorance {price,path-demo,verify,solve-pde,simulate}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import csv
import io
import math
import sys

import click
import numpy as np

from . import checks, closed_form, mc, pde, pricing
from .errors import ConfigurationError, DomainError
from .payoffs import KIgnoranceModel, TerminalPayoff

EXIT_VERIFY = 1
EXIT_IO = 3
TERMINALS = ("indicator", "quadratic", "digital-low", "digital-high")


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text, output):
    """Write ``text`` to ``output`` (``None`` or ``-`` means stdout); I/O failures exit with 3."""
    if output in (None, "-"):
        click.echo(text, nl=False)
        return
    try:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        click.echo(f"error: cannot write {output}: {exc.strerror or exc}", err=True)
        sys.exit(EXIT_IO)


def parse_config(path):
    """Plain ``key = value`` lines; ``#`` starts a comment. Keys may use ``-`` or ``_``."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        click.echo(f"error: cannot read config {path}: {exc.strerror or exc}", err=True)
        sys.exit(EXIT_IO)
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_").lower()] = value
    return out


def _payoff(terminal, a, b):
    if terminal == "indicator":
        return TerminalPayoff.indicator(a, b)
    if terminal == "quadratic":
        return TerminalPayoff.quadratic()
    if terminal == "digital-low":
        return TerminalPayoff.digital_low(b)
    return TerminalPayoff.digital_high(a)


def _guard(fn, *args, **kw):
    """Turn precondition failures into usage errors before anything is written."""
    try:
        return fn(*args, **kw)
    except (DomainError, ConfigurationError) as exc:
        raise click.UsageError(str(exc)) from None


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="key = value file with default option values; flags win.")
@click.pass_context
def cli(ctx, config_path):
    """Explicit solutions, oracles and robust prices for the k-ignorance BSDE."""
    if config_path:
        values = parse_config(config_path)
        ctx.default_map = {
            name: {p.name: values[p.name] for p in cmd.params if p.name in values}
            for name, cmd in cli.commands.items()
        }


seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=mc.DEFAULT_SEED,
                           envvar="KIGNORANCE_SEED", show_default=True,
                           help="RNG seed (default may be overridden by KIGNORANCE_SEED).")
output_option = click.option("--output", "-o", default=None, help="Output file (default stdout).")


@cli.command()
@click.option("--terminal", type=click.Choice(["indicator"]), default="indicator", show_default=True)
@click.option("--a", type=float, required=True, help="Lower barrier on S.")
@click.option("--b", type=float, required=True, help="Upper barrier on S.")
@click.option("--sigma", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--r", type=float, default=0.0, show_default=True, help="Rate, used only by --discount.")
@click.option("--k", type=float, required=True, help="Ambiguity radius.")
@click.option("--T", "T", type=float, default=1.0, show_default=True)
@click.option("--t", "t", type=float, default=0.0, show_default=True, help="Quote time.")
@click.option("--bt", type=float, default=0.0, show_default=True, help="Brownian state B_t.")
@click.option("--discount/--no-discount", default=False, help="Multiply quotes by exp(-r (T - t)).")
@click.option("--format", "fmt", type=click.Choice(["plain", "csv"]), default="plain", show_default=True)
@output_option
def price(terminal, a, b, sigma, mu, r, k, T, t, bt, discount, fmt, output):
    """Robust upper and lower prices of the corridor claim 1{a <= S_T <= b}."""

    def compute():
        market = pricing.MarketModel(mu, sigma, r)
        claim = pricing.CorridorClaim(a, b, T)
        a_B, b_B, c = pricing.map_claim_to_bm(claim, market)
        q = pricing.quote(claim, market, k, t, bt)
        ref = pricing.upper_price(claim, market, 0.0, t, bt)
        f = math.exp(-r * (T - t)) if discount else 1.0
        return a_B, b_B, c, q.upper * f, q.lower * f, ref * f

    a_B, b_B, c, up, lo, ref = _guard(compute)
    if fmt == "csv":
        text = to_csv(["a_B", "b_B", "c", "k", "upper", "lower", "k0_price", "discounted"],
                      [[a_B, b_B, c, k, up, lo, ref, int(discount)]])
    else:
        text = "".join(f"{name:<9}= {_fmt(v)}\n" for name, v in
                       (("a_B", a_B), ("b_B", b_B), ("c", c), ("k", k),
                        ("upper", up), ("lower", lo), ("k0_price", ref)))
        text += f"discounted = {'yes' if discount else 'no'}\n"
    _emit(text, output)


@cli.command("path-demo")
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--k", type=float, default=0.1, show_default=True)
@click.option("--T", "T", type=float, default=1.0, show_default=True)
@click.option("--n-steps", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--index", type=click.IntRange(min=0), default=0, show_default=True, help="Path index in the stream.")
@seed_option
@output_option
def path_demo(a, b, k, T, n_steps, index, seed, output):
    """One Brownian path with Z_t of the indicator payoff along it.

    Columns t, B_t, Z_t and sign = sgn(Z_t) sgn(B_t - c), which is -1 or 0.
    The row at t = T is omitted because Z_T is not defined for a jump payoff.
    """

    def compute():
        model = KIgnoranceModel(k, T)
        TerminalPayoff.indicator(a, b)
        cfg = mc.PathConfig(n_steps=n_steps, n_paths=index + 1, seed=seed, T=T)
        path = mc.simulate_path(cfg, 0.0, index)[:-1]
        ts = np.arange(n_steps) * T / n_steps
        z = closed_form.indicator_Z(model, ts, path, a, b)
        return ts, path, z, np.sign(z) * np.sign(path - 0.5 * (a + b))

    ts, path, z, sign = _guard(compute)
    _emit(to_csv(["t", "B_t", "Z_t", "sign"], zip(ts, path, z, sign.astype(int))), output)


@cli.command()
@click.option("--suite", type=click.Choice(checks.SUITES + ("all",)), default="all", show_default=True)
@click.option("--quick", is_flag=True, help="Smaller Monte Carlo budgets; PDE grids unchanged.")
@seed_option
def verify(suite, quick, seed):
    """Run verification batteries; exit 1 if any check fails."""
    settings = checks.VerifySettings.quick(seed) if quick else checks.VerifySettings(seed=seed)
    results = checks.run_suite(suite, settings)
    for res in results:
        click.echo(res.line())
    failed = sum(not r.passed for r in results)
    click.echo(f"{len(results) - failed}/{len(results)} checks passed")
    if failed:
        sys.exit(EXIT_VERIFY)


@cli.command("solve-pde")
@click.option("--terminal", type=click.Choice(TERMINALS), default="quadratic", show_default=True)
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--k", type=float, default=0.5, show_default=True)
@click.option("--T", "T", type=float, default=1.0, show_default=True)
@click.option("--nx", type=click.IntRange(min=3), default=2001, show_default=True)
@click.option("--nt", type=click.IntRange(min=1), default=4000, show_default=True)
@click.option("--store-every", type=click.IntRange(min=1), default=400, show_default=True)
@output_option
def solve_pde(terminal, a, b, k, T, nx, nt, store_every, output):
    """Finite-difference solve; columns t (time to maturity), x, u, w."""

    def compute():
        payoff = _payoff(terminal, a, b)
        grid = pde.Grid1D.for_payoff(payoff, T, nx, nt)
        return pde.solve_payoff(payoff, k, grid, store_every=store_every)

    sol = _guard(compute)
    x = sol.x
    rows = ((t, xj, uj, wj) for i, t in enumerate(sol.t) for xj, uj, wj in zip(x, sol.u[i], sol.w[i]))
    _emit(to_csv(["t", "x", "u", "w"], rows), output)


@cli.command()
@click.option("--terminal", type=click.Choice(TERMINALS), default="indicator", show_default=True)
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, default=1.0, show_default=True)
@click.option("--k", type=float, default=0.1, show_default=True)
@click.option("--T", "T", type=float, default=1.0, show_default=True)
@click.option("--t", "t", type=float, default=0.0, show_default=True)
@click.option("--h", type=float, default=0.5, show_default=True, help="Starting value B_t.")
@click.option("--paths", type=click.IntRange(min=1), default=200_000, show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=2000, show_default=True)
@seed_option
@click.option("--output", "-o", default=None, help="Per-path CSV (path, B_T, L_T, weight); '-' for stdout.")
def simulate(terminal, a, b, k, T, t, h, paths, steps, seed, output):
    """Monte Carlo estimate of Y_t with an optional per-path dump."""

    def compute():
        model = KIgnoranceModel(k, T)
        payoff = _payoff(terminal, a, b)
        cfg = mc.PathConfig(n_steps=steps, n_paths=paths, seed=seed)
        f = mc.path_functionals(model, payoff, t, h, cfg)
        est = mc.summarize(f["value"][0], steps)
        closed = closed_form.solution_Y(model, payoff, t, h)
        return f, est, closed

    f, est, closed = _guard(compute)
    summary = (
        f"mean      = {_fmt(est.mean)}\n"
        f"std_error = {_fmt(est.std_error)}\n"
        f"paths     = {est.n_paths}\n"
        f"steps     = {est.n_steps}\n"
        f"rejected  = {est.n_rejected}\n"
        f"closed    = {_fmt(closed)}\n"
        f"z_score   = {_fmt(est.z_score(closed))}\n"
    )
    if output is not None:
        rows = zip(range(paths), f["B_T"][0], f["L_T"][0], f["weight"][0])
        _emit(to_csv(["path", "B_T", "L_T", "weight"], rows), output)
    click.echo(summary, nl=False, err=output == "-")


def main(argv=None):
    cli.main(args=argv, prog_name="kignorance")


if __name__ == "__main__":
    main()
