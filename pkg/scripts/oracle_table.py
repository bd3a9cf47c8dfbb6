"""Closed form, PDE and Monte Carlo side by side for the corridor payoff 1{0 <= x <= 1}.

    python scripts/oracle_table.py --paths 200000 --steps 2000
"""
import argparse
import time

import numpy as np

from kignorance import checks, mc
from kignorance import closed_form as cf
from kignorance.payoffs import KIgnoranceModel, TerminalPayoff
from kignorance.pde import Grid1D, solve_payoff


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=float, default=checks.FIG_K)
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=mc.DEFAULT_SEED)
    args = ap.parse_args()

    a, b, T = checks.FIG_A, checks.FIG_B, checks.FIG_T
    model = KIgnoranceModel(args.k, T)
    payoff = TerminalPayoff.indicator(a, b)
    hs = np.array(checks.INDICATOR_H)

    t0 = time.perf_counter()
    sol = solve_payoff(payoff, args.k, Grid1D.for_payoff(payoff, T))
    print(f"PDE solve {time.perf_counter() - t0:.1f}s")
    cfg = mc.PathConfig(n_steps=args.steps, n_paths=args.paths, seed=args.seed)

    print(f"{'t':>4} {'h':>6} {'closed':>10} {'PDE':>10} {'MC':>10} {'se':>9} {'z':>6}")
    for t in checks.INDICATOR_T:
        closed = cf.indicator_Y(model, t, hs, a, b)
        pde_v = sol.value(T - t, hs)
        t0 = time.perf_counter()
        est = mc.estimate_Y(model, payoff, t, hs, cfg)
        secs = time.perf_counter() - t0
        for h, y, u, e in zip(hs, closed, pde_v, est):
            print(f"{t:4.1f} {h:6.2f} {y:10.6f} {u:10.6f} {e.mean:10.6f} {e.std_error:9.2e} {e.z_score(y):6.2f}")
        print(f"     MC {secs:.1f}s for {len(hs)} starting points")


if __name__ == "__main__":
    main()
