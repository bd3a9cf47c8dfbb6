"""One Brownian path with Z_t of the corridor payoff 1{0 <= x <= 1}, k = 0.1, T = 1.

Writes t, B_t, Z_t, sign to a CSV (the same columns as ``kignorance path-demo``)
and prints how often B_t sat on either side of the midpoint.

    python scripts/figure1_path.py --seed 7 -o path.csv
"""
import argparse

import numpy as np

from kignorance import closed_form as cf
from kignorance import mc
from kignorance.cli import to_csv
from kignorance.payoffs import KIgnoranceModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=mc.DEFAULT_SEED)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--k", type=float, default=0.1)
    ap.add_argument("-o", "--output", default="figure1_path.csv")
    args = ap.parse_args()

    a, b, T = 0.0, 1.0, 1.0
    model = KIgnoranceModel(args.k, T)
    path = mc.simulate_path(mc.PathConfig(n_steps=args.steps, n_paths=1, seed=args.seed), 0.0, 0)[:-1]
    ts = np.arange(args.steps) * T / args.steps
    z = cf.indicator_Z(model, ts, path, a, b)
    sign = (np.sign(z) * np.sign(path - 0.5 * (a + b))).astype(int)
    with open(args.output, "w", newline="") as fh:
        fh.write(to_csv(["t", "B_t", "Z_t", "sign"], zip(ts, path, z, sign)))
    above = np.mean(path > 0.5 * (a + b))
    print(f"wrote {args.output}: {args.steps} rows, B_t above c for {above:.1%} of the time, "
          f"sign column values {sorted(set(sign.tolist()))}")


if __name__ == "__main__":
    main()
