"""Sampled frontrunning and sandwich costs against their analytic bounds.

Sweeps the trader volume cap for a square-root market and prints how much
of each bound the sampled supremum uses.
"""

import argparse

from mevcost import suites


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=5)
    args = ap.parse_args()
    print(f"{'M':>6} {'frontrun C_s':>13} {'8G(0)M':>8} {'sandwich C_s':>13} {'M bound':>8}")
    for M in (0.5, 1.0, 5.0, 10.0, 50.0):
        cfg = suites.MarketConfig(n=args.n, volume_cap=M, delta=1.0, samples=args.samples, seed=args.seed)
        fr, sw = suites.frontrun_study(cfg), suites.sandwich_study(cfg)
        print(f"{M:>6.1f} {fr['sampled_sup_cost']:>13.5f} {fr['bound']:>8.1f}"
              f" {sw['sampled_sup_cost']:>13.5f} {sw['bound']:>8.1f}")


if __name__ == "__main__":
    main()
