"""Coherence of the transposition and complete graphs over S_n, n = 1..n_max.

    python3 scripts/coherence_table.py --n-max 6
"""

import argparse
import math
import time

from mevcost import spectral


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=7)
    args = ap.parse_args()
    print(f"{'n':>2}  {'transposition':>13}  {'complete':>9}  {'sqrt(1-1/n!)':>12}  {'seconds':>7}")
    for n in range(1, args.n_max + 1):
        t0 = time.perf_counter()
        mu = {k: spectral.coherence(spectral.decompose(spectral.build_graph(n, k)))
              for k in ("transposition", "complete")}
        analytic = math.sqrt(1 - 1 / math.factorial(n)) if n > 1 else 1.0
        print(f"{n:>2}  {mu['transposition']:>13.4f}  {mu['complete']:>9.4f}  {analytic:>12.4f}"
              f"  {time.perf_counter() - t0:>7.1f}")


if __name__ == "__main__":
    main()
