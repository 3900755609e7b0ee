"""Exact cost of the liquidation payoff against its closed form for even n."""

import math

from mevcost import cost, payoff, suites

for n in (2, 4, 6, 8):
    x, threshold, _ = suites._liquidation_case(n)
    c = cost.cost(payoff.liquidation_payoff(threshold), x)
    closed = 1 - 2 / (n * math.comb(n, n // 2))
    sb = cost.stabilizer_bound(payoff.liquidation_payoff(threshold), x)
    print(f"n={n}  x={x}  C={c.cost:.12f}  closed form={closed:.12f}  "
          f"stabilizer bound={sb.rhs:.6f}  |F(x)|={c.stabilizer_size}")
