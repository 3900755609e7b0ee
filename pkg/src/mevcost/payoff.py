"""Payoff families evaluated on ordered transaction lists.

Includes order-indicator (worst-cost) payoffs, the liquidation toy model,
the linear tightness example, and CFMM frontrunning / sandwiching with their
action spaces and distance functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, NamedTuple, Sequence

from . import permgroup
from .permgroup import apply, enumerate_group

LIQUIDATE = "L"
FEASIBILITY_TOL = 1e-9
BISECTION_TOL = 1e-10


class DomainError(ValueError):
    """Input list is outside the domain a payoff family is defined on."""


class InvalidChoice(ValueError):
    pass


class IllDefinedTable(ValueError):
    pass


@dataclass(frozen=True)
class PayoffFn:
    """A deterministic map from an ordered transaction list to a real payoff."""

    evaluator: Callable[[tuple], float]
    descriptor: Mapping[str, Any] = field(default_factory=dict)

    def __call__(self, x: Sequence[Any]) -> float:
        return float(self.evaluator(tuple(x)))

    def __add__(self, other):
        if isinstance(other, PayoffFn):
            return PayoffFn(lambda x: self(x) + other(x),
                            {"family": "sum", "terms": [dict(self.descriptor), dict(other.descriptor)]})
        c = float(other)
        return PayoffFn(lambda x: self(x) + c, {"family": "shift", "by": c, "base": dict(self.descriptor)})

    __radd__ = __add__

    def __mul__(self, alpha):
        a = float(alpha)
        return PayoffFn(lambda x: a * self(x), {"family": "scale", "by": a, "base": dict(self.descriptor)})

    __rmul__ = __mul__

    def compose(self, pi: permgroup.Permutation) -> PayoffFn:
        """``f o pi``: evaluate after permuting the input by ``pi``."""
        return PayoffFn(lambda x: self(apply(pi, x)),
                        {"family": "composed", "perm": list(pi.mapping), "base": dict(self.descriptor)})


def constant_payoff(c: float) -> PayoffFn:
    return PayoffFn(lambda x: c, {"family": "constant", "value": c})


# -- order indicators ------------------------------------------------------

def indicator_payoff(y: Sequence[Hashable]) -> PayoffFn:
    target = tuple(y)
    return PayoffFn(lambda z: 1.0 if z == target else 0.0,
                    {"family": "indicator", "target": list(target)})


def _order_key(a: Any):
    if isinstance(a, (int, float)) and not isinstance(a, bool):
        return (0, "", a)
    return (1, type(a).__name__, a)


def orbit_key(x: Sequence[Hashable]) -> tuple:
    """Sorted form of ``x``; two lists share an orbit iff their keys agree."""
    return tuple(sorted(x, key=_order_key))


def global_worst_cost_payoff(canonical_choice: Mapping[tuple, Sequence[Hashable]] | None = None) -> PayoffFn:
    """1 on one chosen element of every orbit, 0 elsewhere.

    Orbits absent from ``canonical_choice`` use their lexicographically
    smallest element, which is the sorted list.
    """
    chosen: dict[tuple, tuple] = {}
    for rep, pick in (canonical_choice or {}).items():
        key = orbit_key(rep)
        pick = tuple(pick)
        if orbit_key(pick) != key:
            raise InvalidChoice(f"{pick} is not in the orbit of {tuple(rep)}")
        chosen[key] = pick

    def f(x):
        key = orbit_key(x)
        return 1.0 if x == chosen.get(key, key) else 0.0

    return PayoffFn(f, {"family": "worst_cost", "custom_orbits": len(chosen)})


def basis_decompose(f: PayoffFn, x: Sequence[Hashable]) -> list[tuple[tuple, float]]:
    """Coefficients of ``f`` on the orbit of ``x`` in the indicator basis."""
    return [(y, f(y)) for y in permgroup.orbit(x)]


def reconstruct(terms: Sequence[tuple[tuple, float]], z: Sequence[Hashable]) -> float:
    z = tuple(z)
    return math.fsum(c * (1.0 if z == y else 0.0) for y, c in terms)


# -- liquidation -------------------------------------------------------------

def liquidation_payoff(threshold: float | None = None) -> PayoffFn:
    """Pays 1 when the trades before the single ``L`` push the price to ``threshold``.

    With ``threshold=None`` the threshold is ``n/2`` for a list of length ``n``.
    """

    def f(x):
        pos = [i for i, a in enumerate(x) if a == LIQUIDATE and isinstance(a, str)]
        if len(pos) > 1:
            raise DomainError(f"at most one liquidation allowed, got {len(pos)}")
        if not pos:
            return 0.0
        p = len(x) / 2 if threshold is None else threshold
        return 1.0 if math.fsum(x[: pos[0]]) >= p else 0.0

    return PayoffFn(f, {"family": "liquidation", "threshold": threshold})


def linear_tightness_payoff() -> PayoffFn:
    """``x_1 - x_2 - ... - x_n``; 1-Lipschitz in the l1 norm."""
    return PayoffFn(lambda x: x[0] - math.fsum(x[1:]), {"family": "linear"})


def l1_distance(u: Sequence[float], v: Sequence[float]) -> float:
    return math.fsum(abs(a - b) for a, b in zip(u, v, strict=True))


# -- forward exchange functions ----------------------------------------------

@dataclass(frozen=True)
class ForwardExchangeFn:
    """Concave, increasing CFMM output curve ``G`` with ``G(0) = 0``.

    ``kind="power"``: ``G(t) = c * ((t + 1)**p - 1) / p`` for ``t > -1``,
    ``-inf`` below; ``p = 1`` is the linear market ``c * t`` on all of R.

    ``kind="piecewise"``: slope ``slopes[0]`` until ``breakpoints[0]``, then
    ``slopes[1]`` and so on; extended linearly for negative ``t``.
    """

    kind: str = "power"
    p: float = 0.5
    c: float = 1.0
    breakpoints: tuple[float, ...] = ()
    slopes: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if not (0 < self.p <= 1) or self.c <= 0:
                raise ValueError(f"power family needs 0 < p <= 1 and c > 0, got p={self.p}, c={self.c}")
        elif self.kind == "piecewise":
            bps, s = tuple(map(float, self.breakpoints)), tuple(map(float, self.slopes))
            if len(s) != len(bps) + 1:
                raise ValueError("need exactly one more slope than breakpoints")
            if any(b <= 0 for b in bps) or list(bps) != sorted(set(bps)):
                raise ValueError("breakpoints must be positive and strictly increasing")
            if any(v <= 0 for v in s) or any(a < b for a, b in zip(s, s[1:])):
                raise ValueError("slopes must be positive and nonincreasing")
            object.__setattr__(self, "breakpoints", bps)
            object.__setattr__(self, "slopes", s)
        else:
            raise ValueError(f"unknown forward exchange kind {self.kind!r}")

    def __call__(self, t: float) -> float:
        if self.kind == "power":
            if self.p == 1:
                return self.c * t
            if t <= -1:
                return -math.inf
            return self.c * ((t + 1) ** self.p - 1) / self.p
        if t <= 0:
            return self.slopes[0] * t
        out, prev = 0.0, 0.0
        for b, s in zip(self.breakpoints, self.slopes):
            if t <= b:
                return out + s * (t - prev)
            out += s * (b - prev)
            prev = b
        return out + self.slopes[-1] * (t - prev)

    @property
    def derivative_at_zero(self) -> float:
        return self.c if self.kind == "power" else self.slopes[0]

    def inverse(self, v: float, tol: float = BISECTION_TOL) -> float:
        """Solve ``G(t) = v`` by bisection."""
        lo, hi = -0.5, 1.0
        if self.kind == "piecewise":
            lo = min(-1.0, v / self.slopes[0] - 1.0)
        while self(lo) > v:
            lo = -1 + (lo + 1) / 2 if self.kind == "power" and self.p < 1 else 2 * lo
        while self(hi) < v:
            hi *= 2
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self(mid) < v:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def check_shape(self, grid: Sequence[float]) -> bool:
        """Monotone, concave and dominated by the chord slope ``G'(0)`` on ``grid``."""
        ts = sorted(grid)
        g = [self(t) for t in ts]
        g0 = self.derivative_at_zero
        ok = abs(self(0.0)) == 0.0
        ok &= all(b >= a - 1e-12 for a, b in zip(g, g[1:]))
        for i in range(1, len(ts) - 1):
            h1, h2 = ts[i] - ts[i - 1], ts[i + 1] - ts[i]
            lhs = (g[i + 1] - g[i]) / h2 - (g[i] - g[i - 1]) / h1
            ok &= lhs <= 1e-9
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                if ts[i] >= 0:
                    ok &= (g[j] - g[i]) / (ts[j] - ts[i]) <= g0 + 1e-9
        return bool(ok)

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "p": self.p, "c": self.c}
        return {"kind": "piecewise", "breakpoints": list(self.breakpoints), "slopes": list(self.slopes)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ForwardExchangeFn:
        d = dict(d)
        kind = d.pop("kind", "power")
        if kind == "piecewise":
            return cls(kind=kind, breakpoints=tuple(d["breakpoints"]), slopes=tuple(d["slopes"]))
        return cls(kind=kind, p=float(d.get("p", 0.5)), c=float(d.get("c", 1.0)))


# -- frontrunning -------------------------------------------------------------

class FrontrunAction(NamedTuple):
    trader: float = 0.0
    validator: float = 0.0


class SandwichAction(NamedTuple):
    trader: float = 0.0
    validator: float = 0.0


def _trader_volume(actions) -> float:
    return math.fsum(abs(a.trader) for a in actions)


@dataclass(frozen=True)
class FrontrunList:
    """A member of the bounded frontrunning action set."""

    actions: tuple[FrontrunAction, ...]
    volume_cap: float
    delta: float

    def __post_init__(self):
        acts = tuple(FrontrunAction(*a) for a in self.actions)
        object.__setattr__(self, "actions", acts)
        if self.delta <= 0 or self.volume_cap <= 0:
            raise DomainError("delta and volume cap must be positive")
        for a in acts:
            if a.trader < 0:
                raise DomainError(f"negative trader amount {a.trader}")
            if a.validator not in (0.0, self.delta):
                raise DomainError(f"validator amount must be 0 or delta, got {a.validator}")
            if a.trader != 0 and a.validator != 0:
                raise DomainError("an action cannot be both a trade and the validator's trade")
        if sum(1 for a in acts if a.validator != 0) != 1:
            raise DomainError("exactly one validator action required")
        if _trader_volume(acts) > self.volume_cap * (1 + 1e-12):
            raise DomainError(f"trader volume {_trader_volume(acts)} exceeds cap {self.volume_cap}")

    def __len__(self):
        return len(self.actions)


def _actions(z):
    return z.actions if isinstance(z, (FrontrunList, SandwichList)) else tuple(z)


def frontrun_payoff(G: ForwardExchangeFn, delta: float) -> PayoffFn:
    """Output of the validator's ``delta`` trade, given the trader volume ahead of it."""
    if delta <= 0:
        raise DomainError("delta must be positive")

    def f(z):
        ks = [i for i, a in enumerate(z) if a[1] != 0]
        if len(ks) != 1:
            raise DomainError(f"exactly one validator entry required, found {len(ks)}")
        prefix = math.fsum(a[0] for a in z[: ks[0]])
        return G(prefix + delta) - G(prefix)

    return PayoffFn(f, {"family": "frontrun", "G": G.to_dict(), "delta": delta})


def frontrun_metric(z, zp) -> float:
    """Sum over positions of ``max(|x_i|, |x'_i|, |x_i - x'_i|)``; note ``d(z, z) != 0``."""
    a, b = _actions(z), _actions(zp)
    if len(a) != len(b):
        raise permgroup.LengthMismatch(f"lengths differ: {len(a)} vs {len(b)}")
    return math.fsum(max(abs(u[0]), abs(v[0]), abs(u[0] - v[0])) for u, v in zip(a, b))


# -- sandwiching ---------------------------------------------------------------

def _validator_positions(z) -> tuple[int, int]:
    buys = [i for i, a in enumerate(z) if a[1] > 0]
    sells = [i for i, a in enumerate(z) if a[1] < 0]
    if len(buys) != 1 or len(sells) != 1:
        raise DomainError(f"need exactly one validator buy and one sell, got {len(buys)} and {len(sells)}")
    return buys[0], sells[0]


def sandwich_feasible(z, G: ForwardExchangeFn, tol: float = FEASIBILITY_TOL) -> bool:
    z = _actions(z)
    i, j = _validator_positions(z)
    t = math.fsum(a[0] for a in z)
    yi, yj = z[i][1], z[j][1]
    return G(t + yi) - G(t + yi + yj) <= G(yi) + tol


@dataclass(frozen=True)
class SandwichList:
    actions: tuple[SandwichAction, ...]
    volume_cap: float
    G: ForwardExchangeFn

    def __post_init__(self):
        acts = tuple(SandwichAction(*a) for a in self.actions)
        object.__setattr__(self, "actions", acts)
        for a in acts:
            if a.trader < 0:
                raise DomainError(f"negative trader amount {a.trader}")
            if a.trader != 0 and a.validator != 0:
                raise DomainError("an action cannot be both a trade and a validator trade")
        _validator_positions(acts)
        if _trader_volume(acts) > self.volume_cap * (1 + 1e-12):
            raise DomainError(f"trader volume {_trader_volume(acts)} exceeds cap {self.volume_cap}")
        if not sandwich_feasible(acts, self.G):
            raise DomainError("sell leg tenders more than the buy leg received")

    @property
    def trader_volume(self) -> float:
        return _trader_volume(self.actions)

    def __len__(self):
        return len(self.actions)


def sandwich_payoff() -> PayoffFn:
    def f(z):
        i, j = _validator_positions(z)
        return -(z[i][1] + z[j][1])

    return PayoffFn(f, {"family": "sandwich"})


def sandwich_metric(z, zp) -> float:
    return max(_trader_volume(_actions(z)), _trader_volume(_actions(zp)))


def max_sell(G: ForwardExchangeFn, t: float, delta: float, tol: float = BISECTION_TOL) -> float:
    """Largest sell amount ``gamma`` with ``G(t+delta) - G(t+delta-gamma) <= G(delta)``."""
    target = G(t + delta) - G(delta)
    lo, hi = 0.0, t + delta + 1.0
    while G(t + delta - hi) >= target:
        hi *= 2
    # G(t+delta-gamma) decreases in gamma; find where it meets target
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if G(t + delta - mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


# -- randomization -------------------------------------------------------------

@dataclass(frozen=True)
class RandomizedPayoff:
    """Payoff ``f(x, omega)`` with ``omega`` drawn from a finite weighted sample space."""

    base: Callable[[tuple, Any], float]
    omega: tuple
    weights: tuple[float, ...]
    descriptor: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) != len(self.omega):
            raise ValueError("one weight per sample required")
        if any(v < 0 for v in w) or abs(math.fsum(w) - 1) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)

    def expected(self, x: Sequence[Any]) -> float:
        x = tuple(x)
        return math.fsum(w * self.base(x, om) for om, w in zip(self.omega, self.weights))

    def mean_payoff(self) -> PayoffFn:
        return PayoffFn(self.expected, {"family": "expected", "base": dict(self.descriptor)})


def fair_wrapper(f: PayoffFn, n: int, cap: int = permgroup.MAX_DEGREE) -> RandomizedPayoff:
    """Shuffle the submitted list uniformly at random before paying ``f``."""
    perms = enumerate_group(n, cap)
    w = 1.0 / len(perms)
    return RandomizedPayoff(lambda x, om: f(apply(om, x)), perms, (w,) * len(perms),
                            {"family": "fair_wrapper", "base": dict(f.descriptor)})


# -- lookup tables ---------------------------------------------------------------

def table_payoff(values: Mapping[int, float] | Sequence[float], x: Sequence[Hashable]) -> PayoffFn:
    """Payoff on the orbit of ``x`` with ``f(pi(x)) = values[rank(pi)]``."""
    x = tuple(x)
    perms = enumerate_group(len(x))
    if isinstance(values, Mapping):
        missing = [r for r in range(len(perms)) if r not in values]
        if missing:
            raise IllDefinedTable(f"table missing {len(missing)} ranks, first {missing[0]}")
        vals = [float(values[r]) for r in range(len(perms))]
    else:
        vals = [float(v) for v in values]
        if len(vals) != len(perms):
            raise IllDefinedTable(f"table has {len(vals)} entries, need {len(perms)}")
    lookup: dict[tuple, float] = {}
    for r, pi in enumerate(perms):
        y = apply(pi, x)
        if y in lookup and lookup[y] != vals[r]:
            raise IllDefinedTable(f"rank {r} maps to an orbit element already assigned a different value")
        lookup[y] = vals[r]

    def f(z):
        try:
            return lookup[z]
        except KeyError:
            raise DomainError(f"{z} is not in the orbit of {x}") from None

    return PayoffFn(f, {"family": "table", "x": list(x), "values": vals})


# -- declarative construction ------------------------------------------------------

def _decode_actions(family: str, raw: Sequence[Any]) -> tuple:
    if family == "frontrun":
        return tuple(FrontrunAction(*a) for a in raw)
    if family == "sandwich":
        return tuple(SandwichAction(*a) for a in raw)
    return tuple(raw)


def payoff_from_config(cfg: Mapping[str, Any]) -> tuple[PayoffFn, tuple | None]:
    """Build ``(payoff, x)`` from ``{"family", "params", "x"?}``; see README for the schema."""
    family = cfg.get("family")
    params = dict(cfg.get("params", {}))
    x = params.pop("x", cfg.get("x"))
    x = _decode_actions(family, x) if x is not None else None
    if family == "liquidation":
        f = liquidation_payoff(params.get("threshold"))
    elif family == "indicator":
        f = indicator_payoff(_decode_actions(family, params["target"]))
    elif family == "linear":
        f = linear_tightness_payoff()
    elif family == "worst_cost":
        f = global_worst_cost_payoff()
    elif family == "frontrun":
        f = frontrun_payoff(ForwardExchangeFn.from_dict(params.get("G", {})), float(params["delta"]))
    elif family == "sandwich":
        f = sandwich_payoff()
    elif family == "table":
        if x is None:
            raise ValueError("table payoff needs the base list x")
        f = table_payoff(params["values"], x)
    elif family == "constant":
        f = constant_payoff(float(params.get("value", 1.0)))
    else:
        raise ValueError(f"unknown payoff family {family!r}")
    return f, x


# -- samplers over bounded action sets ------------------------------------------------

def _split_volume(rng, k: int, cap: float) -> list[float]:
    if k == 0:
        return []
    total = cap if rng.random() < 0.5 else cap * rng.random()
    conc = rng.choice([0.2, 1.0, 5.0])
    shares = rng.dirichlet([conc] * k)
    return [float(total * s) for s in shares]


def sample_frontrun_list(rng, n: int, volume_cap: float, delta: float) -> FrontrunList:
    """Random member of the frontrunning action set: ``n - 1`` traders and one validator."""
    amounts = _split_volume(rng, n - 1, volume_cap)
    acts = [FrontrunAction(a, 0.0) for a in amounts]
    acts.insert(int(rng.integers(0, n)), FrontrunAction(0.0, delta))
    return FrontrunList(tuple(acts), volume_cap, delta)


def frontrun_ascent(f: PayoffFn, z: Sequence[FrontrunAction], rng, volume_cap: float, steps: int = 60,
                    cost_fn=None) -> tuple[tuple, float]:
    """Greedy volume moves between traders that raise the ordering cost."""
    from .cost import cost as _cost

    cost_fn = cost_fn or (lambda w: _cost(f, w).cost)
    z = list(z)
    best = cost_fn(z)
    traders = [i for i, a in enumerate(z) if a.validator == 0]
    step = volume_cap / 2
    for _ in range(steps):
        trial = [a for a in z]
        if len(traders) >= 2 and rng.random() < 0.7:
            i, j = rng.choice(traders, size=2, replace=False)
            move = min(trial[i].trader, step * rng.random())
            trial[i] = FrontrunAction(trial[i].trader - move, 0.0)
            trial[j] = FrontrunAction(trial[j].trader + move, 0.0)
        elif traders:
            room = volume_cap - _trader_volume(trial)
            i = traders[int(rng.integers(0, len(traders)))]
            change = min(room, step * rng.random()) if rng.random() < 0.5 else -min(trial[i].trader, step * rng.random())
            trial[i] = FrontrunAction(max(trial[i].trader + change, 0.0), 0.0)
        c = cost_fn(trial)
        if c > best:
            z, best = trial, c
        else:
            step *= 0.9
    return tuple(z), best


def sample_sandwich_list(rng, n: int, volume_cap: float, G: ForwardExchangeFn, delta_max: float) -> SandwichList:
    """Random feasible sandwich with a sell leg no smaller than the buy leg."""
    if n < 2:
        raise DomainError("a sandwich needs at least two slots")
    amounts = _split_volume(rng, n - 2, volume_cap)
    t = math.fsum(amounts)
    delta = float(delta_max * (1 - rng.random()))
    gamma = delta + (max_sell(G, t, delta) - delta) * rng.random()
    acts = [SandwichAction(a, 0.0) for a in amounts]
    acts.insert(int(rng.integers(0, n - 1)), SandwichAction(0.0, delta))
    acts.insert(int(rng.integers(0, n)), SandwichAction(0.0, -gamma))
    return SandwichList(tuple(acts), volume_cap, G)
