"""Cost of MEV: best ordering payoff minus the uniformly random ordering payoff.

Everything here is exact enumeration over S_n; bound helpers return
:class:`BoundCertificate` records instead of booleans so reports can carry
both sides of every inequality.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import permgroup
from .payoff import PayoffFn, RandomizedPayoff
from .permgroup import apply, enumerate_group

IDENTITY_RTOL = 1e-10
BOUND_ATOL = 1e-9


class PreconditionError(ValueError):
    """A hypothesis of a bound does not hold; the message names a witness."""


class ZeroMaximumError(ValueError):
    pass


@dataclass(frozen=True)
class CostReport:
    max_value: float
    mean_value: float
    cost: float
    argmax_rank: int
    n_factorial: int
    stabilizer_size: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundCertificate:
    """``lhs <= rhs`` within ``tolerance``."""

    bound_name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float
    tolerance: float = BOUND_ATOL
    mode: str = "exact"
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def certify(name: str, lhs: float, rhs: float, tol: float = BOUND_ATOL, mode: str = "exact",
            **details: Any) -> BoundCertificate:
    lhs, rhs = float(lhs), float(rhs)
    return BoundCertificate(name, lhs, rhs, bool(lhs <= rhs + tol), rhs - lhs, tol, mode, details)


def orbit_values(f: PayoffFn, x: Sequence[Any], cap: int = permgroup.MAX_DEGREE) -> np.ndarray:
    """``f(pi_i(x))`` for every permutation in rank order."""
    x = tuple(x)
    return np.array([f(apply(pi, x)) for pi in enumerate_group(len(x), cap)], dtype=float)


def cost(f: PayoffFn, x: Sequence[Any], cap: int = permgroup.MAX_DEGREE) -> CostReport:
    x = tuple(x)
    vals = orbit_values(f, x, cap)
    top = float(vals.max())
    mean = math.fsum(vals) / len(vals)
    stab = sum(1 for pi in enumerate_group(len(x), cap) if apply(pi, x) == x)
    return CostReport(top, mean, top - mean, int(np.argmax(vals)), len(vals), stab)


def normalize(f: PayoffFn, x: Sequence[Any]) -> tuple[PayoffFn, float, float]:
    """Rescale ``f`` to ``[0, 1]`` on the orbit of ``x``; returns ``(f_tilde, scale, offset)``."""
    vals = orbit_values(f, x)
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return PayoffFn(lambda z: 1.0, {"family": "normalized", "base": dict(f.descriptor)}), 0.0, lo
    scale = hi - lo
    return (PayoffFn(lambda z: (f(z) - lo) / scale, {"family": "normalized", "base": dict(f.descriptor)}),
            scale, lo)


def ratio_cost(f: PayoffFn, x: Sequence[Any]) -> float:
    rep = cost(f, x)
    if rep.max_value == 0:
        raise ZeroMaximumError("ratio cost undefined when the best ordering pays 0")
    return rep.mean_value / rep.max_value


def randomized_cost(f: RandomizedPayoff, x: Sequence[Any]) -> float:
    return cost(f.mean_payoff(), x).cost


# -- bounds over permutations ----------------------------------------------------

def stabilizer_bound(f: PayoffFn, x: Sequence[Any], allow_scaled: bool = True,
                     tol: float = BOUND_ATOL) -> BoundCertificate:
    """``C(f, x) <= max f * (1 - |F(x)|/n!)`` for nonnegative ``f``."""
    x = tuple(x)
    vals = orbit_values(f, x)
    rep = cost(f, x)
    neg = np.flatnonzero(vals < -tol)
    if neg.size:
        raise PreconditionError(f"payoff negative at permutation rank {int(neg[0])}: {vals[neg[0]]}")
    normalized = bool(np.all(vals <= 1 + tol) and abs(vals.max() - 1) <= tol)
    if not normalized and not allow_scaled:
        raise PreconditionError(f"payoff not normalized: max {vals.max()} at permutation rank {int(np.argmax(vals))}")
    frac = rep.stabilizer_size / rep.n_factorial
    rhs = (1.0 if normalized else rep.max_value) * (1 - frac)
    return certify("stabilizer", rep.cost, rhs, tol, normalized=normalized,
                   stabilizer_size=rep.stabilizer_size, n_factorial=rep.n_factorial)


def spiky_bound(f: PayoffFn, x: Sequence[Any], H: Iterable[int], alpha: float, beta: float,
                tol: float = BOUND_ATOL) -> BoundCertificate:
    """Lower bound ``beta - alpha - |H|/n! (1 - alpha) <= C`` for payoffs spiking on ``H``."""
    if not 0 <= alpha <= beta <= 1:
        raise PreconditionError(f"need 0 <= alpha <= beta <= 1, got alpha={alpha}, beta={beta}")
    H = set(H)
    vals = orbit_values(f, x)
    over = np.flatnonzero(vals > 1 + tol)
    if over.size:
        raise PreconditionError(f"payoff exceeds 1 at permutation rank {int(over[0])}")
    if not any(vals[r] >= beta - tol for r in H):
        raise PreconditionError(f"no permutation in H reaches beta={beta}")
    for r in range(len(vals)):
        if r not in H and vals[r] > alpha + tol:
            raise PreconditionError(f"payoff {vals[r]} > alpha={alpha} at rank {r} outside H")
    lower = beta - alpha - len(H) / len(vals) * (1 - alpha)
    return certify("spiky", lower, cost(f, x).cost, tol, H_size=len(H), alpha=alpha, beta=beta)


def converse_support_bound(f: PayoffFn, x: Sequence[Any], alpha: float, eta: float, T: Iterable,
                           tol: float = BOUND_ATOL) -> BoundCertificate:
    """High cost forces the set where ``f >= eta`` to be small.

    ``T`` holds orbit elements (lists).  The certificate also carries a
    witness ``y`` with ``f(y) >= alpha``.
    """
    x = tuple(x)
    T = {tuple(t) for t in T}
    if eta <= 0:
        raise PreconditionError("eta must be positive")
    vals = orbit_values(f, x)
    if np.any(vals < -tol) or np.any(vals > 1 + tol) or abs(vals.max() - 1) > tol:
        raise PreconditionError("payoff must be normalized on the orbit")
    rep = cost(f, x)
    if rep.cost < alpha - tol:
        raise PreconditionError(f"cost {rep.cost} is below alpha={alpha}")
    orb = set(permgroup.orbit(x))
    for y in T:
        if y not in orb:
            raise PreconditionError(f"{y} is not in the orbit of x")
        if f(y) < eta - tol:
            raise PreconditionError(f"f({y}) = {f(y)} < eta={eta}")
    witness = apply(permgroup.unrank(len(x), rep.argmax_rank), x)
    if f(witness) < alpha - tol:
        raise PreconditionError("no orbit element reaches alpha")  # unreachable for f >= 0
    rhs = (1 - alpha) * rep.n_factorial / (eta * rep.stabilizer_size)
    return certify("converse_T", len(T), rhs, tol, witness=list(witness), witness_value=f(witness),
                   alpha=alpha, eta=eta)


# -- smoothness ----------------------------------------------------------------

Distance = Callable[[Sequence[Any], Sequence[Any]], float]


def lift_metric(d: Distance, cap: int = permgroup.MAX_DEGREE) -> Distance:
    """Permutation-independent majorant ``max_pi d(pi(u), pi(v))``."""

    def lifted(u, v):
        u, v = tuple(u), tuple(v)
        if len(u) != len(v):
            raise permgroup.LengthMismatch(f"lengths differ: {len(u)} vs {len(v)}")
        return max(d(apply(pi, u), apply(pi, v)) for pi in enumerate_group(len(u), cap))

    return lifted


def lipschitz_cost_bound(f: PayoffFn, L: float, d: Distance, x: Sequence[Any], y: Sequence[Any],
                         tol: float = BOUND_ATOL) -> BoundCertificate:
    """``|C(f, x) - C(f, y)| <= 2 L d(x, y)``.

    The Lipschitz condition and permutation independence of ``d`` are
    checked on every pair ``(pi(x), pi(y))``; those are the only pairs the
    inequality depends on.
    """
    x, y = tuple(x), tuple(y)
    dxy = d(x, y)
    for r, pi in enumerate(enumerate_group(len(x))):
        u, v = apply(pi, x), apply(pi, y)
        duv = d(u, v)
        if abs(duv - dxy) > tol * max(1.0, abs(dxy)):
            raise PreconditionError(f"distance not permutation independent at rank {r}; lift it first")
        if abs(f(u) - f(v)) > L * duv + tol:
            raise PreconditionError(f"Lipschitz condition fails on pair {u}, {v} (rank {r})")
    gap = abs(cost(f, x).cost - cost(f, y).cost)
    return certify("smoothness", gap, 2 * L * dxy, tol, L=L, distance=dxy)


def sampled_sup_cost(f: PayoffFn, sampler: Callable[[np.random.Generator], Sequence[Any]],
                     samples: int, seed: int,
                     ascent: Callable[[PayoffFn, Sequence[Any], np.random.Generator], tuple] | None = None,
                     ascent_starts: int = 10) -> dict:
    """Monte Carlo lower estimate of ``sup_x C(f, x)`` over a sampled action set."""
    rng = np.random.default_rng(seed)
    best, best_x, worst = -math.inf, None, math.inf
    scored = []
    for _ in range(samples):
        z = tuple(sampler(rng))
        c = cost(f, z).cost
        scored.append((c, z))
        worst = min(worst, c)
        if c > best:
            best, best_x = c, z
    if ascent is not None:
        scored.sort(key=lambda t: -t[0])
        for c0, z0 in scored[:ascent_starts]:
            z1, c1 = ascent(f, z0, rng)
            if c1 > best:
                best, best_x = c1, tuple(z1)
    return {"sup_estimate": best, "argmax": best_x, "min_sampled": worst, "samples": samples, "seed": seed}


def global_smooth_bound(f: PayoffFn, L: float, diameter: float,
                        sampler: Callable[[np.random.Generator], Sequence[Any]],
                        samples: int = 1000, seed: int = 0, inf_point: Sequence[Any] | None = None,
                        ascent=None, tol: float = BOUND_ATOL) -> BoundCertificate:
    """Sampled ``sup C`` against ``2 L t + inf C``.

    ``inf_point`` should be a member of the action set with known minimal
    cost (for instance all-equal entries, cost 0).  Without it the smallest
    sampled cost stands in for the infimum.
    """
    est = sampled_sup_cost(f, sampler, samples, seed, ascent)
    if inf_point is not None:
        inf_term, inf_mode = cost(f, inf_point).cost, "point"
    else:
        inf_term, inf_mode = est["min_sampled"], "sampled"
    return certify("global_smooth", est["sup_estimate"], 2 * L * diameter + inf_term, tol, mode="sampled",
                   samples=samples, seed=seed, inf_term=inf_term, inf_mode=inf_mode, L=L, diameter=diameter)
