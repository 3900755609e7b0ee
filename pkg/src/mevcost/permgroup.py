"""Symmetric-group machinery over transaction lists.

Convention: a permutation ``pi`` moves the element at position ``j`` to
position ``pi(j)``, so ``apply(pi, x)[pi(j)] == x[j]``.  Composition is
``(pi * sigma)(j) == pi(sigma(j))`` and therefore
``apply(pi * sigma, x) == apply(pi, apply(sigma, x))``.

Permutations of degree ``n`` are indexed by the lexicographic rank of their
mapping arrays, which is also the order produced by :func:`enumerate_group`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Hashable, Sequence

MAX_DEGREE = 8

TransactionList = tuple  # ordered actions; elements only need ``==`` and hashing


class DegreeOutOfRange(ValueError):
    """Raised when exhaustive enumeration of S_n is infeasible or undefined."""


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    mapping: tuple[int, ...]
    _inverse: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValueError(f"{mapping} is not a permutation of 0..{len(mapping) - 1}")
        inv = [0] * len(mapping)
        for j, image in enumerate(mapping):
            inv[image] = j
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "_inverse", tuple(inv))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> Permutation:
        if a == b:
            raise ValueError("a transposition swaps two distinct positions")
        m = list(range(n))
        m[a], m[b] = m[b], m[a]
        return cls(tuple(m))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, j: int) -> int:
        return self.mapping[j]

    def __mul__(self, other: Permutation) -> Permutation:
        if other.n != self.n:
            raise LengthMismatch(f"cannot compose degrees {self.n} and {other.n}")
        return Permutation(tuple(self.mapping[j] for j in other.mapping))

    def inverse(self) -> Permutation:
        return Permutation(self._inverse)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = []
            j = start
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = self.mapping[j]
            out.append(tuple(cyc))
        return out

    @property
    def is_even(self) -> bool:
        return parity(self) == 0

    def rank(self) -> int:
        return rank(self)


def _check_degree(n: int, cap: int = MAX_DEGREE) -> None:
    if not 1 <= n <= cap:
        raise DegreeOutOfRange(f"degree {n} outside supported range 1..{cap}")


@lru_cache(maxsize=None)
def _group(n: int) -> tuple[Permutation, ...]:
    return tuple(Permutation(p) for p in itertools.permutations(range(n)))


def enumerate_group(n: int, cap: int = MAX_DEGREE) -> tuple[Permutation, ...]:
    """All ``n!`` permutations in lexicographic order; position ``i`` is ``unrank(n, i)``."""
    _check_degree(n, cap)
    return _group(n)


def rank(pi: Permutation) -> int:
    """Lexicographic rank via the Lehmer code."""
    m = pi.mapping
    n = len(m)
    r = 0
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if m[j] < m[i])
        r += smaller * math.factorial(n - 1 - i)
    return r


def unrank(n: int, r: int) -> Permutation:
    if not 0 <= r < math.factorial(n):
        raise ValueError(f"rank {r} out of range for degree {n}")
    pool = list(range(n))
    out = []
    for i in range(n - 1, -1, -1):
        q, r = divmod(r, math.factorial(i))
        out.append(pool.pop(q))
    return Permutation(tuple(out))


def apply(pi: Permutation, x: Sequence[Any]) -> tuple:
    """Permute ``x``: the element at position ``j`` lands at position ``pi(j)``."""
    if len(x) != pi.n:
        raise LengthMismatch(f"permutation of degree {pi.n} applied to list of length {len(x)}")
    inv = pi._inverse
    return tuple(x[inv[i]] for i in range(pi.n))


def stabilizer(x: Sequence[Hashable], cap: int = MAX_DEGREE) -> list[Permutation]:
    x = tuple(x)
    return [pi for pi in enumerate_group(len(x), cap) if apply(pi, x) == x]


def orbit(x: Sequence[Hashable], cap: int = MAX_DEGREE) -> list[tuple]:
    """Distinct images of ``x`` under S_n, in order of first appearance by rank."""
    x = tuple(x)
    seen: dict[tuple, None] = {}
    for pi in enumerate_group(len(x), cap):
        seen.setdefault(apply(pi, x), None)
    return list(seen)


def parity(pi: Permutation) -> int:
    """0 for even, 1 for odd: ``(n - #cycles) mod 2``."""
    return (pi.n - len(pi.cycles())) % 2


def transposition_adjacent(pi: Permutation, sigma: Permutation) -> bool:
    if pi.n != sigma.n:
        raise LengthMismatch(f"degrees differ: {pi.n} vs {sigma.n}")
    diff = [j for j in range(pi.n) if pi.mapping[j] != sigma.mapping[j]]
    if len(diff) != 2:
        return False
    a, b = diff
    return pi.mapping[a] == sigma.mapping[b] and pi.mapping[b] == sigma.mapping[a]
