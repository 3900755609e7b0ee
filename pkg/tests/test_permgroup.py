import itertools
import math
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mevcost import permgroup as pg
from mevcost.permgroup import Permutation

perms = st.integers(1, 6).flatmap(lambda n: st.permutations(range(n)).map(Permutation))


def same_degree_pair(k=2):
    return st.integers(1, 6).flatmap(
        lambda n: st.tuples(*[st.permutations(range(n)).map(Permutation)] * k))


def test_enumeration_is_lexicographic_and_complete():
    for n in range(1, 7):
        g = pg.enumerate_group(n)
        assert len(g) == math.factorial(n)
        assert [p.mapping for p in g] == sorted(itertools.permutations(range(n)))


def test_degree_cap():
    with pytest.raises(pg.DegreeOutOfRange):
        pg.enumerate_group(0)
    with pytest.raises(pg.DegreeOutOfRange):
        pg.enumerate_group(9)
    with pytest.raises(pg.DegreeOutOfRange):
        pg.enumerate_group(6, cap=5)


def test_rank_unrank_roundtrip_all_of_s5():
    for i, p in enumerate(pg.enumerate_group(5)):
        assert pg.rank(p) == i == p.rank()
        assert pg.unrank(5, i) == p


def test_unrank_bounds():
    with pytest.raises(ValueError):
        pg.unrank(3, 6)


def test_apply_convention():
    # element at position j goes to position pi(j)
    pi = Permutation((2, 0, 1))
    assert pg.apply(pi, "abc") == ("b", "c", "a")
    with pytest.raises(pg.LengthMismatch):
        pg.apply(pi, "ab")


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


@given(same_degree_pair(3))
def test_group_axioms(triple):
    a, b, c = triple
    e = Permutation.identity(a.n)
    assert (a * b) * c == a * (b * c)
    assert a * e == a == e * a
    assert a * a.inverse() == e


@given(same_degree_pair(2))
def test_action_is_homomorphism(pair):
    a, b = pair
    x = tuple(range(10, 10 + a.n))
    assert pg.apply(a * b, x) == pg.apply(a, pg.apply(b, x))


@given(same_degree_pair(2))
def test_parity_is_multiplicative(pair):
    a, b = pair
    assert pg.parity(a * b) == (pg.parity(a) + pg.parity(b)) % 2


@given(perms)
def test_parity_matches_inversion_count(p):
    inv = sum(1 for i, j in itertools.combinations(range(p.n), 2) if p.mapping[i] > p.mapping[j])
    assert pg.parity(p) == inv % 2
    assert p.is_even == (inv % 2 == 0)


def test_transposition_is_odd():
    assert pg.parity(Permutation.transposition(5, 1, 3)) == 1
    with pytest.raises(ValueError):
        Permutation.transposition(3, 1, 1)


@given(perms)
def test_cycles_partition_positions(p):
    flat = sorted(j for c in p.cycles() for j in c)
    assert flat == list(range(p.n))


xs = st.lists(st.sampled_from("abc"), min_size=1, max_size=6).map(tuple)


@given(xs)
def test_orbit_stabilizer_identity(x):
    n = len(x)
    orb, stab = pg.orbit(x), pg.stabilizer(x)
    assert len(orb) * len(stab) == math.factorial(n)
    # multinomial count as an independent oracle
    denom = math.prod(math.factorial(c) for c in Counter(x).values())
    assert len(orb) == math.factorial(n) // denom
    assert len(set(orb)) == len(orb)
    assert all(Counter(y) == Counter(x) for y in orb)


@given(xs)
def test_stabilizer_is_subgroup(x):
    stab = set(pg.stabilizer(x))
    assert Permutation.identity(len(x)) in stab
    for a in stab:
        assert a.inverse() in stab
        for b in stab:
            assert a * b in stab


def test_orbit_examples():
    assert pg.orbit((1, 1, 1)) == [(1, 1, 1)]
    assert len(pg.orbit((0, 1, 2, 3))) == 24
    assert len(pg.orbit((1, 1, 2, 2))) == 6


@given(same_degree_pair(2))
def test_transposition_adjacency_oracle(pair):
    a, b = pair
    # a and b differ by one swap of entries iff a^-1 b ... brute force over all swaps
    swaps = []
    for i, j in itertools.combinations(range(a.n), 2):
        m = list(a.mapping)
        m[i], m[j] = m[j], m[i]
        swaps.append(tuple(m))
    assert pg.transposition_adjacent(a, b) == (b.mapping in swaps)
