from math import comb

import pytest
from hypothesis import given, strategies as st

from derived_intersect.cycles import adapt_coordinates, random_linear_pair
from derived_intersect.groebner import groebner_basis
from derived_intersect.homalg import homology, is_quasi_iso
from derived_intersect.koszul import (
    ExteriorBasis,
    derived_restriction,
    exterior_power,
    gamma_apply,
    gamma_chain_map,
    koszul_complex,
    oracle_tor_ranks,
    shuffle_map,
    subsets,
    tor_excess_compare,
    tor_modules,
    tor_ranks,
    tor_wedge_product,
    wedge,
)
from derived_intersect.matrix import PolyMatrix
from derived_intersect.polyring import PolyRing

RUNNING = ([[1, 0, 0, 0], [0, 0, 1, 0]], [[0, 1, 0, 0], [0, 0, 1, 0]], 4)
R2PAIR = ([[1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]],
          [[0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]], 5)
SELF2 = ([[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 1, 0]], 3)
TRANSVERSE = ([[1, 0]], [[0, 1]], 2)


def pair_of(spec, field=0):
    return adapt_coordinates(*spec, field=field)


def test_wedge_signs():
    assert wedge((0,), (1,)) == (1, (0, 1))
    assert wedge((1,), (0,)) == (-1, (0, 1))
    assert wedge((0,), (0,))[0] == 0
    assert wedge((0, 2), (1,)) == (-1, (0, 1, 2))
    B = ExteriorBasis(3, ["dx", "dy", "dz"])
    assert [len(B.basis(k)) for k in range(4)] == [1, 3, 3, 1]
    assert B.label((0, 2)) == "dx^dz" and B.label(()) == "1"


def test_exterior_power_of_product():
    R = PolyRing(["a"])
    a = R.gen("a")
    M = PolyMatrix(R, 3, 3, [[1, a, 0], [0, 1, 2], [a, 0, 1]])
    N = PolyMatrix(R, 3, 3, [[2, 0, 1], [a, 1, 0], [0, 0, 1]])
    for k in range(4):
        assert exterior_power(M @ N, k) == exterior_power(M, k) @ exterior_power(N, k)
    assert exterior_power(M, 3).entries[0][0] == R.parse("2*a^2 + 1")


def test_koszul_examples():
    R = PolyRing(["x", "y"])
    x, y = R.gens()
    K = koszul_complex([x, y], R)
    assert [K.rank(i) for i in K.degrees()] == [1, 2, 1]
    assert K.validate()
    U = koszul_complex([R.one()], R)
    assert all(homology(U, i).is_zero() for i in U.degrees())
    pair = pair_of(RUNNING)
    S = pair.ring()
    Kx = koszul_complex([S.gen("x1"), S.gen("t1")], S)
    assert homology(Kx, -1).is_zero() and homology(Kx, -2).is_zero()
    small, _ = homology(Kx, 0).presentation.minimized()
    assert [str(f) for f in groebner_basis(small.relations).polys] == ["x1", "t1"]


def test_derived_restriction_examples():
    dr = derived_restriction(pair_of(RUNNING))
    assert [dr.complex.rank(-k) for k in range(3)] == [1, 2, 1]
    assert tor_ranks(dr.pair, dr) == [1, 1, 0]
    assert dr.homology(2).is_zero()
    tr = pair_of(TRANSVERSE)
    assert tor_ranks(tr) == [1, 0]
    assert homology(derived_restriction(tr).complex, -1).is_zero()
    assert tor_ranks(pair_of(SELF2)) == [1, 2, 1]


def test_tor_modules_examples():
    assert tor_ranks(pair_of(R2PAIR)) == [1, 2, 1, 0]
    mods = tor_modules(pair_of(RUNNING))
    assert len(mods) == 3 and mods[1].cycles.cols >= 1


@pytest.mark.parametrize("spec", [RUNNING, R2PAIR, SELF2, TRANSVERSE])
def test_excess_compare(spec):
    cmp_ = tor_excess_compare(pair_of(spec))
    assert cmp_.verdict
    assert [k for k, _ in cmp_.per_degree] == list(range(len(spec[0]) + 1))


def test_wedge_product_examples():
    wp = tor_wedge_product(pair_of(RUNNING), 1, 1)
    assert wp.verdict and wp.table == [[[]]]
    wp = tor_wedge_product(pair_of(SELF2), 1, 1)
    assert wp.verdict and wp.chain_map_ok
    assert [[[str(f) for f in cell] for cell in row] for row in wp.table] == [[["0"], ["1"]], [["-1"], ["0"]]]
    wp0 = tor_wedge_product(pair_of(SELF2), 0, 1)
    assert wp0.verdict
    assert [[str(f) for f in cell] for cell in wp0.table[0]] == [["1", "0"], ["0", "1"]]


def test_wedge_associative_codim3():
    pair = pair_of(([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], 4))
    for i, j in [(1, 1), (1, 2), (2, 1), (0, 3)]:
        assert tor_wedge_product(pair, i, j).verdict


def test_gamma_examples():
    pair = pair_of(RUNNING)
    R = pair.ring()
    a, b = gamma_apply(pair, R.gen("x1"), ())
    assert [str(f) for f in a] == ["1", "0"] and [str(f) for f in b] == ["0"]
    a, b = gamma_apply(pair, R.one(), (0, 1))
    assert a == [] and [str(f) for f in b] == ["1"]
    a, b = gamma_apply(pair, R.parse("y1*t1"), (1,))
    assert all(f.is_zero() for f in a) and all(f.is_zero() for f in b)
    g = gamma_chain_map(pair)
    assert g.validate()


def test_shuffle_is_quasi_iso():
    R = PolyRing(["x", "y", "z"])
    x, y, z = R.gens()
    f = shuffle_map([x], [y, z], R)
    assert f.validate()
    assert is_quasi_iso(f).verdict
    for n in f.source.degrees():
        assert f.source.rank(n) == f.target.rank(n)


def _pad(v, n):
    return list(v) + [0] * (n - len(v))


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_binomial_ranks_and_symmetry(seed, n):
    pair = random_linear_pair(seed, n, field="fp:32003")
    ranks = tor_ranks(pair)
    assert ranks == [comb(pair.r, k) for k in range(pair.codim_x + 1)]
    m = n + 1
    assert _pad(oracle_tor_ranks(pair), m) == _pad(ranks, m)
    assert _pad(oracle_tor_ranks(pair, swap=True), m) == _pad(ranks, m)


@given(st.integers(0, 10_000))
def test_wedge_graded_commutative(seed):
    pair = random_linear_pair(seed, 4, field="fp:32003")
    if pair.r < 2:
        return
    w11 = tor_wedge_product(pair, 1, 1)
    assert w11.verdict
    for a in range(len(w11.table)):
        for b in range(len(w11.table)):
            assert w11.table[a][b] == [-f for f in w11.table[b][a]]


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_gamma_chain_law(seed, n):
    pair = random_linear_pair(seed, n, field="fp:32003")
    assert gamma_chain_map(pair).validate()


def test_subsets_sorted():
    assert subsets(3, 2) == [(0, 1), (0, 2), (1, 2)]
