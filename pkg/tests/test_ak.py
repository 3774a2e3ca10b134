from math import comb

import pytest
from hypothesis import given, strategies as st

from derived_intersect.ak import (
    CharacteristicTooSmall,
    QuantizedCycle,
    ak_complex,
    atiyah_morphism,
    change_quantization_iso,
    extract_splitting_from_formality,
    leray_filtration,
    leray_graded_ranks,
    psi_theta,
    restrict_ak,
)
from derived_intersect.cycles import (
    adapt_coordinates,
    excess_sequence,
    find_module_splitting,
    random_linear_pair,
)
from derived_intersect.matrix import PolyMatrix

RUNNING = ([[1, 0, 0, 0], [0, 0, 1, 0]], [[0, 1, 0, 0], [0, 0, 1, 0]], 4)
R2PAIR = ([[1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]],
          [[0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]], 5)
SELF2 = ([[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 1, 0]], 3)
TRANSVERSE = ([[1, 0]], [[0, 1]], 2)


def pair_of(spec, field=0):
    return adapt_coordinates(*spec, field=field)


def strs(M):
    return [[str(a) for a in row] for row in M.entries]


def test_ak_codim2():
    data = ak_complex(QuantizedCycle.standalone(2, 1))
    assert data.ranks() == [3, 3, 1]
    assert data.check_d2()
    assert data.check_square_zero()
    assert data.check_equivariance() == []
    res = data.check_resolution()
    assert res["ok"] and res["H0_free_rank_one"]


def test_ak_codim1_differential():
    data = ak_complex(QuantizedCycle.standalone(1, 1))
    assert data.ranks() == [2, 1]
    # degree -1 term is Λ^2 ⊕ Λ^1 = 0 ⊕ O: the generator b maps to (b, 0) in Λ^1 ⊕ Λ^0
    assert strs(data.complex.d(-1)) == [["1"], ["0"]]


def test_ak_twisted_resolution():
    qc = QuantizedCycle.standalone(2, 2)
    R = qc.ring
    phi = PolyMatrix(R, 2, 2, [[R.parse("y1"), R.parse("3")], [R.parse("y2^2"), R.zero()]])
    data = ak_complex(QuantizedCycle(R, qc.conormal, qc.tangent, phi))
    assert data.check_equivariance() == []
    assert data.check_resolution()["ok"]


def test_small_characteristic_rejected():
    with pytest.raises(CharacteristicTooSmall):
        ak_complex(QuantizedCycle.standalone(3, 1, field="fp:3"))
    assert ak_complex(QuantizedCycle.standalone(2, 1, field="fp:3")).check_d2()


def test_change_of_quantization():
    qc = QuantizedCycle.standalone(1, 1)
    R = qc.ring
    zero = change_quantization_iso(qc, PolyMatrix(R, 1, 1))
    assert zero.verdict and zero.map.is_identity()
    ch = change_quantization_iso(qc, PolyMatrix(R, 1, 1, [[R.const(3)]]))
    assert ch.verdict
    assert strs(ch.map.zeroth[0]) == [["1", "0"], ["0", "1"]]
    assert strs(ch.map.first[0][0]) == [["0", "3"], ["0", "0"]]
    qc2 = QuantizedCycle.standalone(2, 1)
    R2 = qc2.ring
    phi = PolyMatrix(R2, 2, 1, [[R2.parse("3*y1")], [R2.parse("y1^2")]])
    ch2 = change_quantization_iso(qc2, phi)
    assert ch2.chain_map_ok and ch2.module_map_ok and ch2.inverse_ok


def test_restrict_ak_examples():
    res = restrict_ak(pair_of(RUNNING))
    assert res.ranks() == [2, 2, 1] and res.quotient_check
    assert res.complex.validate()
    tr = pair_of(TRANSVERSE)
    res = restrict_ak(tr)
    assert res.ranks() == [2, 1]
    assert res.ranks() == ak_complex(QuantizedCycle.standalone(1, 0)).ranks()
    res = restrict_ak(pair_of(SELF2))
    assert res.ranks() == [comb(2, k) for k in range(3)]


def test_leray_examples():
    pair = pair_of(RUNNING)
    f = leray_filtration(pair, 1, 1)
    assert f.rank == 1 and f.basis == [(1,)]
    f = leray_filtration(pair, 2, 1)
    assert f.rank == 1 and f.basis == [(0, 1)]
    assert leray_filtration(pair, 2, 0).rank == 1
    assert leray_filtration(pair, 1, 0).rank == 2
    with pytest.raises(ValueError):
        leray_filtration(pair, 1, 2)


def test_psi_theta_examples():
    pt = psi_theta(pair_of(RUNNING))
    assert pt.verdict
    assert pt.component_shapes() == [(1, 1), (2, 1), (1, 0)]
    pt = psi_theta(pair_of(TRANSVERSE))
    assert pt.verdict and pt.is_augmentation
    pt = psi_theta(pair_of(SELF2))
    assert pt.verdict
    assert [s for _, s in pt.component_shapes()] == [1, 2, 1]


def test_atiyah_examples():
    at = atiyah_morphism(pair_of(RUNNING))
    assert at.verdict and strs(at.dt_matrix) == [["1"]]
    at = atiyah_morphism(pair_of(TRANSVERSE))
    assert at.verdict and at.dt_matrix.shape == (0, 0)
    at = atiyah_morphism(pair_of(R2PAIR))
    assert at.verdict and strs(at.dt_matrix) == [["1", "0"], ["0", "1"]]


def test_extraction_examples():
    pair = pair_of(RUNNING)
    pt = psi_theta(pair)
    ex = extract_splitting_from_formality(pair, pt.theta)
    assert ex.verdict and strs(ex.retraction) == [["0", "1"]]
    pair = pair_of(SELF2)
    ses = excess_sequence(pair)
    ex = extract_splitting_from_formality(pair, psi_theta(pair, ses).theta, ses)
    assert ex.verdict and ex.retraction == PolyMatrix.identity(ses.ring, 2)
    pair = pair_of(RUNNING)
    ses = excess_sequence(pair, shear_seed=5)
    w = find_module_splitting(ses)
    ex = extract_splitting_from_formality(pair, psi_theta(pair, ses, w).theta, ses)
    assert ex.verdict and ex.retraction == w.retraction
    assert ex.retraction @ ses.alpha == PolyMatrix.identity(ses.ring, 1)


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_restricted_ranks_and_filtration(seed, n):
    pair = random_linear_pair(seed, n, field="fp:32003")
    p, r = pair.p, pair.r
    res = restrict_ak(pair)
    assert res.ranks() == [comb(p, k + 1) + comb(p + r, k) for k in range(p + r + 1)]
    for k in range(p + r + 1):
        ranks = [leray_filtration(pair, k, l).rank for l in range(k + 1)]
        assert ranks[0] == comb(p + r, k)
        assert all(a >= b for a, b in zip(ranks, ranks[1:]))
        assert sum(leray_graded_ranks(pair, k)) == comb(p + r, k)


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 100))
def test_theta_roundtrip(seed, n, shear):
    pair = random_linear_pair(seed, n, field="fp:32003")
    ses = excess_sequence(pair, shear_seed=shear)
    w = find_module_splitting(ses)
    pt = psi_theta(pair, ses, w)
    assert pt.verdict
    ex = extract_splitting_from_formality(pair, pt.theta, ses)
    assert ex.verdict
    assert ex.retraction @ ses.alpha == PolyMatrix.identity(ses.ring, pair.r)


@given(st.integers(1, 3), st.integers(0, 2), st.integers(-3, 3))
def test_change_inverse(codim, dim, c):
    qc = QuantizedCycle.standalone(codim, dim)
    R = qc.ring
    phi = PolyMatrix(R, codim, dim, [[R.const(c) + (R.gens()[j] * (i + 1)) for j in range(dim)]
                                     for i in range(codim)])
    ch = change_quantization_iso(qc, phi)
    assert ch.verdict
