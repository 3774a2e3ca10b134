import random

from hypothesis import given, strategies as st

from derived_intersect.groebner import ModulePresentation, groebner_basis, module_is_zero
from derived_intersect.homalg import (
    ChainComplex,
    ChainMap,
    complexes_equal,
    generic_point,
    homology,
    identity_map,
    is_quasi_iso,
    map_is_isomorphism,
    mapping_cone,
    shift,
    tensor_complexes,
    zero_complex,
    zero_map,
)
from derived_intersect.koszul import koszul_complex
from derived_intersect.matrix import PolyMatrix
from derived_intersect.polyring import PolyRing

from conftest import polys

R1 = PolyRing(["x"])
R2 = PolyRing(["x", "y"])
x1 = R1.gen("x")
x, y = R2.gen("x"), R2.gen("y")


def ideal_of(H):
    """Reduced relation ideal of a cyclic homology module."""
    small, _ = H.presentation.minimized()
    assert small.rank == 1
    return [str(f) for f in groebner_basis(small.relations).polys]


def test_validate_examples():
    assert koszul_complex([x, y], R2).validate()
    bad = ChainComplex(R2, {-1: 1, 0: 1}, {-1: PolyMatrix.identity(R2, 2)})
    rep = bad.validate()
    assert not rep and rep.kind == "shape" and rep.degree == -1
    sq = ChainComplex(R1, {-2: 1, -1: 1, 0: 1}, {-2: PolyMatrix(R1, 1, 1, [[x1]]), -1: PolyMatrix(R1, 1, 1, [[x1]])})
    rep = sq.validate()
    assert not rep and rep.kind == "d2"


def test_koszul_homology():
    K = koszul_complex([x, y], R2)
    assert ideal_of(homology(K, 0)) == ["x", "y"]
    assert homology(K, -1).is_zero()
    assert homology(K, -2).is_zero()
    K2 = koszul_complex([x1, x1], R1)
    assert ideal_of(homology(K2, -1)) == ["x"]
    Z = zero_complex(R2)
    assert homology(Z, 0).is_zero()


def test_cone_examples():
    K = koszul_complex([x1], R1)
    assert is_quasi_iso(identity_map(K)).verdict
    C = mapping_cone(identity_map(K))
    assert all(homology(C, i).is_zero() for i in C.degrees())
    # C -> 0 has cone C[1]
    f = zero_map(K, zero_complex(R1))
    cone = mapping_cone(f)
    assert complexes_equal(cone, shift(K, 1))
    # zero map Koszul(x) -> Koszul(x) is not a quasi-iso, witness in degree 0
    res = is_quasi_iso(zero_map(K, K))
    assert not res.verdict
    assert any(d == 0 and not z for d, z, _ in res.degrees)


def test_comparison_of_resolutions():
    # R --x--> R resolves R/(x); map onto R/(x) in degree 0
    K = koszul_complex([x1], R1)
    Q = ChainComplex(R1, {0: 1}, {}, {0: PolyMatrix(R1, 1, 1, [[x1]])})
    f = ChainMap(K, Q, {0: PolyMatrix.identity(R1, 1), -1: PolyMatrix(R1, 0, 1)})
    assert f.validate()
    assert is_quasi_iso(f).verdict


def test_tensor_examples():
    Kx = koszul_complex([x], R2)
    Ky = koszul_complex([y], R2)
    T = tensor_complexes(Kx, Ky)
    assert [T.rank(i) for i in T.degrees()] == [1, 2, 1]
    assert T.validate()
    assert ideal_of(homology(T, 0)) == ["x", "y"]
    assert homology(T, -1).is_zero()
    unit = ChainComplex(R2, {0: 1})
    assert complexes_equal(tensor_complexes(Kx, unit), Kx)
    K1 = koszul_complex([x1], R1)
    TT = tensor_complexes(K1, K1)
    assert ideal_of(homology(TT, -1)) == ["x"]


def test_shift_examples():
    K = koszul_complex([x, y], R2)
    assert complexes_equal(shift(K, 0), K)
    assert complexes_equal(shift(shift(K, 1), -1), K)
    M = ChainComplex(R2, {0: 1})
    assert shift(M, 2).rank(-2) == 1 and shift(M, 2).hi == -2


def test_json_roundtrip():
    K = koszul_complex([x, y], R2)
    data = K.to_json()
    assert set(data["differentials"]) == {"d(-2)", "d(-1)"}
    assert complexes_equal(ChainComplex.from_json(data), K)


def test_map_is_isomorphism():
    P = ModulePresentation(R2, 1, PolyMatrix(R2, 1, 1, [[x]]))
    Q = ModulePresentation(R2, 1, PolyMatrix(R2, 1, 1, [[x]]))
    assert map_is_isomorphism(P, Q, PolyMatrix(R2, 1, 1, [[R2.const(2)]])).verdict
    assert not map_is_isomorphism(P, Q, PolyMatrix(R2, 1, 1, [[y]])).verdict


R3 = PolyRing(["x", "y", "z"], "fp:32003")
seqs = st.lists(polys(R3, max_terms=2, max_deg=2), min_size=1, max_size=3)


@given(seqs)
def test_euler_characteristic(seq):
    K = koszul_complex(seq, R3)
    ok, chi_terms, chi_h = K.euler_characteristic_check(random.Random(1))
    assert ok and chi_terms == chi_h


@given(seqs)
def test_identity_is_quasi_iso(seq):
    K = koszul_complex(seq, R3)
    assert K.validate()
    assert is_quasi_iso(identity_map(K)).verdict


@given(st.lists(polys(R3, max_terms=2, max_deg=1), min_size=3, max_size=3))
def test_tensor_associativity(seq):
    A, B, C = (koszul_complex([f], R3) for f in seq)
    left = tensor_complexes(tensor_complexes(A, B), C)
    right = tensor_complexes(A, tensor_complexes(B, C))
    assert left.validate() and right.validate()
    pt = generic_point(R3, [], random.Random(2))
    for i in left.degrees():
        assert left.rank(i) == right.rank(i)
        hl, hr = homology(left, i), homology(right, i)
        assert module_is_zero(hl.presentation).is_zero == module_is_zero(hr.presentation).is_zero
        assert hl.presentation.generic_rank(pt) == hr.presentation.generic_rank(pt)


@given(seqs)
def test_boundaries_are_cycles(seq):
    K = koszul_complex(seq, R3)
    for i in K.degrees():
        H = homology(K, i)
        if K.rank(i + 1) and H.cycles.cols:
            assert (K.d(i) @ H.cycles).is_zero()


def test_homology_degree_out_of_range_is_zero():
    K = koszul_complex([x], R2)
    assert homology(K, -5).is_zero()
