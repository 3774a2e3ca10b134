import random

import pytest
from hypothesis import given, strategies as st

from derived_intersect.graded_split import (
    GradedBundleMap,
    GradedSection,
    LineBundleSum,
    NonSplitCertificate,
    NotHomogeneous,
    NotSurjective,
    euler_excess_example,
    find_graded_section,
    graded_hom_basis,
    hom_dimension,
    monomials,
    projective_ring,
    random_graded_automorphism,
    random_split_surjection,
)
from derived_intersect.matrix import PolyMatrix


def L(n, *twists):
    return LineBundleSum(n, twists)


def test_hom_dimension_examples():
    R = projective_ring(1)
    assert hom_dimension(L(1, 0), L(1, -1)) == 0
    assert hom_dimension(L(1, -1), L(1, 2)) == 4
    assert hom_dimension(L(1, 5), L(1, 5)) == 1
    assert len(graded_hom_basis(L(1, -1), L(1, 2), R)) == 4


def test_euler_p1():
    pi = euler_excess_example(1)
    cert = find_graded_section(pi)
    assert isinstance(cert, NonSplitCertificate)
    assert cert.unknowns == 0 and cert.solution_dimension == 0
    assert cert.verify()
    assert cert.to_json()["verdict"] == "non-split"


def test_euler_p2_and_conjugated():
    pi = euler_excess_example(2)
    assert isinstance(find_graded_section(pi), NonSplitCertificate)
    g, _ = random_graded_automorphism(pi.source, pi.ring, random.Random(3))
    conj = GradedBundleMap(pi.source, pi.target, pi.matrix @ g)
    assert isinstance(find_graded_section(conj), NonSplitCertificate)


def test_split_example():
    R = projective_ring(1)
    pi = GradedBundleMap(L(1, 0, -1), L(1, 0), PolyMatrix(R, 1, 2, [[R.one(), R.zero()]]))
    sec = find_graded_section(pi)
    assert isinstance(sec, GradedSection)
    assert [[str(a) for a in row] for row in sec.section.matrix.entries] == [["1"], ["0"]]


def test_twisted_euler_nonsplit():
    R = projective_ring(1)
    s, t = R.gens()
    pi = GradedBundleMap(L(1, 1, 1), L(1, 2), PolyMatrix(R, 1, 2, [[s, t]]))
    cert = find_graded_section(pi)
    assert isinstance(cert, NonSplitCertificate)
    # a section O(2) -> O(1)^2 would need forms of degree -1, so the system reads 0 = 1
    assert cert.rank < cert.augmented_rank and cert.verify()


def test_nonsplit_with_unknowns():
    # O(-1)^2 ⊕ O(1) -> O via (s, t, 0): the O(1) slot offers two candidate forms, neither helps
    R = projective_ring(1)
    s, t = R.gens()
    pi = GradedBundleMap(L(1, -1, -1, 1), L(1, 0), PolyMatrix(R, 1, 3, [[s, t, R.zero()]]))
    cert = find_graded_section(pi)
    assert isinstance(cert, NonSplitCertificate)
    assert cert.unknowns == 2 and cert.rank == 0 and cert.augmented_rank == 1
    assert cert.solution_dimension == 2 and cert.verify()


def test_non_surjective_rejected():
    R = projective_ring(1)
    s, t = R.gens()
    pi = GradedBundleMap(L(1, -1, -1), L(1, 0), PolyMatrix(R, 1, 2, [[s, s]]))
    with pytest.raises(NotSurjective) as exc:
        find_graded_section(pi)
    assert exc.value.variable == "t"


def test_inhomogeneous_rejected():
    R = projective_ring(1)
    with pytest.raises(NotHomogeneous):
        GradedBundleMap(L(1, -1), L(1, 0), PolyMatrix(R, 1, 1, [[R.parse("s + 1")]]))


def _count_monomials(nvars, d):
    # direct enumeration of exponent vectors of total degree d
    if d < 0:
        return 0
    if nvars == 1:
        return 1
    return sum(_count_monomials(nvars - 1, d - k) for k in range(d + 1))


@given(st.integers(1, 3), st.lists(st.integers(-3, 3), max_size=3), st.lists(st.integers(-3, 3), max_size=3))
def test_hom_dimension_matches_counter(n, a, b):
    A, B = LineBundleSum(n, a), LineBundleSum(n, b)
    expected = sum(_count_monomials(n + 1, bj - ai) for bj in b for ai in a)
    assert hom_dimension(A, B) == expected
    assert len(graded_hom_basis(A, B, projective_ring(n))) == expected
    assert all(len(monomials(projective_ring(n), d)) == _count_monomials(n + 1, d) for d in range(3))


@given(st.integers(0, 10_000), st.integers(1, 2),
       st.lists(st.integers(-2, 1), min_size=1, max_size=2), st.lists(st.integers(-1, 1), min_size=1, max_size=2))
def test_split_surjections_split(seed, n, kernel, target):
    pi = random_split_surjection(n, kernel, target, seed)
    sec = find_graded_section(pi)
    assert isinstance(sec, GradedSection)
    assert pi.matrix @ sec.section.matrix == PolyMatrix.identity(pi.ring, len(target))
