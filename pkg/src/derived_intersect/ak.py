"""Atiyah-Kashiwara complexes, their restriction to Y, and the formality maps.

Every term of the AK complex of a codimension-c cycle in degree -k is
Λ^{k+1} N* ⊕ Λ^k N*; vectors list the Λ^{k+1} coordinates (the "a" part)
first and the Λ^k coordinates (the "b" part) second.  Exterior bases are
subsets of the conormal coordinates in the order (x, t).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .cycles import ExcessSequence, LinearCyclePair, SplittingWitness, excess_sequence, find_module_splitting
from .groebner import LiftEngine, matrix_inverse, module_is_zero
from .homalg import (
    ChainComplex,
    ChainMap,
    ValidationReport,
    homology,
    ideal_relations,
    is_quasi_iso,
    map_is_isomorphism,
    tensor_complexes,
    tensor_maps,
)
from .koszul import (
    DerivedRestriction,
    derived_restriction,
    excess_module,
    exterior_power,
    koszul_complex,
    subset_index,
    subsets,
    tensor_element,
    wedge,
)
from .matrix import PolyMatrix
from .polyring import Poly, PolyRing


class CharacteristicTooSmall(ValueError):
    pass


class ExtractionError(RuntimeError):
    """The homology-level construction broke down; ``detail`` says where."""

    def __init__(self, msg, detail=None):
        super().__init__(msg)
        self.detail = detail


# ---------------------------------------------------------------------------
# quantized cycles and the AK complex


@dataclass
class QuantizedCycle:
    """X = V(conormal) with the coordinate retraction shifted by ``phi``.

    ``phi`` has one row per conormal coordinate and one column per tangent
    coordinate of X; column v is phi(dv) in the basis ds_j.  Entries live in
    the coordinate ring of X.
    """

    ring: PolyRing
    conormal: list
    tangent: list
    phi: PolyMatrix

    @property
    def codim(self):
        return len(self.conormal)

    @classmethod
    def from_pair(cls, pair: LinearCyclePair, phi: PolyMatrix | None = None) -> "QuantizedCycle":
        RX = pair.ring_x()
        c = pair.codim_x
        if phi is None:
            phi = PolyMatrix(RX, c, RX.nvars)
        return cls(RX, pair.conormal_x_names(), list(RX.names), phi)

    @classmethod
    def standalone(cls, codim: int, dim: int, field=0, phi=None) -> "QuantizedCycle":
        names = [f"y{i + 1}" for i in range(dim)]
        RX = PolyRing(names, field)
        if phi is None:
            phi = PolyMatrix(RX, codim, dim)
        return cls(RX, [f"x{i + 1}" for i in range(codim)], names, phi)

    def check(self):
        if self.phi.shape != (self.codim, len(self.tangent)):
            raise ValueError(f"phi must be {self.codim} x {len(self.tangent)}")
        self.ring.check_same(self.phi.ring)


def _split(c: int, k: int):
    return comb(c, k + 1), comb(c, k)


def _wedge_table(c: int, k: int, j: int, ring: PolyRing) -> PolyMatrix:
    """ds_j ∧ on the b part of term -k, landing in the a part."""
    na, nb = _split(c, k)
    M = PolyMatrix(ring, na + nb, na + nb)
    a_idx = subset_index(c, k + 1)
    for bi, S in enumerate(subsets(c, k)):
        sign, U = wedge((j,), S)
        if sign:
            M.entries[a_idx[U]][na + bi] = ring.const(sign)
    return M


def _twist_tables(c: int, k: int, phi: PolyMatrix, ring: PolyRing) -> list:
    """phi(dv) ∧ on the b part, one matrix per tangent coordinate v."""
    out = []
    tables = [_wedge_table(c, k, j, ring) for j in range(c)]
    na, nb = _split(c, k)
    for v in range(phi.cols):
        M = PolyMatrix(ring, na + nb, na + nb)
        for j in range(c):
            f = phi.entries[j][v]
            if f.terms:
                M = M + tables[j].scale(f)
        out.append(M)
    return out


def _ak_differential(c: int, k: int, ring: PolyRing) -> PolyMatrix:
    """d_{-k}(a, b) = (k b, 0)."""
    na_s, nb_s = _split(c, k)
    na_t, nb_t = _split(c, k - 1)
    M = PolyMatrix(ring, na_t + nb_t, na_s + nb_s)
    for bi in range(nb_s):
        M.entries[bi][na_s + bi] = ring.const(k)
    return M


@dataclass
class AKComplexData:
    qc: QuantizedCycle
    complex: ChainComplex
    nstar_action: dict
    twist: dict
    scale_note: str = "stored differential is k times the composition Λ^{k+1}⊕Λ^k -> Λ^k -> Λ^k⊕Λ^{k-1}"

    def check_d2(self) -> ValidationReport:
        return self.complex.validate()

    def check_square_zero(self) -> bool:
        for k, tabs in self.nstar_action.items():
            for A in tabs:
                for B in tabs:
                    if not (A @ B).is_zero():
                        return False
        return True

    def check_equivariance(self) -> list:
        """Degrees where d fails to commute with the N* action or the phi twist."""
        bad = []
        c = self.qc.codim
        for k in range(1, c + 1):
            d = self.complex.d(-k)
            for j, (src, tgt) in enumerate(zip(self.nstar_action[k], self.nstar_action[k - 1])):
                if d @ src != tgt @ d:
                    bad.append({"degree": -k, "action": f"d{self.qc.conormal[j]}"})
            for v, (src, tgt) in enumerate(zip(self.twist[k], self.twist[k - 1])):
                if d @ src != tgt @ d:
                    bad.append({"degree": -k, "action": f"twist {self.qc.tangent[v]}"})
        return bad

    def check_resolution(self) -> dict:
        """H^0 free of rank one, higher homology zero."""
        c = self.qc.codim
        h0 = homology(self.complex, 0).presentation
        small, _ = h0.minimized()
        h0_ok = small.rank == 1 and small.relations.is_zero()
        higher = {}
        for k in range(1, c + 2):
            h = homology(self.complex, -k)
            higher[k] = module_is_zero(h.presentation).is_zero
        return {"H0_free_rank_one": h0_ok, "higher_zero": higher,
                "ok": h0_ok and all(higher.values())}

    def ranks(self):
        return [self.complex.rank(-k) for k in range(self.qc.codim + 1)]


def ak_complex(qc: QuantizedCycle) -> AKComplexData:
    qc.check()
    c = qc.codim
    ring = qc.ring
    if ring.p and ring.p <= c:
        raise CharacteristicTooSmall(
            f"the AK differential needs 1..{c} invertible; characteristic {ring.p} is too small"
        )
    ranks = {-k: sum(_split(c, k)) for k in range(c + 1)}
    diffs = {-k: _ak_differential(c, k, ring) for k in range(1, c + 1)}
    cx = ChainComplex(ring, ranks, diffs)
    cx.labels["split"] = {-k: _split(c, k)[0] for k in range(c + 1)}
    action = {k: [_wedge_table(c, k, j, ring) for j in range(c)] for k in range(c + 1)}
    twist = {k: _twist_tables(c, k, qc.phi, ring) for k in range(c + 1)}
    return AKComplexData(qc, cx, action, twist)


# ---------------------------------------------------------------------------
# change of quantization


@dataclass
class DiffOpMap:
    """Degreewise first-order operators w -> M0 w + sum_v M_v (d w / d v)."""

    ring: PolyRing
    tangent: list
    zeroth: dict
    first: dict

    def apply(self, k: int, vec: Sequence[Poly]) -> list[Poly]:
        out = self.zeroth[k].apply(vec)
        for v, M in zip(self.tangent, self.first[k]):
            dv = [f.diff(v) for f in vec]
            if any(f.terms for f in dv):
                out = [a + b for a, b in zip(out, M.apply(dv))]
        return out

    def compose(self, other: "DiffOpMap") -> "DiffOpMap":
        """``self ∘ other``; both must be first order with nilpotent symbols."""
        zeroth, first = {}, {}
        for k in self.zeroth:
            A0, B0 = self.zeroth[k], other.zeroth[k]
            for v, Av in enumerate(self.first[k]):
                for w, Bw in enumerate(other.first[k]):
                    if not (Av @ Bw).is_zero():
                        raise ValueError("composite is not first order")
                    dB = Bw.map_entries(lambda f: f.diff(self.tangent[v]))
                    if not (Av @ dB).is_zero():
                        raise ValueError("composite picks up a non-constant zeroth-order term")
                if any(f.terms for row in B0.entries for f in row if not f.is_constant()):
                    raise ValueError("zeroth-order part must be constant")
            zeroth[k] = A0 @ B0
            first[k] = [A0 @ Bv + Av @ B0 for Av, Bv in zip(self.first[k], other.first[k])]
        return DiffOpMap(self.ring, self.tangent, zeroth, first)

    def is_identity(self) -> bool:
        for k, M0 in self.zeroth.items():
            if M0 != PolyMatrix.identity(self.ring, M0.rows):
                return False
            if any(not M.is_zero() for M in self.first[k]):
                return False
        return True

    def to_json(self):
        out = {}
        for k in sorted(self.zeroth):
            out[f"f({-k})"] = {
                "1": [[str(a) for a in r] for r in self.zeroth[k].entries],
                **{
                    f"d/d{v}": [[str(a) for a in r] for r in M.entries]
                    for v, M in zip(self.tangent, self.first[k])
                },
            }
        return out


@dataclass
class ChangeOfQuantization:
    map: DiffOpMap
    source: AKComplexData
    target: AKComplexData
    chain_map_ok: bool
    module_map_ok: bool
    inverse_ok: bool

    @property
    def verdict(self):
        return self.chain_map_ok and self.module_map_ok and self.inverse_ok


def _change_map(qc: QuantizedCycle, phi: PolyMatrix) -> DiffOpMap:
    c = qc.codim
    ring = qc.ring
    zeroth = {k: PolyMatrix.identity(ring, sum(_split(c, k))) for k in range(c + 1)}
    first = {k: _twist_tables(c, k, phi, ring) for k in range(c + 1)}
    return DiffOpMap(ring, list(qc.tangent), zeroth, first)


def _test_monomials(ring: PolyRing, max_deg: int = 2):
    out = [ring.one()]
    layer = [ring.one()]
    for _ in range(max_deg):
        nxt = []
        for m in layer:
            for g in ring.gens():
                h = m * g
                if h not in nxt:
                    nxt.append(h)
        out.extend(nxt)
        layer = nxt
    return out


def change_quantization_iso(qc: QuantizedCycle, phi: PolyMatrix) -> ChangeOfQuantization:
    """(i, j) -> (i + phi ∧ ∇ j, j) from P_sigma to P_{sigma + phi}, with ∇ the trivial connection."""
    qc.check()
    src = ak_complex(qc)
    tgt_qc = QuantizedCycle(qc.ring, qc.conormal, qc.tangent, qc.phi + phi)
    tgt = ak_complex(tgt_qc)
    fwd = _change_map(qc, phi)
    back = _change_map(tgt_qc, -phi)
    c = qc.codim
    chain_ok = True
    for k in range(1, c + 1):
        d = src.complex.d(-k)
        if d @ fwd.zeroth[k] != fwd.zeroth[k - 1] @ d:
            chain_ok = False
        for M_src, M_tgt in zip(fwd.first[k], fwd.first[k - 1]):
            if d @ M_src != M_tgt @ d:
                chain_ok = False
    # module map: f(v ._sigma w) == v ._{sigma+phi} f(w) on monomial multiples of basis vectors
    module_ok = True
    ring = qc.ring
    monos = _test_monomials(ring)
    for k in range(c + 1):
        n = src.complex.rank(-k)
        for vi, v in enumerate(qc.tangent):
            g = ring.gen(v)
            for m in monos:
                for e in range(n):
                    w = [m if i == e else ring.zero() for i in range(n)]
                    vw = [g * f for f in w]
                    lhs_in = [a + b for a, b in zip(vw, src.twist[k][vi].apply(w))]
                    lhs = fwd.apply(k, lhs_in)
                    fw = fwd.apply(k, w)
                    rhs = [a + b for a, b in zip([g * f for f in fw], tgt.twist[k][vi].apply(fw))]
                    if lhs != rhs:
                        module_ok = False
    try:
        inverse_ok = back.compose(fwd).is_identity() and fwd.compose(back).is_identity()
    except ValueError:
        inverse_ok = False
    return ChangeOfQuantization(fwd, src, tgt, chain_ok, module_ok, inverse_ok)


# ---------------------------------------------------------------------------
# restriction to Y


@dataclass
class RestrictedAK:
    """Λ^{k+1} N*_{T/Y} ⊕ Λ^k N^ in degree -k, presented over O_Y = k[x, z].

    An x coordinate acts through dx ∧ from the b part into the a part; the
    t and z coordinates act through O_T.
    """

    pair: LinearCyclePair
    complex: ChainComplex
    a_basis: dict
    b_basis: dict
    quotient_check: bool

    def ranks(self):
        return [self.complex.rank(-k) for k in range(self.pair.codim_x + 1)]


def restrict_ak(pair: LinearCyclePair, qc: QuantizedCycle | None = None) -> RestrictedAK:
    p, r = pair.p, pair.r
    c = p + r
    RY = pair.ring_y()
    qc = qc or QuantizedCycle.from_pair(pair)
    xs = [RY.gen(nm) for nm in pair.x_names()]
    ranks, diffs, rels = {}, {}, {}
    a_basis, b_basis = {}, {}
    for k in range(c + 1):
        A = subsets(p, k + 1)  # subsets of x indices only
        B = subsets(c, k)
        a_basis[k], b_basis[k] = A, B
        na, nb = len(A), len(B)
        ranks[-k] = na + nb
        a_idx = {S: i for i, S in enumerate(A)}
        cols = []
        for ai in range(na):
            for g in xs:
                col = [RY.zero()] * (na + nb)
                col[ai] = g
                cols.append(col)
        for bi, S in enumerate(B):
            for j, g in enumerate(xs):
                col = [RY.zero()] * (na + nb)
                col[na + bi] = g
                sign, U = wedge((j,), S)
                if sign and U in a_idx:
                    col[a_idx[U]] = RY.const(-sign)
                cols.append(col)
        if cols:
            rels[-k] = PolyMatrix.from_columns(RY, na + nb, cols)
    for k in range(1, c + 1):
        A_t = {S: i for i, S in enumerate(a_basis[k - 1])}
        na_s, nb_s = len(a_basis[k]), len(b_basis[k])
        M = PolyMatrix(RY, ranks[-k + 1], na_s + nb_s)
        for bi, S in enumerate(b_basis[k]):
            if S in A_t:
                M.entries[A_t[S]][na_s + bi] = RY.const(k)
        diffs[-k] = M
    cx = ChainComplex(RY, ranks, diffs, rels)
    ok = _check_restriction_quotient(pair, qc, cx, a_basis, b_basis)
    return RestrictedAK(pair, cx, a_basis, b_basis, ok)


def _check_restriction_quotient(pair, qc, cx, a_basis, b_basis) -> bool:
    """Recompute each restricted term as a quotient of the AK action table.

    The excess directions dt act on the AK term; the span of their images
    must be exactly the dt-containing part of Λ^{k+1}, and the surviving
    differential must match the one built directly.
    """
    p, r = pair.p, pair.r
    c = p + r
    RT = pair.ring_t()
    data = ak_complex(QuantizedCycle(qc.ring, qc.conormal, qc.tangent, qc.phi))
    for k in range(c + 1):
        na, nb = _split(c, k)
        images = []
        for j in range(p, c):
            T = data.nstar_action[k][j].transfer(RT)
            for col in T.columns():
                if any(f.terms for f in col):
                    images.append(col)
        full_a = subsets(c, k + 1)
        expected = []
        for i, S in enumerate(full_a):
            if any(s >= p for s in S):
                v = [RT.zero()] * (na + nb)
                v[i] = RT.one()
                expected.append(v)
        if bool(images) != bool(expected):
            return False
        if images:
            e1 = LiftEngine(PolyMatrix.from_columns(RT, na + nb, images))
            e2 = LiftEngine(PolyMatrix.from_columns(RT, na + nb, expected))
            if not all(e1.contains(v) for v in expected) or not all(e2.contains(v) for v in images):
                return False
        kept = [i for i, S in enumerate(full_a) if all(s < p for s in S)]
        if [full_a[i] for i in kept] != list(a_basis[k]):
            return False
        if k >= 1:
            d = data.complex.d(-k).transfer(RT)
            na_t = comb(c, k)
            kept_t = [i for i, S in enumerate(subsets(c, k)) if all(s < p for s in S)]
            rows = kept_t + list(range(na_t, na_t + comb(c, k - 1)))
            cols = kept + list(range(na, na + nb))
            if d.submatrix(rows, cols) != cx.d(-k).transfer(RT):
                return False
    return True


# ---------------------------------------------------------------------------
# Leray filtration


@dataclass
class LerayPiece:
    k: int
    level: int
    basis: list
    rank: int
    formula_rank: int

    def to_json(self):
        return {"k": self.k, "level": self.level, "rank": self.rank, "formula_rank": self.formula_rank}


def leray_filtration(pair: LinearCyclePair, k: int, level: int) -> LerayPiece:
    """F_level of Λ^k N^: span of basis wedges with at least ``level`` dt factors."""
    p, r = pair.p, pair.r
    if not 0 <= k <= p + r:
        raise ValueError(f"k must lie in [0, {p + r}]")
    if not 0 <= level <= k:
        raise ValueError(f"level must lie in [0, {k}]")
    basis = [S for S in subsets(p + r, k) if sum(1 for s in S if s >= p) >= level]
    formula = comb(p + r, k) - sum(comb(r, j) * comb(p, k - j) for j in range(level))
    return LerayPiece(k, level, basis, len(basis), formula)


def leray_graded_ranks(pair: LinearCyclePair, k: int) -> list:
    """Ranks of F_l / F_{l+1} for l = 0..k."""
    pieces = [leray_filtration(pair, k, l).rank for l in range(k + 1)] + [0]
    return [pieces[l] - pieces[l + 1] for l in range(k + 1)]


# ---------------------------------------------------------------------------
# formality maps


def formal_complex(pair: LinearCyclePair, ring: PolyRing | None = None) -> ChainComplex:
    """s(E) = ⊕ Λ^k E [k] with zero differential, over O_Y with the relations of O_T."""
    RY = ring or pair.ring_y()
    r = pair.r
    xs = [RY.gen(nm) for nm in pair.x_names()]
    ranks = {-k: comb(r, k) for k in range(r + 1)}
    rels = {-k: ideal_relations(RY, xs, comb(r, k)) for k in range(r + 1)} if xs else {}
    return ChainComplex(RY, ranks, {}, rels, xs)


@dataclass
class PsiThetaResult:
    theta: ChainMap
    theta_valid: ValidationReport
    quasi_iso: object
    gamma_restricted: ChainMap
    gamma_valid: ValidationReport
    restricted: RestrictedAK
    factorization_ok: bool
    is_augmentation: bool
    witness: SplittingWitness

    @property
    def verdict(self):
        return bool(self.theta_valid) and self.quasi_iso.verdict and bool(self.gamma_valid) and self.factorization_ok

    def component_shapes(self):
        return [(self.theta.source.rank(-k), self.theta.target.rank(-k))
                for k in range(-self.theta.source.lo + 1)]


def _theta_components(pair, ses, w, F, S):
    """Θ_{-k} = Λ^k(ρ ∘ (canonical -> working basis of N^)) from F^{-k} to Λ^k E."""
    RY = F.ring
    M = w.retraction @ ses.from_canon["Nhat"]
    comps = {}
    for k in range(pair.codim_x + 1):
        comps[-k] = exterior_power(M, k).transfer(RY) if k <= pair.r else PolyMatrix(RY, 0, F.rank(-k))
    return comps


def psi_theta(pair: LinearCyclePair, ses: ExcessSequence | None = None, w: SplittingWitness | None = None,
              qc: QuantizedCycle | None = None, dr: DerivedRestriction | None = None) -> PsiThetaResult:
    """Θ from the derived restriction to s(E) built from a splitting, with its Ψ factor."""
    ses = ses or excess_sequence(pair)
    if w is None:
        w = find_module_splitting(ses)
        if not isinstance(w, SplittingWitness):
            raise ValueError("the excess sequence does not split")
    dr = dr or derived_restriction(pair)
    F = dr.complex
    S = formal_complex(pair, dr.ring)
    theta = ChainMap(F, S, _theta_components(pair, ses, w, F, S))
    tv = theta.validate()
    qi = is_quasi_iso(theta)
    # Ψ: gamma restricted to Y sends e_S to b_S in the restricted AK complex
    res = restrict_ak(pair, qc)
    P = res.complex
    RY = dr.ring
    comps = {}
    for k in range(pair.codim_x + 1):
        na = len(res.a_basis[k])
        nb = len(res.b_basis[k])
        M = PolyMatrix(RY, na + nb, nb)
        for bi in range(nb):
            M.entries[na + bi][bi] = RY.one()
        comps[-k] = M
    gamma_y = ChainMap(F, P, comps)
    gv = gamma_y.validate()
    # Θ factors as Λ^k(ρ') composed with the b part of Ψ
    fact = True
    M = (w.retraction @ ses.from_canon["Nhat"])
    for k in range(pair.codim_x + 1):
        na = len(res.a_basis[k])
        b_part = gamma_y.f(-k).submatrix(rows=range(na, P.rank(-k)))
        lam = exterior_power(M, k).transfer(RY) if k <= pair.r else PolyMatrix(RY, 0, b_part.rows)
        if lam @ b_part != theta.f(-k):
            fact = False
    aug = all(theta.f(-k).is_zero() for k in range(1, pair.codim_x + 1))
    aug = aug and theta.f(0) == PolyMatrix.identity(RY, 1)
    return PsiThetaResult(theta, tv, qi, gamma_y, gv, res, fact, aug, w)


@dataclass
class AtiyahResult:
    map: ChainMap
    valid: ValidationReport
    iso: object
    dt_matrix: PolyMatrix

    @property
    def verdict(self):
        return bool(self.valid) and self.iso.verdict


def atiyah_morphism(pair: LinearCyclePair, ses: ExcessSequence | None = None,
                    dr: DerivedRestriction | None = None) -> AtiyahResult:
    """Degree -1 map dx -> 0, dt_b -> e_b from the derived restriction to E[1]."""
    ses = ses or excess_sequence(pair)
    dr = dr or derived_restriction(pair)
    F = dr.complex
    RY = dr.ring
    p, r = pair.p, pair.r
    xs = [RY.gen(nm) for nm in pair.x_names()]
    E1 = ChainComplex(RY, {-1: r, 0: 0}, {}, {-1: ideal_relations(RY, xs, r)} if xs and r else {}, xs)
    proj = PolyMatrix(ses.ring, r, p + r, [[int(j == p + i) for j in range(p + r)] for i in range(r)])
    comp = (ses.from_canon["E"] @ proj).transfer(RY)
    at = ChainMap(F, E1, {-1: comp})
    valid = at.validate()
    H = dr.homology(1)
    cols = [comp.apply(H.cycles.column(j)) for j in range(H.cycles.cols)]
    phi = PolyMatrix.from_columns(RY, r, cols)
    iso = map_is_isomorphism(H.presentation, excess_module(pair, 1, RY), phi)
    dt = PolyMatrix.from_columns(RY, r, [comp.apply(dr.dt_cycle((b,))) for b in range(r)])
    return AtiyahResult(at, valid, iso, dt.transfer(ses.ring))


# ---------------------------------------------------------------------------
# splitting from a formality isomorphism


@dataclass
class ExtractionResult:
    retraction: PolyMatrix
    retraction_canonical: PolyMatrix
    n_matrix: PolyMatrix
    m_beta: PolyMatrix
    squares_ok: bool
    composite_first_is_alpha: bool
    retraction_ok: bool
    normalization: dict

    @property
    def verdict(self):
        return self.squares_ok and self.composite_first_is_alpha and self.retraction_ok

    def to_json(self):
        return {
            "verdict": self.verdict,
            "squares_ok": self.squares_ok,
            "composite_first_component_is_alpha": self.composite_first_is_alpha,
            "retraction_ok": self.retraction_ok,
            "retraction": [[str(a) for a in r] for r in self.retraction.entries],
            "n": [[str(a) for a in r] for r in self.n_matrix.entries],
        }


def _free_model_of_formal(pair: LinearCyclePair, RY: PolyRing):
    """G = K(x) ⊗ (⊕ Λ^j E[j]) over O_Y with augmentation q: G -> s(E)."""
    xs = [RY.gen(nm) for nm in pair.x_names()]
    Kx = koszul_complex(xs, RY) if xs else ChainComplex(RY, {0: 1})
    r = pair.r
    L = ChainComplex(RY, {-j: comb(r, j) for j in range(r + 1)})
    G = tensor_complexes(Kx, L)
    S = formal_complex(pair, RY)
    blocks, offsets = G.labels["tensor_blocks"]
    comps = {}
    for n in G.degrees():
        M = PolyMatrix(RY, S.rank(n), G.rank(n))
        if (0, n) in offsets:
            off = offsets[(0, n)]
            for i in range(S.rank(n)):
                M.entries[i][off + i] = RY.one()
        comps[n] = M
    return G, ChainMap(G, S, comps)


def _class_engine(C: ChainComplex, basis_cols: list, degree: int):
    M = PolyMatrix.from_columns(C.ring, C.rank(degree), basis_cols)
    bnd = C.d(degree - 1)
    return LiftEngine(M, bnd if bnd.cols else None)


def extract_splitting_from_formality(pair: LinearCyclePair, beta: ChainMap,
                                     ses: ExcessSequence | None = None) -> ExtractionResult:
    """Recover a retraction of alpha from a quasi-isomorphism beta: F -> s(E).

    Works on H^{-1} of F ⊗ F and of a free model G ⊗ G of s(E) ⊗ s(E).
    """
    ses = ses or excess_sequence(pair)
    F, S = beta.source, beta.target
    RY, RT = F.ring, pair.ring_t()
    p, r = pair.p, pair.r
    c = p + r
    one = RY.one()

    # normalize so that H^0 and H^{-1} of beta are the canonical identifications
    u = RT.transfer(beta.f(0).entries[0][0]) if S.rank(0) else RT.zero()
    if not u.is_constant() or u.is_zero():
        raise ExtractionError("H^0(beta) is not invertible", {"H0": str(u)})
    cols = []
    for b in range(r):
        v = [RY.zero()] * F.rank(-1)
        v[p + b] = one
        cols.append([RT.transfer(f) for f in beta.f(-1).apply(v)])
    A = PolyMatrix.from_columns(RT, r, cols)
    Ainv = matrix_inverse(A)
    if Ainv is None:
        raise ExtractionError("H^{-1}(beta) is not invertible", {"A": [[str(a) for a in row] for row in A.entries]})
    norm = {}
    norm[0] = beta.f(0).scale(RT.inv(u.constant_value()))
    for k in range(1, c + 1):
        if k <= r:
            norm[-k] = exterior_power(Ainv, k).transfer(RY) @ beta.f(-k)
        else:
            norm[-k] = beta.f(-k)
    beta_n = ChainMap(F, S, norm)

    # lift beta_n through the augmentation of a free model
    G, q = _free_model_of_formal(pair, RY)
    comps = {}
    for k in range(0, c + 1):
        n = -k
        top = G.rank(n + 1)
        M = G.d(n).vstack(q.f(n))
        rel_s = S.rel(n)
        rel = PolyMatrix(RY, top, rel_s.cols).vstack(rel_s) if rel_s.cols else None
        eng = LiftEngine(M, rel) if M.cols else None
        cols = []
        for j in range(F.rank(n)):
            e = [one if i == j else RY.zero() for i in range(F.rank(n))]
            rhs_top = comps[n + 1].apply(F.d(n).apply(e)) if k > 0 else []
            rhs = list(rhs_top) + beta_n.f(n).apply(e)
            sol = eng.lift(rhs) if eng else None
            if sol is None:
                raise ExtractionError(f"cannot lift beta through the free model in degree {n}")
            cols.append(sol)
        comps[n] = PolyMatrix.from_columns(RY, G.rank(n), cols)
    beta_t = ChainMap(F, G, comps)
    if not beta_t.validate():
        raise ExtractionError("lifted map is not a chain map")

    FF = tensor_complexes(F, F)
    GG = tensor_complexes(G, G)
    BB = tensor_maps(beta_t, beta_t, FF, GG)
    Gb, Go = G.labels["tensor_blocks"]

    def g_index(block, i):
        return Go[block] + i

    # H^{-1} bases: (E first factor, E second factor, N*_{T/Y} differences)
    def ff_basis():
        out = []
        for b in range(r):
            out.append(tensor_element(FF, -1, p + b, 0, 0))
        for b in range(r):
            out.append(tensor_element(FF, 0, 0, -1, p + b))
        for a in range(p):
            v1 = tensor_element(FF, 0, 0, -1, a)
            v2 = tensor_element(FF, -1, a, 0, 0)
            out.append([x - y for x, y in zip(v1, v2)])
        return out

    def gg_basis():
        out = []
        e_idx = [g_index((0, -1), b) for b in range(r)]
        dx_idx = [g_index((-1, 0), a) for a in range(p)]
        for b in range(r):
            out.append(tensor_element(GG, -1, e_idx[b], 0, 0))
        for b in range(r):
            out.append(tensor_element(GG, 0, 0, -1, e_idx[b]))
        for a in range(p):
            v1 = tensor_element(GG, 0, 0, -1, dx_idx[a])
            v2 = tensor_element(GG, -1, dx_idx[a], 0, 0)
            out.append([x - y for x, y in zip(v1, v2)])
        return out

    fb, gb = ff_basis(), gg_basis()
    m = 2 * r + p
    if m == 0:
        empty = PolyMatrix(RT, 0, 0)
        rho = PolyMatrix(RT, 0, c)
        return ExtractionResult(rho, rho, empty, empty, True, True, True, {"H0": str(u)})
    for v in fb:
        if any(f.terms for f in FF.d(-1).apply(v)):
            raise ExtractionError("chosen H^{-1} representative in F ⊗ F is not a cycle")
    g_eng = _class_engine(GG, gb, -1)
    cols = []
    for v in fb:
        img = BB.f(-1).apply(v)
        coords = g_eng.lift(img)
        if coords is None:
            raise ExtractionError("image class is not in the span of the chosen basis")
        cols.append([RT.transfer(f) for f in coords])
    m_beta = PolyMatrix.from_columns(RT, m, cols)
    m_inv = matrix_inverse(m_beta)
    if m_inv is None:
        raise ExtractionError("H^{-1}(beta ⊗ beta) is not invertible",
                              {"matrix": [[str(a) for a in row] for row in m_beta.entries]})
    # HKR identification of H^{-1}(F ⊗ F) with E ⊕ N^ (N^ basis: dx then dt)
    psi = PolyMatrix(RT, r + c, m)
    for b in range(r):
        psi.entries[b][b] = RT.one()
        psi.entries[b][r + b] = RT.one()
        psi.entries[r + p + b][r + b] = RT.one()
    for a in range(p):
        psi.entries[r + a][2 * r + a] = RT.one()
    n_mat = psi @ m_inv

    alpha0 = PolyMatrix(RT, c, r, [[int(i == p + j) for j in range(r)] for i in range(c)])
    ident_r = PolyMatrix.identity(RT, r)
    second = n_mat.submatrix(cols=range(r, 2 * r))
    first = n_mat.submatrix(cols=range(0, r))
    squares = (second == ident_r.vstack(alpha0)) and (first == ident_r.vstack(PolyMatrix(RT, c, r)))
    phi = n_mat.submatrix(rows=range(r, r + c), cols=range(r, m))
    first_is_alpha = phi.submatrix(cols=range(r)) == alpha0
    phi_inv = matrix_inverse(phi)
    if phi_inv is None:
        raise ExtractionError("composite E ⊕ N*_{T/Y} -> N^ is not invertible")
    rho_can = phi_inv.submatrix(rows=range(r))
    rho = ses.from_canon["E"] @ rho_can @ ses.to_canon["Nhat"]
    ok = (rho_can @ alpha0 == ident_r) and (rho @ ses.alpha == ident_r)
    return ExtractionResult(rho, rho_can, n_mat, m_beta, squares, first_is_alpha, ok, {"H0": str(u)})
