"""Koszul complexes, derived restriction of a linear cycle, Tor and the map gamma."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Sequence

from .cycles import LinearCyclePair, NotAdapted
from .groebner import LiftEngine, ModulePresentation, groebner_basis
from .homalg import (
    ChainComplex,
    ChainMap,
    HomologyModule,
    IsoResult,
    generic_point,
    homology,
    ideal_relations,
    map_is_isomorphism,
    tensor_complexes,
)
from .matrix import PolyMatrix
from .polyring import Poly, PolyRing


# ---------------------------------------------------------------------------
# exterior algebra bookkeeping


def subsets(n: int, k: int) -> list[tuple]:
    """Degree-k basis of an exterior algebra on n generators, in a fixed order."""
    if k < 0 or k > n:
        return []
    return list(combinations(range(n), k))


def subset_index(n: int, k: int) -> dict:
    return {S: i for i, S in enumerate(subsets(n, k))}


def wedge(S: Sequence[int], T: Sequence[int]):
    """``e_S ∧ e_T = sign * e_U``; returns ``(sign, U)`` with sign 0 when they overlap."""
    if set(S) & set(T):
        return 0, None
    # sign of the merge permutation: count pairs (s in S, t in T) with s > t
    inv = sum(1 for s in S for t in T if s > t)
    return (-1 if inv % 2 else 1), tuple(sorted(tuple(S) + tuple(T)))


@dataclass
class ExteriorBasis:
    rank: int
    labels: list

    def basis(self, k: int):
        return subsets(self.rank, k)

    def index(self, k: int):
        return subset_index(self.rank, k)

    def label(self, S) -> str:
        if not S:
            return "1"
        return "^".join(self.labels[i] for i in S)

    def wedge_matrix(self, M: PolyMatrix, k: int) -> PolyMatrix:
        """Λ^k of a linear map given by M (k x k minors)."""
        return exterior_power(M, k)


def _det(rows):
    """Determinant by cofactor expansion on small polynomial matrices."""
    n = len(rows)
    if n == 0:
        return None
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        a = rows[0][j]
        if not a.terms:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else rows[0][0].ring.zero()


def exterior_power(M: PolyMatrix, k: int) -> PolyMatrix:
    """Matrix of Λ^k M on the subset bases of source and target."""
    ring = M.ring
    rows_b = subsets(M.rows, k)
    cols_b = subsets(M.cols, k)
    if k == 0:
        return PolyMatrix.identity(ring, 1)
    ent = []
    for I in rows_b:
        row = []
        for J in cols_b:
            row.append(_det([[M.entries[i][j] for j in J] for i in I]))
        ent.append(row)
    return PolyMatrix(ring, len(rows_b), len(cols_b), ent)


# ---------------------------------------------------------------------------
# Koszul complexes


def koszul_differential(seq: Sequence[Poly], k: int, ring: PolyRing) -> PolyMatrix:
    """d: degree -k -> degree -k+1, d(e_S) = sum_pos (-1)^pos seq_{S[pos]} e_{S minus S[pos]}."""
    c = len(seq)
    src = subsets(c, k)
    tgt = subset_index(c, k - 1)
    M = PolyMatrix(ring, len(tgt), len(src))
    for col, S in enumerate(src):
        for pos, j in enumerate(S):
            g = seq[j]
            if not g.terms:
                continue
            row = tgt[S[:pos] + S[pos + 1:]]
            M.entries[row][col] = g if pos % 2 == 0 else -g
    return M


def koszul_complex(seq: Sequence[Poly], ring: PolyRing | None = None, relations_ideal=(),
                   base=None) -> ChainComplex:
    """Koszul complex on ``seq``: rank C(c, k) in degree -k.

    ``relations_ideal`` turns every term into (R/I)^{C(c,k)}.
    """
    seq = list(seq)
    if ring is None:
        if not seq:
            raise ValueError("an empty sequence needs an explicit ring")
        ring = seq[0].ring
    seq = [ring(g) for g in seq]
    c = len(seq)
    ranks = {-k: comb(c, k) for k in range(c + 1)}
    diffs = {-k: koszul_differential(seq, k, ring) for k in range(1, c + 1)}
    rels = {}
    if relations_ideal:
        rels = {-k: ideal_relations(ring, relations_ideal, comb(c, k)) for k in range(c + 1)}
    cx = ChainComplex(ring, ranks, diffs, rels, base if base is not None else tuple(relations_ideal))
    cx.labels["koszul"] = seq
    return cx


def shuffle_map(seq1: Sequence[Poly], seq2: Sequence[Poly], ring: PolyRing):
    """Isomorphism K(seq1) ⊗ K(seq2) -> K(seq1 + seq2), e_S ⊗ e_T -> e_{S ∪ (T + c1)}."""
    K1 = koszul_complex(seq1, ring)
    K2 = koszul_complex(seq2, ring)
    T = tensor_complexes(K1, K2)
    K = koszul_complex(list(seq1) + list(seq2), ring)
    c1, c2 = len(seq1), len(seq2)
    blocks, offsets = T.labels["tensor_blocks"]
    comps = {}
    for n in T.degrees():
        M = PolyMatrix(ring, K.rank(n), T.rank(n))
        tgt = subset_index(c1 + c2, -n)
        for (i, j) in blocks.get(n, []):
            off = offsets[(i, j)]
            B2 = subsets(c2, -j)
            for a, S in enumerate(subsets(c1, -i)):
                for b, U in enumerate(B2):
                    M.entries[tgt[S + tuple(c1 + u for u in U)]][off + a * len(B2) + b] = ring.one()
        comps[n] = M
    return ChainMap(T, K, comps)


# ---------------------------------------------------------------------------
# derived restriction


@dataclass
class DerivedRestriction:
    """K(x, t) ⊗ O_Y as a complex of free modules over O_Y = k[x, z]."""

    pair: LinearCyclePair
    complex: ChainComplex
    ring: PolyRing

    @property
    def codim(self):
        return self.pair.codim_x

    def homology(self, k: int) -> HomologyModule:
        """H^{-k}."""
        return homology(self.complex, -k)

    def t_index(self, J: Sequence[int]) -> tuple:
        """Exterior index of dt_J inside the (x, t) basis."""
        p = self.pair.p
        return tuple(p + j for j in J)

    def basis_vector(self, S: Sequence[int]) -> list[Poly]:
        k = len(S)
        idx = subset_index(self.codim, k)
        v = [self.ring.zero()] * len(idx)
        v[idx[tuple(S)]] = self.ring.one()
        return v

    def dt_cycle(self, J: Sequence[int]) -> list[Poly]:
        return self.basis_vector(self.t_index(J))

    def t_class_engine(self, k: int) -> LiftEngine:
        """Coordinates of classes in H^{-k} on the cycles dt_J."""
        cache = self.__dict__.setdefault("_t_engines", {})
        if k not in cache:
            cols = [self.dt_cycle(J) for J in subsets(self.pair.r, k)]
            n = self.complex.rank(-k)
            M = PolyMatrix.from_columns(self.ring, n, cols)
            bnd = self.complex.d(-k - 1)
            cache[k] = LiftEngine(M, bnd if bnd.cols else None) if M.cols else None
        return cache[k]

    def t_coordinates(self, k: int, cycle) -> list[Poly] | None:
        """Coefficients over O_T of the class of ``cycle`` on the dt_J, or None."""
        eng = self.t_class_engine(k)
        RT = self.pair.ring_t()
        if eng is None:
            bnd = self.complex.d(-k - 1)
            if not any(f for f in cycle):
                return []
            if bnd.cols and LiftEngine(bnd).contains(cycle):
                return []
            return None
        c = eng.lift(cycle)
        if c is None:
            return None
        return [RT.transfer(f) for f in c]


def derived_restriction(pair: LinearCyclePair) -> DerivedRestriction:
    """The Koszul resolution of O_X restricted to Y, entries reduced modulo I_Y."""
    bad = pair.check()
    if bad:
        raise NotAdapted("; ".join(bad))
    R = pair.ring()
    seq = [R.gen(nm) for nm in pair.conormal_x_names()]
    K = koszul_complex(seq, R) if seq else ChainComplex(R, {0: 1})
    gb = groebner_basis(pair.adapted_ideal("Y") or [R.zero()])
    RY = pair.ring_y()
    diffs = {}
    for i in K.degrees():
        if K.rank(i) and K.rank(i + 1):
            M = K.d(i).map_entries(lambda f: gb.normal_form(f)[0])
            diffs[i] = M.transfer(RY)
    F = ChainComplex(RY, dict(K.ranks), diffs)
    names = pair.conormal_x_names()
    F.labels["generators"] = ["d" + nm for nm in names]
    return DerivedRestriction(pair, F, RY)


def derived_restriction_oracle(pair: LinearCyclePair, swap: bool = False) -> ChainComplex:
    """Independent model in the original coordinates: K(eq_X) over R / (eq_Y).

    No adapted frame is used; terms carry the relations of I_Y explicitly.
    With ``swap`` the roles of X and Y are exchanged.
    """
    R = pair.original_ring()
    ex, ey = pair.equations("X"), pair.equations("Y")
    if swap:
        ex, ey = ey, ex
    if not ex:
        rel = {0: ideal_relations(R, ey, 1)} if ey else {}
        return ChainComplex(R, {0: 1}, {}, rel, ey)
    return koszul_complex(ex, R, relations_ideal=ey)


def tor_modules(pair: LinearCyclePair, dr: DerivedRestriction | None = None) -> list[HomologyModule]:
    dr = dr or derived_restriction(pair)
    return [dr.homology(k) for k in range(dr.codim + 1)]


def generic_homology_ranks(C: ChainComplex, support=None, seed: int = 0) -> list[int]:
    """Ranks of H^{-k} (k = 0, 1, ..., -lo) at a generic point of V(support).

    The default support is the base of the complex; for modules over O_T pass
    the linear equations of T to get ranks over O_T.
    """
    support = C.base if support is None else support
    pt = generic_point(C.ring, support, random.Random(seed))
    return [homology(C, -k).presentation.generic_rank(pt) for k in range(0, -C.lo + 1)]


def tor_ranks(pair: LinearCyclePair, dr: DerivedRestriction | None = None, seed: int = 0) -> list[int]:
    dr = dr or derived_restriction(pair)
    xs = [dr.ring.gen(nm) for nm in pair.x_names()]
    return generic_homology_ranks(dr.complex, xs, seed)


def oracle_tor_ranks(pair: LinearCyclePair, swap: bool = False, seed: int = 0) -> list[int]:
    """Tor ranks over O_T from the coordinate-free model."""
    C = derived_restriction_oracle(pair, swap)
    T = pair.equations("X") + pair.equations("Y")
    return generic_homology_ranks(C, T, seed)


def excess_module(pair: LinearCyclePair, k: int, ring: PolyRing) -> ModulePresentation:
    """Λ^k E = O_T^{C(r,k)} presented over O_Y = k[x, z]."""
    n = comb(pair.r, k)
    xs = [ring.gen(nm) for nm in pair.x_names()]
    return ModulePresentation(ring, n, ideal_relations(ring, xs, n) if xs else None)


@dataclass
class TorComparison:
    verdict: bool
    per_degree: list = field(default_factory=list)

    def __bool__(self):
        return self.verdict

    def to_json(self):
        return {
            "verdict": self.verdict,
            "per_degree": [{"k": k, **res.to_json()} for k, res in self.per_degree],
        }


def tor_excess_compare(pair: LinearCyclePair, dr: DerivedRestriction | None = None) -> TorComparison:
    """Check that e_J -> class(dt_J) is an isomorphism Λ^k E -> H^{-k} for every k."""
    dr = dr or derived_restriction(pair)
    per = []
    ok = True
    for k in range(dr.codim + 1):
        H = dr.homology(k)
        src = excess_module(pair, k, dr.ring)
        cols = []
        bad = None
        for J in subsets(pair.r, k):
            c = H.coordinates(dr.dt_cycle(J))
            if c is None:
                bad = J
                break
            cols.append(c)
        if bad is not None:
            res = IsoResult(False, False, False, False, {"not_a_cycle": list(bad)})
        else:
            phi = PolyMatrix.from_columns(dr.ring, H.presentation.rank, cols)
            res = map_is_isomorphism(src, H.presentation, phi)
        ok = ok and res.verdict
        per.append((k, res))
    return TorComparison(ok, per)


# ---------------------------------------------------------------------------
# multiplicative structure


def koszul_product(F: ChainComplex, FF: ChainComplex | None = None) -> ChainMap:
    """Wedge multiplication F ⊗ F -> F on a Koszul-type complex (exterior basis)."""
    FF = FF or tensor_complexes(F, F)
    ring = F.ring
    c = -F.lo
    blocks, offsets = FF.labels["tensor_blocks"]
    comps = {}
    for n in FF.degrees():
        if not FF.rank(n) or not F.rank(n):
            continue
        M = PolyMatrix(ring, F.rank(n), FF.rank(n))
        tgt = subset_index(c, -n)
        for (i, j) in blocks.get(n, []):
            off = offsets[(i, j)]
            B2 = subsets(c, -j)
            for a, S in enumerate(subsets(c, -i)):
                for b, T in enumerate(B2):
                    sign, U = wedge(S, T)
                    if sign:
                        M.entries[tgt[U]][off + a * len(B2) + b] = ring.const(sign)
        comps[n] = M
    return ChainMap(FF, F, comps)


def tensor_element(FF: ChainComplex, i: int, a: int, j: int, b: int, coeff=None) -> list[Poly]:
    """The vector of f_a ⊗ g_b (degrees i, j) in the total complex FF."""
    blocks, offsets = FF.labels["tensor_blocks"]
    n = i + j
    ring = FF.ring
    v = [ring.zero()] * FF.rank(n)
    off = offsets[(i, j)]
    width = FF.labels["factor_ranks"][1][j]
    v[off + a * width + b] = coeff if coeff is not None else ring.one()
    return v


@dataclass
class WedgeProduct:
    i: int
    j: int
    table: list
    expected: list
    verdict: bool
    chain_map_ok: bool

    def to_json(self):
        return {
            "i": self.i,
            "j": self.j,
            "table": [[[str(f) for f in cell] for cell in row] for row in self.table],
            "matches_exterior_product": self.verdict,
            "chain_map_ok": self.chain_map_ok,
        }


def tor_wedge_product(pair: LinearCyclePair, i: int, j: int, dr: DerivedRestriction | None = None,
                      mu: ChainMap | None = None) -> WedgeProduct:
    """Product H^{-i} x H^{-j} -> H^{-(i+j)} from the wedge product on K ⊗ K.

    ``table[a][b]`` holds the coordinates (on the dt_K basis of degree i + j)
    of the product of the a-th and b-th basis classes dt_I, dt_J.
    """
    dr = dr or derived_restriction(pair)
    F = dr.complex
    if mu is None:
        FF = tensor_complexes(F, F)
        mu = koszul_product(F, FF)
    FF = mu.source
    chain_ok = mu.validate().ok
    RT = pair.ring_t()
    r = pair.r
    I_basis = subsets(r, i)
    J_basis = subsets(r, j)
    K_index = subset_index(r, i + j)
    idx_i = subset_index(dr.codim, i)
    idx_j = subset_index(dr.codim, j)
    table = []
    expected = []
    ok = True
    for I in I_basis:
        row, erow = [], []
        for J in J_basis:
            v = tensor_element(FF, -i, idx_i[dr.t_index(I)], -j, idx_j[dr.t_index(J)])
            prod = mu.f(-(i + j)).apply(v)
            coords = dr.t_coordinates(i + j, prod)
            exp = [RT.zero()] * len(K_index)
            sign, U = wedge(I, J)
            if sign:
                exp[K_index[U]] = RT.const(sign)
            if coords is None or coords != exp:
                ok = False
            row.append(coords if coords is not None else [])
            erow.append(exp)
        table.append(row)
        expected.append(erow)
    return WedgeProduct(i, j, table, expected, ok and chain_ok, chain_ok)


# ---------------------------------------------------------------------------
# the AK complex presented over the ambient ring, and gamma


def ambient_ak_complex(ring: PolyRing, conormal: Sequence[Poly]) -> ChainComplex:
    """The AK complex of the coordinate quantization, as presented O_Z-modules.

    Term -k has generators a_S' (|S'| = k+1, the Λ^{k+1} N* factor) followed by
    b_S (|S| = k).  A conormal coordinate s_j acts as ds_j ∧ on the b part and
    by zero on the a part; the differential is (a, b) -> (k b, 0).
    """
    c = len(conormal)
    ranks, diffs, rels = {}, {}, {}
    for k in range(c + 1):
        na, nb = comb(c, k + 1), comb(c, k)
        ranks[-k] = na + nb
        a_idx = subset_index(c, k + 1)
        cols = []
        for j in range(c):
            s = conormal[j]
            for ai in range(na):
                col = [ring.zero()] * (na + nb)
                col[ai] = s
                cols.append(col)
            for bi, S in enumerate(subsets(c, k)):
                col = [ring.zero()] * (na + nb)
                col[na + bi] = s
                sign, U = wedge((j,), S)
                if sign:
                    col[a_idx[U]] = ring.const(-sign)
                cols.append(col)
        if cols:
            rels[-k] = PolyMatrix.from_columns(ring, na + nb, cols)
    for k in range(1, c + 1):
        # d_{-k}: b_S (|S| = k) -> k * a_S in degree -k+1
        na_src, nb_src = comb(c, k + 1), comb(c, k)
        na_tgt, nb_tgt = comb(c, k), comb(c, k - 1)
        M = PolyMatrix(ring, na_tgt + nb_tgt, na_src + nb_src)
        for bi in range(nb_src):
            M.entries[bi][na_src + bi] = ring.const(k)
        diffs[-k] = M
    cx = ChainComplex(ring, ranks, diffs, rels)
    cx.labels["split"] = {-k: comb(c, k + 1) for k in range(c + 1)}
    return cx


def gamma_chain_map(pair: LinearCyclePair) -> ChainMap:
    """gamma: K(x, t) -> P_tau over the ambient ring, e_S -> b_S."""
    bad = pair.check()
    if bad:
        raise NotAdapted("; ".join(bad))
    R = pair.ring()
    conormal = [R.gen(nm) for nm in pair.conormal_x_names()]
    K = koszul_complex(conormal, R) if conormal else ChainComplex(R, {0: 1})
    P = ambient_ak_complex(R, conormal)
    c = len(conormal)
    comps = {}
    for k in range(c + 1):
        na, nb = comb(c, k + 1), comb(c, k)
        M = PolyMatrix(R, na + nb, nb)
        for bi in range(nb):
            M.entries[na + bi][bi] = R.one()
        comps[-k] = M
    return ChainMap(K, P, comps)


def gamma_apply(pair: LinearCyclePair, f: Poly, S: Sequence[int]):
    """gamma(f e_S) by the Taylor formula, as the (a, b) parts of P_tau in degree -|S|.

    a = sum_j (d f / d s_j)(tau) ds_j ∧ e_S, b = f(tau) e_S, where tau sets the
    conormal coordinates (x, t) to zero.
    """
    R = f.ring
    names = pair.conormal_x_names()
    c = len(names)
    k = len(S)
    zero_idx = [R.index(nm) for nm in names]
    a_idx = subset_index(c, k + 1)
    a = [R.zero()] * comb(c, k + 1)
    for j, nm in enumerate(names):
        g = f.diff(nm).set_zero(zero_idx)
        if not g.terms:
            continue
        sign, U = wedge((j,), tuple(S))
        if sign:
            a[a_idx[U]] = a[a_idx[U]] + g * sign
    b = [R.zero()] * comb(c, k)
    b[subset_index(c, k)[tuple(S)]] = f.set_zero(zero_idx)
    return a, b
