"""Bounded cochain complexes of finitely presented modules.

Grading is cohomological: ``d(i)`` maps ``C^i -> C^{i+1}`` and derived
objects live in degrees ``<= 0``.  Each term is ``R^n / span(rel(i))``; a free
term simply has no relations.  Complexes over a quotient ring R/I are the
special case ``rel(i) = I * identity``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from . import linalg
from .groebner import LiftEngine, ModulePresentation, module_is_zero, present_subquotient, syzygies
from .matrix import PolyMatrix, ring_from_json, ring_to_json
from .polyring import Poly, PolyRing


def ideal_relations(ring: PolyRing, ideal: Sequence[Poly], n: int) -> PolyMatrix:
    """Columns ``g * e_i`` for g in ``ideal``; presents (R/I)^n."""
    z = ring.zero()
    cols = []
    for i in range(n):
        for g in ideal:
            col = [z] * n
            col[i] = g
            cols.append(col)
    return PolyMatrix.from_columns(ring, n, cols)


def generic_point(ring: PolyRing, linear_ideal: Sequence[Poly], rng: random.Random):
    """Random point on the linear subspace cut out by homogeneous linear forms."""
    rows = []
    for g in linear_ideal:
        if g.total_degree() > 1 or g.constant_value():
            raise ValueError("generic_point needs homogeneous linear equations")
        row = [0] * ring.nvars
        for e, c in g.terms.items():
            row[e.index(1)] = c
        rows.append(row)
    basis = linalg.nullspace(rows, ring.nvars, ring.p)
    hi = ring.p - 1 if ring.p else 10 ** 6
    coeffs = [rng.randint(1, hi) for _ in basis]
    return [ring.coerce(sum(c * v[i] for c, v in zip(coeffs, basis))) for i in range(ring.nvars)]


@dataclass
class ValidationReport:
    ok: bool
    degree: int | None = None
    kind: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


class ChainComplex:
    """Bounded complex; ``ranks`` maps degree -> number of generators."""

    def __init__(
        self,
        ring: PolyRing,
        ranks: dict,
        differentials: dict | None = None,
        relations: dict | None = None,
        base: Sequence[Poly] = (),
        labels: dict | None = None,
    ):
        self.ring = ring
        self.ranks = {int(k): int(v) for k, v in ranks.items()}
        if not self.ranks:
            self.ranks = {0: 0}
        self.lo = min(self.ranks)
        self.hi = max(self.ranks)
        for i in range(self.lo, self.hi + 1):
            self.ranks.setdefault(i, 0)
        self._d = dict(differentials or {})
        self._rel = {k: v for k, v in (relations or {}).items() if v is not None and v.cols}
        self.base = tuple(base)
        self.labels = labels or {}
        self._homology_cache: dict = {}

    # -- access ---------------------------------------------------------------
    def rank(self, i: int) -> int:
        return self.ranks.get(i, 0)

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def d(self, i: int) -> PolyMatrix:
        m = self._d.get(i)
        if m is None:
            return PolyMatrix(self.ring, self.rank(i + 1), self.rank(i))
        return m

    def rel(self, i: int) -> PolyMatrix:
        m = self._rel.get(i)
        if m is None:
            return PolyMatrix(self.ring, self.rank(i), 0)
        return m

    def is_free(self) -> bool:
        return not self._rel

    def term(self, i: int) -> ModulePresentation:
        return ModulePresentation(self.ring, self.rank(i), self.rel(i))

    def __repr__(self):
        ranks = [self.rank(i) for i in self.degrees()]
        return f"ChainComplex(degrees=[{self.lo}, {self.hi}], ranks={ranks})"

    # -- checks ------------------------------------------------------------------
    def validate(self) -> ValidationReport:
        """Shapes, well-definedness on relations and d∘d = 0 (modulo relations)."""
        for i, m in self._d.items():
            if m.shape != (self.rank(i + 1), self.rank(i)):
                return ValidationReport(
                    False, i, "shape", f"d({i}) has shape {m.shape}, expected "
                    f"{(self.rank(i + 1), self.rank(i))}"
                )
        for i, m in self._rel.items():
            if m.rows != self.rank(i):
                return ValidationReport(False, i, "shape", f"relations in degree {i} have {m.rows} rows")
        for i in range(self.lo - 1, self.hi + 1):
            ri = self.rel(i)
            if ri.cols and self.rank(i + 1):
                img = self.d(i) @ ri
                if not _columns_in_span(img, self.rel(i + 1)):
                    return ValidationReport(False, i, "well-defined", f"d({i}) does not preserve relations")
            if self.rank(i) and self.rank(i + 2):
                dd = self.d(i + 1) @ self.d(i)
                if not _columns_in_span(dd, self.rel(i + 2)):
                    return ValidationReport(False, i, "d2", f"d({i + 1}) * d({i}) != 0")
        return ValidationReport(True)

    def euler_characteristic_check(self, rng: random.Random | None = None):
        """Compare alternating sums of term ranks and homology ranks at a generic point.

        The point is taken on the zero set of ``base`` (all terms are modules
        over R / base), so the ranks are ranks over its fraction field.
        """
        rng = rng or random.Random(0)
        pt = generic_point(self.ring, self.base, rng)
        chi_terms = 0
        chi_h = 0
        for i in self.degrees():
            sign = -1 if i % 2 else 1
            chi_terms += sign * self.term(i).generic_rank(pt)
            chi_h += sign * homology(self, i).presentation.generic_rank(pt)
        return chi_terms == chi_h, chi_terms, chi_h

    # -- serialization -----------------------------------------------------------
    def to_json(self) -> dict:
        data = {
            "ring": ring_to_json(self.ring),
            "degrees": [self.lo, self.hi],
            "ranks": [self.rank(i) for i in self.degrees()],
            "differentials": {
                f"d({i})": [[str(a) for a in r] for r in self.d(i).entries]
                for i in range(self.lo, self.hi)
            },
        }
        if self._rel:
            data["relations"] = {
                str(i): [[str(a) for a in r] for r in m.entries] for i, m in sorted(self._rel.items())
            }
        if self.base:
            data["base"] = [str(g) for g in self.base]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ChainComplex":
        ring = ring_from_json(data["ring"])
        lo, hi = data["degrees"]
        ranks = {lo + k: r for k, r in enumerate(data["ranks"])}

        def mat(rows, nr, nc):
            return PolyMatrix(ring, nr, nc, [[ring.parse(s) for s in r] for r in rows])

        diffs = {}
        for i in range(lo, hi):
            rows = data["differentials"].get(f"d({i})")
            if rows is not None:
                diffs[i] = mat(rows, ranks[i + 1], ranks[i])
        rels = {}
        for k, rows in data.get("relations", {}).items():
            i = int(k)
            nc = len(rows[0]) if rows else 0
            rels[i] = mat(rows, ranks[i], nc)
        base = [ring.parse(s) for s in data.get("base", [])]
        return cls(ring, ranks, diffs, rels, base)


def _columns_in_span(M: PolyMatrix, rel: PolyMatrix) -> bool:
    if M.is_zero():
        return True
    if rel.cols == 0:
        return False
    eng = LiftEngine(rel)
    return all(eng.contains(M.column(j)) for j in range(M.cols))


def zero_complex(ring: PolyRing) -> ChainComplex:
    return ChainComplex(ring, {0: 0})


def module_complex(P: ModulePresentation, degree: int = 0) -> ChainComplex:
    """A presented module placed in a single degree."""
    return ChainComplex(P.ring, {degree: P.rank}, {}, {degree: P.relations})


# ---------------------------------------------------------------------------
# homology


@dataclass
class HomologyModule:
    degree: int
    presentation: ModulePresentation
    cycles: PolyMatrix
    complex: ChainComplex = field(repr=False)
    _engine: LiftEngine | None = field(default=None, repr=False)

    def is_zero(self) -> bool:
        return module_is_zero(self.presentation).is_zero

    def coordinates(self, cycle: Sequence[Poly]):
        """Coefficients of the class of ``cycle`` on the generating cycles, or None."""
        if self.cycles.cols == 0:
            z = self.complex.term(self.degree)
            bound = self.complex.d(self.degree - 1).hstack(self.complex.rel(self.degree))
            if not any(f for f in cycle) or (bound.cols and LiftEngine(bound).contains(cycle)):
                return []
            return None
        if self._engine is None:
            C = self.complex
            rel = C.d(self.degree - 1).hstack(C.rel(self.degree))
            self._engine = LiftEngine(self.cycles, rel if rel.cols else None)
        return self._engine.lift(cycle)


def homology(C: ChainComplex, i: int) -> HomologyModule:
    """Presentation of ker d(i) / im d(i-1) on generating cycles."""
    if i in C._homology_cache:
        return C._homology_cache[i]
    ring = C.ring
    n = C.rank(i)
    if n == 0:
        h = HomologyModule(i, ModulePresentation(ring, 0), PolyMatrix(ring, 0, 0), C)
        C._homology_cache[i] = h
        return h
    if C.rank(i + 1) == 0:
        ker = PolyMatrix.identity(ring, n)
    else:
        rel_next = C.rel(i + 1)
        ker = syzygies(C.d(i), rel_next if rel_next.cols else None)
        nonzero = [j for j in range(ker.cols) if any(f for f in ker.column(j))]
        ker = ker.submatrix(cols=nonzero)
    im = C.d(i - 1).hstack(C.rel(i))
    pres = present_subquotient(ker, im)
    h = HomologyModule(i, pres, ker, C)
    C._homology_cache[i] = h
    return h


# ---------------------------------------------------------------------------
# maps


class ChainMap:
    """Degree-preserving map of complexes; ``components[i]`` is C^i -> D^i."""

    def __init__(self, source: ChainComplex, target: ChainComplex, components: dict):
        source.ring.check_same(target.ring)
        self.source = source
        self.target = target
        self.ring = source.ring
        self._f = dict(components)

    def f(self, i: int) -> PolyMatrix:
        m = self._f.get(i)
        if m is None:
            return PolyMatrix(self.ring, self.target.rank(i), self.source.rank(i))
        return m

    def degrees(self):
        return range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 1)

    def validate(self) -> ValidationReport:
        S, T = self.source, self.target
        for i, m in self._f.items():
            if m.shape != (T.rank(i), S.rank(i)):
                return ValidationReport(False, i, "shape", f"component {i} has shape {m.shape}")
        for i in self.degrees():
            rs = S.rel(i)
            if rs.cols and T.rank(i):
                if not _columns_in_span(self.f(i) @ rs, T.rel(i)):
                    return ValidationReport(False, i, "well-defined", "relations not preserved")
            if S.rank(i) and T.rank(i + 1):
                diff = T.d(i) @ self.f(i) - self.f(i + 1) @ S.d(i)
                if not _columns_in_span(diff, T.rel(i + 1)):
                    return ValidationReport(False, i, "commute", f"d f != f d in degree {i}")
        return ValidationReport(True)

    def compose(self, other: "ChainMap") -> "ChainMap":
        """``self ∘ other``."""
        comps = {}
        for i in other.degrees():
            if other.source.rank(i) and self.target.rank(i):
                comps[i] = self.f(i) @ other.f(i)
        return ChainMap(other.source, self.target, comps)

    def to_json(self) -> dict:
        return {
            f"f({i})": [[str(a) for a in r] for r in self.f(i).entries]
            for i in self.degrees()
            if self.source.rank(i) and self.target.rank(i)
        }


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, {i: PolyMatrix.identity(C.ring, C.rank(i)) for i in C.degrees()})


def zero_map(C: ChainComplex, D: ChainComplex) -> ChainMap:
    return ChainMap(C, D, {})


def induced_map(f: ChainMap, i: int) -> PolyMatrix:
    """Matrix of H^i(f) from the generators of H^i(source) to those of H^i(target)."""
    hs = homology(f.source, i)
    ht = homology(f.target, i)
    ring = f.ring
    cols = []
    for j in range(hs.cycles.cols):
        img = f.f(i).apply(hs.cycles.column(j))
        c = ht.coordinates(img)
        if c is None:
            raise ValueError(f"image of a cycle in degree {i} is not a cycle")
        cols.append(c)
    return PolyMatrix.from_columns(ring, ht.cycles.cols, cols)


def mapping_cone(f: ChainMap) -> ChainComplex:
    """cone(f)^i = S^{i+1} ⊕ T^i with differential [[-d_S, 0], [f, d_T]]."""
    S, T = f.source, f.target
    ring = f.ring
    lo = min(S.lo - 1, T.lo)
    hi = max(S.hi - 1, T.hi)
    ranks = {i: S.rank(i + 1) + T.rank(i) for i in range(lo, hi + 1)}
    diffs = {}
    rels = {}
    for i in range(lo, hi + 1):
        top = (-S.d(i + 1)).hstack(PolyMatrix(ring, S.rank(i + 2), T.rank(i)))
        bot = f.f(i + 1).hstack(T.d(i))
        diffs[i] = top.vstack(bot)
        rs, rt = S.rel(i + 1), T.rel(i)
        if rs.cols or rt.cols:
            rels[i] = rs.block_diag(rt)
    return ChainComplex(ring, ranks, diffs, rels, _meet_base(S.base, T.base))


def _meet_base(a, b):
    return tuple(g for g in a if g in b)


def _join_base(a, b):
    out = list(a)
    for g in b:
        if g not in out:
            out.append(g)
    return tuple(out)


@dataclass
class QuasiIsoResult:
    verdict: bool
    degrees: list

    def __bool__(self):
        return self.verdict

    def to_json(self):
        return {
            "verdict": self.verdict,
            "per_degree": [
                {"degree": d, "cone_homology_zero": z, **({"witness": w} if w else {})}
                for d, z, w in self.degrees
            ],
        }


def is_quasi_iso(f: ChainMap) -> QuasiIsoResult:
    """Quasi-isomorphism test: every homology module of cone(f) vanishes."""
    cone = mapping_cone(f)
    per = []
    ok = True
    for i in cone.degrees():
        h = homology(cone, i)
        cert = module_is_zero(h.presentation)
        wit = None
        if not cert.is_zero:
            ok = False
            col = h.cycles.column(cert.witness_index)
            wit = [str(g) for g in col]
        per.append((i, cert.is_zero, wit))
    return QuasiIsoResult(ok, per)


def _tensor_basis(C: ChainComplex, D: ChainComplex, n: int):
    """Ordered blocks (i, j) with i + j = n; i descending."""
    blocks = []
    for i in range(C.hi, C.lo - 1, -1):
        j = n - i
        if D.lo <= j <= D.hi and C.rank(i) and D.rank(j):
            blocks.append((i, j))
    return blocks


def tensor_complexes(C: ChainComplex, D: ChainComplex) -> ChainComplex:
    """Total complex of C ⊗ D with d(a⊗b) = da⊗b + (-1)^i a⊗db."""
    C.ring.check_same(D.ring)
    ring = C.ring
    lo, hi = C.lo + D.lo, C.hi + D.hi
    blocks = {n: _tensor_basis(C, D, n) for n in range(lo, hi + 1)}
    offsets = {}
    ranks = {}
    for n, bl in blocks.items():
        off = 0
        for (i, j) in bl:
            offsets[(i, j)] = off
            off += C.rank(i) * D.rank(j)
        ranks[n] = off
    diffs = {}
    rels = {}
    for n in range(lo, hi + 1):
        M = PolyMatrix(ring, ranks.get(n + 1, 0), ranks[n])
        ent = M.entries
        for (i, j) in blocks[n]:
            src = offsets[(i, j)]
            ci, dj = C.rank(i), D.rank(j)
            if (i + 1, j) in offsets:
                blk = C.d(i).kron(PolyMatrix.identity(ring, dj))
                _paste(ent, blk, offsets[(i + 1, j)], src)
            if (i, j + 1) in offsets:
                blk = PolyMatrix.identity(ring, ci).kron(D.d(j))
                if i % 2:
                    blk = -blk
                _paste(ent, blk, offsets[(i, j + 1)], src)
        diffs[n] = M
        relcols = []
        for (i, j) in blocks[n]:
            off = offsets[(i, j)]
            parts = []
            if C.rel(i).cols:
                parts.append(C.rel(i).kron(PolyMatrix.identity(ring, D.rank(j))))
            if D.rel(j).cols:
                parts.append(PolyMatrix.identity(ring, C.rank(i)).kron(D.rel(j)))
            for part in parts:
                for col in part.columns():
                    full = [ring.zero()] * ranks[n]
                    full[off:off + len(col)] = col
                    relcols.append(full)
        if relcols:
            rels[n] = PolyMatrix.from_columns(ring, ranks[n], relcols)
    out = ChainComplex(ring, ranks, diffs, rels, _join_base(C.base, D.base))
    out.labels["tensor_blocks"] = (blocks, offsets)
    out.labels["factor_ranks"] = (dict(C.ranks), dict(D.ranks))
    return out


def _paste(ent, blk: PolyMatrix, r0: int, c0: int):
    for a in range(blk.rows):
        row = ent[r0 + a]
        for b in range(blk.cols):
            v = blk.entries[a][b]
            if v.terms:
                row[c0 + b] = v


def tensor_maps(f: ChainMap, g: ChainMap, source=None, target=None) -> ChainMap:
    """f ⊗ g between the tensor complexes (no sign: both maps have degree 0)."""
    source = source or tensor_complexes(f.source, g.source)
    target = target or tensor_complexes(f.target, g.target)
    ring = f.ring
    sb, so = source.labels["tensor_blocks"]
    tb, to = target.labels["tensor_blocks"]
    comps = {}
    for n in source.degrees():
        M = PolyMatrix(ring, target.rank(n), source.rank(n))
        for (i, j) in sb.get(n, []):
            if (i, j) in to:
                blk = f.f(i).kron(g.f(j))
                _paste(M.entries, blk, to[(i, j)], so[(i, j)])
        comps[n] = M
    return ChainMap(source, target, comps)


def shift(C: ChainComplex, k: int) -> ChainComplex:
    """C[k]^i = C^{i+k}, differential multiplied by (-1)^k."""
    ranks = {i - k: r for i, r in C.ranks.items()}
    sign = -1 if k % 2 else 1
    diffs = {i - k: (m if sign == 1 else -m) for i, m in C._d.items()}
    rels = {i - k: m for i, m in C._rel.items()}
    return ChainComplex(C.ring, ranks, diffs, rels, C.base)


def complexes_equal(C: ChainComplex, D: ChainComplex) -> bool:
    degs = set(i for i in C.degrees() if C.rank(i)) | set(i for i in D.degrees() if D.rank(i))
    for i in degs:
        if C.rank(i) != D.rank(i) or C.d(i) != D.d(i) or C.rel(i) != D.rel(i):
            return False
    return True


@dataclass
class IsoResult:
    verdict: bool
    well_defined: bool
    injective: bool
    surjective: bool
    witness: dict | None = None

    def __bool__(self):
        return self.verdict

    def to_json(self):
        out = {
            "verdict": self.verdict,
            "well_defined": self.well_defined,
            "injective": self.injective,
            "surjective": self.surjective,
        }
        if self.witness:
            out["witness"] = self.witness
        return out


def map_is_isomorphism(P: ModulePresentation, Q: ModulePresentation, phi: PolyMatrix) -> IsoResult:
    """Decide whether the map P -> Q sending generator j to column j of ``phi`` is bijective."""
    if phi.shape != (Q.rank, P.rank):
        raise ValueError(f"map has shape {phi.shape}, expected {(Q.rank, P.rank)}")
    ring = P.ring
    relq = Q.relations
    wd = _columns_in_span(phi @ P.relations, relq) if P.relations.cols else True
    if not wd:
        return IsoResult(False, False, False, False, {"reason": "relations of the source not preserved"})
    # kernel: c with phi c in span(relQ) must lie in span(relP)
    injective = True
    witness = None
    if P.rank:
        if Q.rank:
            syz = syzygies(phi.hstack(relq), None)
            ker_cols = [syz.column(j)[:P.rank] for j in range(syz.cols)]
        else:
            ker_cols = PolyMatrix.identity(ring, P.rank).columns()
        eng = P.membership_engine() if P.relations.cols else None
        for col in ker_cols:
            if not any(f for f in col):
                continue
            if eng is None or not eng.contains(col):
                injective = False
                witness = {"kernel_element": [str(f) for f in col]}
                break
    coker = ModulePresentation(ring, Q.rank, relq.hstack(phi))
    cz = module_is_zero(coker)
    surjective = cz.is_zero
    if not surjective and witness is None:
        witness = {
            "cokernel_generator": cz.witness_index,
            "normal_form": [str(f) for f in cz.witness_normal_form],
        }
    return IsoResult(injective and surjective, True, injective, surjective, witness)
