"""Gröbner bases of submodules of free modules R^m.

Internally a module vector is a dict ``{(position, exponents): coefficient}``.
Pairs are selected by the sugar strategy and pruned with the
Gebauer-Möller criteria; the product criterion is only used for ideals,
where it is valid.

Syzygies and lifts come from one Gröbner computation on the augmented
module generated by ``(M e_j, e_j)`` (plus ``(rel_k, 0)`` for relations of
a quotient target) under a position-over-term order in which the original
coordinates dominate.  Elements with vanishing top part then form a basis
of the syzygy module, and reducing ``(b, 0)`` yields a lift of ``b``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

from .matrix import PolyMatrix
from .polyring import Poly, PolyRing, order_key


class DegreeLimitExceeded(RuntimeError):
    """A Gröbner computation needed a pair of sugar degree above the cap."""


def degree_limit() -> int | None:
    raw = os.environ.get("DI_MAX_DEGREE")
    return int(raw) if raw else None


@dataclass(frozen=True)
class ModuleOrder:
    """Monomial order on R^m.

    ``position`` is ``"top"`` (term over position), ``"pot"`` (position over
    term; lower index is larger) or ``"schreyer"`` (compare ``m * lead[i]``
    first, using ``schreyer_leads``).
    """

    mono: str = "degrevlex"
    position: str = "top"
    schreyer_leads: tuple = field(default=())

    def key_function(self):
        mk = order_key(self.mono)
        if self.position == "top":
            return lambda t: (mk(t[1]), -t[0])
        if self.position == "pot":
            return lambda t: (-t[0], mk(t[1]))
        if self.position == "schreyer":
            leads = self.schreyer_leads

            def key(t):
                shifted = tuple(a + b for a, b in zip(t[1], leads[t[0]]))
                return (mk(shifted), -t[0])

            return key
        raise ValueError(f"unknown position rule {self.position!r}")


# ---------------------------------------------------------------------------
# vector conversion


def to_vec(components: Sequence[Poly], offset: int = 0) -> dict:
    vec = {}
    for i, f in enumerate(components):
        for e, c in f.terms.items():
            vec[(i + offset, e)] = c
    return vec


def from_vec(ring: PolyRing, vec: dict, rank: int, offset: int = 0) -> list[Poly]:
    parts = [dict() for _ in range(rank)]
    for (pos, e), c in vec.items():
        j = pos - offset
        if 0 <= j < rank:
            parts[j][e] = c
    return [Poly(ring, d) for d in parts]


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


def _sub_exps(a, b):
    return tuple(x - y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# core engine


class _Engine:
    """Buchberger's algorithm over dict vectors."""

    def __init__(self, ring: PolyRing, rank: int, order: ModuleOrder):
        self.ring = ring
        self.p = ring.p
        self.rank = rank
        self.order = order
        self.key = order.key_function()
        self.basis: list[dict] = []
        self.leads: list[tuple] = []
        self.sugar: list[int] = []
        self.by_pos: dict[int, list[int]] = {}
        self.limit = degree_limit()

    # -- reduction -------------------------------------------------------
    def lead(self, vec):
        return max(vec, key=self.key)

    def find_reducer(self, term, skip=None):
        pos, e = term
        for idx in self.by_pos.get(pos, ()):
            if idx != skip and self.basis[idx] is not None and _divides(self.leads[idx][1], e):
                return idx
        return None

    def _subtract(self, f, c, shift, g):
        p = self.p
        for (gp, ge), gc in g.items():
            t = (gp, tuple(a + b for a, b in zip(ge, shift)))
            v = f.get(t, 0) - c * gc
            if p:
                v %= p
            if v:
                f[t] = v
            else:
                f.pop(t, None)

    def reduce(self, vec: dict, full: bool = True, skip=None) -> dict:
        f = dict(vec)
        rem = {}
        key = self.key
        while f:
            t = max(f, key=key)
            idx = self.find_reducer(t, skip)
            if idx is None:
                if not full:
                    f.update(rem)
                    return f
                rem[t] = f.pop(t)
                continue
            g = self.basis[idx]
            c = f[t]
            shift = _sub_exps(t[1], self.leads[idx][1])
            self._subtract(f, c, shift, g)
        return rem

    def monic(self, vec):
        lt = self.lead(vec)
        c = vec[lt]
        if c == 1:
            return vec
        inv = self.ring.inv(c)
        p = self.p
        return {t: (v * inv % p if p else v * inv) for t, v in vec.items()}

    # -- Buchberger ------------------------------------------------------
    def _vec_degree(self, vec):
        return max(sum(e) for (_, e) in vec)

    def _add(self, vec, sugar, pairs):
        vec = self.monic(vec)
        idx = len(self.basis)
        self.basis.append(vec)
        lt = self.lead(vec)
        self.leads.append(lt)
        self.sugar.append(sugar)
        self._update(idx, pairs)
        self.by_pos.setdefault(lt[0], []).append(idx)

    def _update(self, h, pairs):
        hp, he = self.leads[h]
        ideal = self.rank == 1
        cands = []
        for i in self.by_pos.get(hp, ()):
            if self.basis[i] is None:
                continue
            cands.append((i, _lcm(self.leads[i][1], he)))
        # M criterion: drop (i,h) if some (j,h) has lcm properly dividing it
        kept = []
        for i, l in cands:
            if any(l2 != l and _divides(l2, l) for _, l2 in cands):
                continue
            kept.append((i, l))
        # F criterion: one pair per lcm; for ideals drop the class if coprime
        by_lcm: dict = {}
        for i, l in kept:
            by_lcm.setdefault(l, []).append(i)
        new = []
        for l, idxs in by_lcm.items():
            if ideal and any(
                all(a == 0 or b == 0 for a, b in zip(self.leads[i][1], he)) for i in idxs
            ):
                continue
            new.append((idxs[0], l))
        # B criterion on old pairs
        survivors = []
        for pr in pairs:
            i, j, l = pr[2], pr[3], pr[4]
            if (
                self.leads[i][0] == hp
                and _divides(he, l)
                and _lcm(self.leads[i][1], he) != l
                and _lcm(self.leads[j][1], he) != l
            ):
                continue
            survivors.append(pr)
        pairs[:] = survivors
        for i, l in new:
            s = max(
                self.sugar[i] + sum(l) - sum(self.leads[i][1]),
                self.sugar[h] + sum(l) - sum(he),
            )
            pairs.append((s, self.key((hp, l)), i, h, l))

    def spoly(self, i, j, l):
        pos = self.leads[i][0]
        f = {}
        si = _sub_exps(l, self.leads[i][1])
        for (gp, ge), gc in self.basis[i].items():
            f[(gp, tuple(a + b for a, b in zip(ge, si)))] = gc
        self._subtract(f, 1, _sub_exps(l, self.leads[j][1]), self.basis[j])
        return f

    def run(self, gens: list[dict]):
        pairs: list = []
        for g in gens:
            if not g:
                continue
            r = self.reduce(g, full=False)
            if r:
                self._add(r, self._vec_degree(g), pairs)
        while pairs:
            best = min(range(len(pairs)), key=lambda k: pairs[k][:4])
            s, _, i, j, l = pairs.pop(best)
            if self.limit is not None and s > self.limit:
                raise DegreeLimitExceeded(
                    f"pair of sugar degree {s} exceeds DI_MAX_DEGREE={self.limit}"
                )
            h = self.spoly(i, j, l)
            if not h:
                continue
            h = self.reduce(h, full=False)
            if h:
                self._add(h, s, pairs)
        self._finalize()

    def _finalize(self):
        n = len(self.basis)
        alive = []
        for i in range(n):
            li = self.leads[i]
            redundant = False
            for j in range(n):
                if j == i:
                    continue
                lj = self.leads[j]
                if lj[0] == li[0] and _divides(lj[1], li[1]):
                    if lj[1] != li[1] or j < i:
                        redundant = True
                        break
            if not redundant:
                alive.append(i)
        self.basis = [self.basis[i] if i in alive else None for i in range(n)]
        for i in alive:
            self.basis[i] = self.monic(self.reduce(self.basis[i], full=True, skip=i))
        order = sorted(alive, key=lambda i: self.key(self.leads[i]), reverse=True)
        self.basis = [self.basis[i] for i in order]
        self.leads = [self.leads[i] for i in order]
        self.sugar = [self.sugar[i] for i in order]
        self.by_pos = {}
        for idx, lt in enumerate(self.leads):
            self.by_pos.setdefault(lt[0], []).append(idx)


# ---------------------------------------------------------------------------
# public API


def _gens_to_vectors(gens) -> tuple[PolyRing, int, list[list[Poly]]]:
    if isinstance(gens, PolyMatrix):
        return gens.ring, gens.rows, gens.columns()
    gens = [list(g) if not isinstance(g, Poly) else [g] for g in gens]
    if not gens:
        raise ValueError("need at least one generator (or pass a PolyMatrix)")
    ring = gens[0][0].ring
    rank = len(gens[0])
    for g in gens:
        if len(g) != rank:
            raise ValueError("generators live in free modules of different ranks")
        for f in g:
            ring.check_same(f.ring)
    return ring, rank, gens


class GroebnerBasis:
    """Reduced Gröbner basis of a submodule of R^rank."""

    def __init__(self, engine: _Engine):
        self._engine = engine
        self.ring = engine.ring
        self.rank = engine.rank
        self.order = engine.order
        self.reduced = True

    @property
    def vectors(self) -> list[list[Poly]]:
        return [from_vec(self.ring, v, self.rank) for v in self._engine.basis]

    @property
    def polys(self) -> list[Poly]:
        if self.rank != 1:
            raise ValueError("not an ideal")
        return [v[0] for v in self.vectors]

    @property
    def leading_terms(self):
        return list(self._engine.leads)

    def __len__(self):
        return len(self._engine.basis)

    def _vec(self, f):
        if isinstance(f, Poly):
            f = [f]
        if len(f) != self.rank:
            raise ValueError("element does not live in the ambient module of the basis")
        for g in f:
            self.ring.check_same(g.ring)
        return to_vec(f)

    def normal_form(self, f) -> list[Poly]:
        return from_vec(self.ring, self._engine.reduce(self._vec(f)), self.rank)

    def contains(self, f) -> bool:
        return not self._engine.reduce(self._vec(f), full=False)

    def signature(self):
        """Hashable canonical description; equal submodules give equal signatures."""
        return tuple(tuple(sorted(v.items(), key=lambda t: str(t))) for v in self._engine.basis)

    def check_buchberger(self) -> bool:
        """Every S-vector of a pair with equal lead positions reduces to zero."""
        eng = self._engine
        n = len(eng.basis)
        for i in range(n):
            for j in range(i + 1, n):
                if eng.leads[i][0] != eng.leads[j][0]:
                    continue
                l = _lcm(eng.leads[i][1], eng.leads[j][1])
                if eng.reduce(eng.spoly(i, j, l), full=False):
                    return False
        return True

    def is_interreduced(self) -> bool:
        eng = self._engine
        for i, v in enumerate(eng.basis):
            for t in v:
                for j, lt in enumerate(eng.leads):
                    if j != i and lt[0] == t[0] and _divides(lt[1], t[1]):
                        return False
        return True


def groebner_basis(gens, order: ModuleOrder | str | None = None) -> GroebnerBasis:
    """Reduced Gröbner basis of the submodule generated by ``gens``.

    ``gens`` is a list of polynomials (an ideal), a list of equal-length
    vectors, or a :class:`PolyMatrix` whose columns are the generators.
    """
    ring, rank, vecs = _gens_to_vectors(gens)
    if order is None:
        order = ModuleOrder(ring.order)
    elif isinstance(order, str):
        order = ModuleOrder(order)
    eng = _Engine(ring, rank, order)
    eng.run([to_vec(v) for v in vecs])
    return GroebnerBasis(eng)


def normal_form(f, gb: GroebnerBasis) -> list[Poly]:
    return gb.normal_form(f)


class NotInImage(Exception):
    """Raised by :func:`lift` when ``b`` is not in the column span."""

    def __init__(self, certificate: list[Poly]):
        super().__init__("vector is not in the image")
        self.certificate = certificate


class LiftEngine:
    """One Gröbner computation serving lifts and syzygies of ``M``.

    With ``rel`` given, everything is computed modulo the column span of
    ``rel`` in the target, i.e. for the induced map R^cols -> R^rows / rel.
    """

    def __init__(self, M: PolyMatrix, rel: PolyMatrix | None = None, mono: str | None = None):
        self.M = M
        self.ring = M.ring
        self.m = M.rows
        self.n = M.cols
        self.rel = rel
        if rel is not None and rel.rows != M.rows:
            raise ValueError("relation matrix must have as many rows as M")
        gens = []
        for j in range(M.cols):
            v = to_vec(M.column(j))
            v[(self.m + j, self.ring._zero_exps)] = self.ring.coerce(1)
            gens.append(v)
        if rel is not None:
            for j in range(rel.cols):
                v = to_vec(rel.column(j))
                if v:
                    gens.append(v)
        self.engine = _Engine(
            self.ring, self.m + self.n, ModuleOrder(mono or self.ring.order, "pot")
        )
        self.engine.run(gens)
        self._syz = None

    def lift(self, b: Sequence[Poly]) -> list[Poly] | None:
        """``c`` with ``M c = b`` (mod rel), or ``None``."""
        c, _ = self.lift_or_certificate(b)
        return c

    def lift_or_certificate(self, b):
        if len(b) != self.m:
            raise ValueError("right-hand side has the wrong length")
        r = self.engine.reduce(to_vec(b), full=True)
        top = {t: c for t, c in r.items() if t[0] < self.m}
        if top:
            return None, from_vec(self.ring, top, self.m)
        tail = from_vec(self.ring, r, self.n, offset=self.m)
        return [-f for f in tail], None

    def contains(self, b) -> bool:
        r = self.engine.reduce(to_vec(b), full=False)
        return not any(t[0] < self.m for t in r)

    def syzygies(self) -> PolyMatrix:
        if self._syz is None:
            cols = []
            for v, lt in zip(self.engine.basis, self.engine.leads):
                if lt[0] >= self.m:
                    cols.append(from_vec(self.ring, v, self.n, offset=self.m))
            self._syz = PolyMatrix.from_columns(self.ring, self.n, cols)
        return self._syz


def syzygies(M: PolyMatrix, rel: PolyMatrix | None = None) -> PolyMatrix:
    """Columns generating ``{c : M c = 0}`` (or ``M c in span(rel)``)."""
    if M.cols == 0:
        return PolyMatrix(M.ring, 0, 0)
    if M.rows == 0:
        return PolyMatrix.identity(M.ring, M.cols)
    return LiftEngine(M, rel).syzygies()


def lift(b: Sequence[Poly], M: PolyMatrix, rel: PolyMatrix | None = None) -> list[Poly]:
    """Return ``c`` with ``M c = b``; raise :class:`NotInImage` otherwise."""
    if len(b) != M.rows:
        raise ValueError("shape mismatch between b and M")
    if M.cols == 0 and (rel is None or rel.cols == 0):
        if any(f for f in b):
            raise NotInImage(list(b))
        return []
    if M.cols == 0:
        if LiftEngine(rel).contains(b):
            return []
        raise NotInImage(LiftEngine(rel).lift_or_certificate(b)[1])
    c, cert = LiftEngine(M, rel).lift_or_certificate(b)
    if c is None:
        raise NotInImage(cert)
    return c


def matrix_inverse(M: PolyMatrix) -> PolyMatrix | None:
    """Two-sided inverse of a square polynomial matrix, or ``None`` if it has none."""
    if M.rows != M.cols:
        raise ValueError("only square matrices can be inverted")
    n = M.rows
    if n == 0:
        return PolyMatrix(M.ring, 0, 0)
    eng = LiftEngine(M)
    cols = []
    one, z = M.ring.one(), M.ring.zero()
    for j in range(n):
        c = eng.lift([one if i == j else z for i in range(n)])
        if c is None:
            return None
        cols.append(c)
    inv = PolyMatrix.from_columns(M.ring, n, cols)
    if inv @ M != PolyMatrix.identity(M.ring, n):
        return None
    return inv


# ---------------------------------------------------------------------------
# presentations


class ModulePresentation:
    """The module R^rank / (column span of ``relations``)."""

    def __init__(self, ring: PolyRing, rank: int, relations: PolyMatrix | None = None, labels=None):
        if relations is None:
            relations = PolyMatrix(ring, rank, 0)
        if relations.rows != rank:
            raise ValueError("relation matrix must have one row per generator")
        self.ring = ring
        self.rank = rank
        self.relations = relations
        self.labels = list(labels) if labels is not None else None
        self._engine = None

    def membership_engine(self) -> LiftEngine:
        if self._engine is None:
            self._engine = LiftEngine(self.relations)
        return self._engine

    def is_zero(self):
        return module_is_zero(self)

    def element_is_zero(self, vec: Sequence[Poly]) -> bool:
        if self.relations.cols == 0:
            return not any(f for f in vec)
        return self.membership_engine().contains(vec)

    def generic_rank(self, point) -> int:
        """Number of generators minus the rank of the relations at ``point``."""
        from .linalg import rank

        if self.relations.cols == 0:
            return self.rank
        return self.rank - rank(self.relations.evaluate(point), self.ring.p)

    def minimized(self) -> tuple["ModulePresentation", PolyMatrix]:
        """Drop generators killed by unit relations.

        Returns the smaller presentation and the matrix expressing the old
        generators in terms of the new ones.
        """
        rel = [list(c) for c in self.relations.columns()]
        ring = self.ring
        keep = list(range(self.rank))
        # express[i] = old generator i as a vector over the current generators
        express = {i: {i: ring.one()} for i in keep}
        while True:
            hit = None
            for ci, col in enumerate(rel):
                for i in keep:
                    f = col[i]
                    if f.terms and f.is_constant():
                        hit = (ci, i)
                        break
                if hit:
                    break
            if hit is None:
                break
            ci, i = hit
            col = rel[ci]
            inv = ring.inv(col[i].constant_value())
            # e_i = -inv * sum_{k != i} col[k] e_k
            sub = {k: -col[k] * inv for k in keep if k != i and col[k].terms}
            for j in express:
                v = express[j]
                if i in v:
                    a = v.pop(i)
                    for k, g in sub.items():
                        v[k] = v.get(k, ring.zero()) + a * g
                        if not v[k].terms:
                            del v[k]
            new_rel = []
            for cj, c in enumerate(rel):
                if cj == ci:
                    continue
                a = c[i]
                c = list(c)
                if a.terms:
                    for k, g in sub.items():
                        c[k] = c[k] + a * g
                c[i] = ring.zero()
                if any(c[k].terms for k in keep if k != i):
                    new_rel.append(c)
            rel = new_rel
            keep.remove(i)
        pos = {k: n for n, k in enumerate(keep)}
        rel_cols = [[c[k] for k in keep] for c in rel]
        pres = ModulePresentation(
            ring, len(keep), PolyMatrix.from_columns(ring, len(keep), rel_cols),
            [self.labels[k] for k in keep] if self.labels else None,
        )
        cols = []
        for j in range(self.rank):
            v = [ring.zero()] * len(keep)
            for k, g in express[j].items():
                v[pos[k]] = g
            cols.append(v)
        return pres, PolyMatrix.from_columns(ring, len(keep), cols)

    def to_json(self) -> dict:
        return {"rank": self.rank, "relations": self.relations.to_json(), "labels": self.labels}

    def __repr__(self):
        return f"ModulePresentation(rank={self.rank}, relations={self.relations.cols})"


@dataclass
class ZeroCertificate:
    is_zero: bool
    lifts: list | None = None
    witness_index: int | None = None
    witness_normal_form: list | None = None


def module_is_zero(P: ModulePresentation) -> ZeroCertificate:
    """Decide ``P == 0``; certificate is the lifts of all ``e_i`` or one failure."""
    ring = P.ring
    if P.rank == 0:
        return ZeroCertificate(True, [])
    if P.relations.cols == 0:
        e = [ring.one()] + [ring.zero()] * (P.rank - 1)
        return ZeroCertificate(False, witness_index=0, witness_normal_form=e)
    eng = P.membership_engine()
    lifts = []
    for i in range(P.rank):
        e = [ring.one() if k == i else ring.zero() for k in range(P.rank)]
        c, cert = eng.lift_or_certificate(e)
        if c is None:
            return ZeroCertificate(False, witness_index=i, witness_normal_form=cert)
        lifts.append(c)
    return ZeroCertificate(True, lifts)


class SubquotientError(ValueError):
    def __init__(self, column: int, certificate):
        super().__init__(f"image generator {column} is not in the span of the kernel generators")
        self.column = column
        self.certificate = certificate


def present_subquotient(ker_gens: PolyMatrix, im_gens: PolyMatrix) -> ModulePresentation:
    """Presentation of span(ker_gens) / span(im_gens) on the columns of ``ker_gens``."""
    ring = ker_gens.ring
    a = ker_gens.cols
    if a == 0:
        for j in range(im_gens.cols):
            if any(f for f in im_gens.column(j)):
                raise SubquotientError(j, im_gens.column(j))
        return ModulePresentation(ring, 0)
    eng = LiftEngine(ker_gens)
    rels = []
    for j in range(im_gens.cols):
        col = im_gens.column(j)
        if not any(f for f in col):
            continue
        c, cert = eng.lift_or_certificate(col)
        if c is None:
            raise SubquotientError(j, cert)
        if any(f for f in c):
            rels.append(c)
    syz = eng.syzygies()
    rels.extend(syz.columns())
    return ModulePresentation(ring, a, PolyMatrix.from_columns(ring, a, rels))
