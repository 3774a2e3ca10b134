"""Pairs of linear subspaces, adapted coordinates and the excess sequence."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from . import linalg
from .groebner import LiftEngine, groebner_basis, matrix_inverse
from .matrix import PolyMatrix
from .polyring import PolyRing


class DegenerateInput(ValueError):
    """Dependent equations; ``certificate`` is a vanishing combination of them."""

    def __init__(self, msg: str, side: str | None = None, certificate=None):
        super().__init__(msg)
        self.side = side
        self.certificate = certificate


class NotAdapted(ValueError):
    pass


def _primitive(row):
    """Scale a rational row to coprime integers with a positive leading entry."""
    row = [Fraction(v) for v in row]
    den = 1
    for v in row:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        return ints
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v)
    return [-v for v in ints] if lead < 0 else ints


def _dependency(rows, p=0):
    """Nonzero ``c`` with ``sum c_i rows_i = 0``, or ``None`` if independent."""
    if not rows:
        return None
    ncols = len(rows[0])
    cols = [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]
    null = linalg.nullspace(cols, len(rows), p)
    return null[0] if null else None


def _extend(basis, candidates, p=0):
    """Greedily add candidate rows that increase the rank of ``basis``."""
    out = []
    cur = list(basis)
    r = linalg.rank(cur, p) if cur else 0
    for c in candidates:
        if linalg.rank(cur + [c], p) > r:
            cur.append(c)
            out.append(c)
            r += 1
    return out


def _names(prefix, n):
    return [f"{prefix}{i + 1}" for i in range(n)]


@dataclass
class LinearCyclePair:
    """X = V(eq_x), Y = V(eq_y) in A^n with an adapted frame.

    Row ``i`` of ``frame`` expresses adapted coordinate ``i`` as a linear form
    in the original coordinates ``v1..vn``; the rows come in the blocks
    (x, y, t, z) of sizes (p, q, r, s), so that X = V(x, t) and Y = V(y, t).
    """

    n: int
    eq_x: list
    eq_y: list
    frame: list
    blocks: tuple
    field: int = 0
    order: str = "degrevlex"

    @property
    def p(self):
        return self.blocks[0]

    @property
    def q(self):
        return self.blocks[1]

    @property
    def r(self):
        return self.blocks[2]

    @property
    def s(self):
        return self.blocks[3]

    @property
    def codim_x(self):
        return self.p + self.r

    @property
    def codim_y(self):
        return self.q + self.r

    @property
    def excess_rank(self):
        return self.r

    def is_transverse(self):
        return self.r == 0

    # -- names and rings -------------------------------------------------------
    def x_names(self):
        return _names("x", self.p)

    def y_names(self):
        return _names("y", self.q)

    def t_names(self):
        return _names("t", self.r)

    def z_names(self):
        return _names("z", self.s)

    def conormal_x_names(self):
        """Coordinates cutting out X, in the order (x, t) used for every exterior basis."""
        return self.x_names() + self.t_names()

    def ring(self) -> PolyRing:
        """Ambient ring in adapted coordinates, variables ordered (x, y, t, z)."""
        return PolyRing(self.x_names() + self.y_names() + self.t_names() + self.z_names(), self.field, self.order)

    def ring_y(self) -> PolyRing:
        """Coordinate ring of Y: normal forms modulo (y, t) are polynomials in (x, z)."""
        return PolyRing(self.x_names() + self.z_names(), self.field, self.order)

    def ring_x(self) -> PolyRing:
        return PolyRing(self.y_names() + self.z_names(), self.field, self.order)

    def ring_t(self) -> PolyRing:
        return PolyRing(self.z_names(), self.field, self.order)

    def original_ring(self) -> PolyRing:
        return PolyRing(_names("v", self.n), self.field, self.order)

    def equations(self, side: str):
        R = self.original_ring()
        rows = self.eq_x if side == "X" else self.eq_y
        return [R.linear_form(row) for row in rows]

    def adapted_ideal(self, which: str):
        R = self.ring()
        names = {
            "X": self.x_names() + self.t_names(),
            "Y": self.y_names() + self.t_names(),
            "T": self.x_names() + self.y_names() + self.t_names(),
        }[which]
        return [R.gen(nm) for nm in names]

    # -- checks --------------------------------------------------------------
    def check(self) -> list:
        """List of violated invariants (empty when the pair is adapted)."""
        bad = []
        n, (p, q, r, s) = self.n, self.blocks
        if p + q + r + s != n:
            bad.append("block sizes do not sum to the ambient dimension")
        F = self.field
        if linalg.rank(self.frame, F) != n:
            bad.append("frame is not invertible")
        xr = self.frame[:p]
        yr = self.frame[p:p + q]
        tr = self.frame[p + q:p + q + r]

        def same_span(a, b):
            ra = linalg.rank(a, F) if a else 0
            rb = linalg.rank(b, F) if b else 0
            rab = linalg.rank(a + b, F) if a + b else 0
            return ra == rb == rab

        if not same_span(xr + tr, [list(v) for v in self.eq_x]):
            bad.append("X is not V(x, t) in the frame")
        if not same_span(yr + tr, [list(v) for v in self.eq_y]):
            bad.append("Y is not V(y, t) in the frame")
        if not bad and not self.t_presentations_agree():
            bad.append("X ∩ Y differs from V(x, y, t)")
        return bad

    def t_presentations_agree(self) -> bool:
        R = self.original_ring()
        both = self.equations("X") + self.equations("Y")
        p, q, r = self.p, self.q, self.r
        adapted = [R.linear_form(row) for row in self.frame[:p + q + r]]
        g1 = groebner_basis(both or [R.zero()])
        g2 = groebner_basis(adapted or [R.zero()])
        return g1.polys == g2.polys

    def frame_matrix(self) -> PolyMatrix:
        R = self.original_ring()
        return PolyMatrix(R, self.n, self.n, [[R.const(v) for v in row] for row in self.frame])

    def to_json(self) -> dict:
        return {
            "ambient": self.n,
            "X": [[str(v) for v in row] for row in self.eq_x],
            "Y": [[str(v) for v in row] for row in self.eq_y],
            "frame": [[str(v) for v in row] for row in self.frame],
            "blocks": {"p": self.p, "q": self.q, "r": self.r, "s": self.s},
            "variables": list(self.ring().names),
        }


def adapt_coordinates(eq_x, eq_y, n: int, field=0, order: str = "degrevlex") -> LinearCyclePair:
    """Adapted (x, y, t, z) frame for X = V(eq_x), Y = V(eq_y) in A^n."""
    from .polyring import parse_field

    p_char = parse_field(field)
    eq_x = [[int(v) for v in row] for row in eq_x]
    eq_y = [[int(v) for v in row] for row in eq_y]
    for side, rows in (("X", eq_x), ("Y", eq_y)):
        for row in rows:
            if len(row) != n:
                raise DegenerateInput(f"equation of {side} has {len(row)} coefficients, expected {n}", side)
        for pc in (0, p_char) if p_char else (0,):
            dep = _dependency(rows, pc)
            if dep is not None:
                raise DegenerateInput(
                    f"equations of {side} are linearly dependent"
                    + (f" modulo {pc}" if pc else ""),
                    side,
                    [str(v) for v in dep],
                )
    a, b = len(eq_x), len(eq_y)
    # W = span(eq_x) ∩ span(eq_y): solve lam * eq_x = mu * eq_y
    cols = [[eq_x[i][j] for i in range(a)] + [-eq_y[i][j] for i in range(b)] for j in range(n)]
    null = linalg.nullspace(cols, a + b, 0) if a and b else []
    w_rows = []
    for v in null:
        w_rows.append([sum(v[i] * eq_x[i][j] for i in range(a)) for j in range(n)])
    if w_rows:
        red, piv = linalg.rref(w_rows, 0)
        w_rows = [_primitive(red[i]) for i in range(len(piv))]
    t_rows = w_rows
    x_rows = [_primitive(r) for r in _extend(t_rows, eq_x)]
    y_rows = [_primitive(r) for r in _extend(t_rows + x_rows, eq_y)]
    unit = [[int(i == j) for j in range(n)] for i in range(n)]
    z_rows = _extend(x_rows + y_rows + t_rows, unit)
    frame = x_rows + y_rows + t_rows + z_rows
    blocks = (len(x_rows), len(y_rows), len(t_rows), len(z_rows))
    if p_char and linalg.rank(frame, p_char) != n:
        raise DegenerateInput(f"the adapted frame degenerates modulo {p_char}")
    pair = LinearCyclePair(n, eq_x, eq_y, frame, blocks, p_char, order)
    bad = pair.check()
    if bad:
        raise DegenerateInput("; ".join(bad))
    return pair


# ---------------------------------------------------------------------------
# the excess sequence


@dataclass
class ExcessSequence:
    """0 -> E --alpha--> N^ --pi--> N*_{T/Y} -> 0 as matrices over O_T.

    Canonical bases: E has e_1..e_r, N^ has (dx_1..dx_p, dt_1..dt_r), N*_{T/Y}
    has dx_1..dx_p.  A sheared sequence uses other bases; ``to_canon[name]``
    turns coordinates in the working basis into canonical coordinates and
    ``from_canon[name]`` is its inverse (name in "E", "Nhat", "N").
    """

    pair: LinearCyclePair
    ring: PolyRing
    alpha: PolyMatrix
    pi: PolyMatrix
    to_canon: dict = field(default_factory=dict)
    from_canon: dict = field(default_factory=dict)

    @property
    def ranks(self):
        return (self.alpha.cols, self.alpha.rows, self.pi.rows)

    def check(self) -> list:
        bad = []
        R = self.ring
        if not (self.pi @ self.alpha).is_zero():
            bad.append("pi * alpha != 0")
        e, nh, n = self.ranks
        if e + n != nh:
            bad.append("rank E + rank N*_{T/Y} != rank N^")
        if self.alpha.cols and self.alpha.rows:
            if syzygies_nonzero(self.alpha):
                bad.append("alpha is not injective")
        if n:
            eng = LiftEngine(self.pi)
            for j in range(n):
                if not eng.contains([R.one() if i == j else R.zero() for i in range(n)]):
                    bad.append("pi is not surjective")
                    break
        if nh and e and n:
            from .groebner import syzygies

            ker = syzygies(self.pi)
            eng = LiftEngine(self.alpha)
            if not all(eng.contains(ker.column(j)) for j in range(ker.cols)):
                bad.append("not exact at N^")
        return bad

    def to_json(self):
        return {
            "ranks": {"E": self.ranks[0], "Nhat": self.ranks[1], "NstarTY": self.ranks[2]},
            "alpha": [[str(a) for a in r] for r in self.alpha.entries],
            "pi": [[str(a) for a in r] for r in self.pi.entries],
        }


def syzygies_nonzero(M: PolyMatrix) -> bool:
    from .groebner import syzygies

    S = syzygies(M)
    return any(any(f for f in S.column(j)) for j in range(S.cols))


def _canonical_maps(ring, p, r):
    one, z = ring.one(), ring.zero()
    alpha = PolyMatrix(ring, p + r, r, [[one if i == p + j else z for j in range(r)] for i in range(p + r)])
    pi = PolyMatrix(ring, p, p + r, [[one if j == i else z for j in range(p + r)] for i in range(p)])
    return alpha, pi


def _random_unipotent(ring: PolyRing, n: int, rng: random.Random, steps: int = 2):
    """Product of elementary matrices with small polynomial entries, and its inverse."""
    M = PolyMatrix.identity(ring, n)
    Minv = PolyMatrix.identity(ring, n)
    if n < 2:
        return M, Minv
    gens = ring.gens()
    for _ in range(steps * n):
        i, j = rng.sample(range(n), 2)
        c = ring.const(rng.randint(-2, 2))
        for g in gens:
            c = c + g * rng.randint(-1, 1)
        if c.is_zero():
            continue
        E = PolyMatrix.identity(ring, n)
        E.entries[i][j] = c
        Einv = PolyMatrix.identity(ring, n)
        Einv.entries[i][j] = -c
        M = E @ M
        Minv = Minv @ Einv
    return M, Minv


def excess_sequence(pair: LinearCyclePair, shear_seed: int | None = None) -> ExcessSequence:
    """The excess sequence of an adapted pair, optionally in randomly sheared bases."""
    R = pair.ring_t()
    p, r = pair.p, pair.r
    alpha0, pi0 = _canonical_maps(R, p, r)
    to_canon = {}
    from_canon = {}
    if shear_seed is None:
        for name, k in (("E", r), ("Nhat", p + r), ("N", p)):
            to_canon[name] = PolyMatrix.identity(R, k)
            from_canon[name] = PolyMatrix.identity(R, k)
        alpha, pi = alpha0, pi0
    else:
        rng = random.Random(shear_seed)
        for name, k in (("E", r), ("Nhat", p + r), ("N", p)):
            to_canon[name], from_canon[name] = _random_unipotent(R, k, rng)
        alpha = from_canon["Nhat"] @ alpha0 @ to_canon["E"]
        pi = from_canon["N"] @ pi0 @ to_canon["Nhat"]
    ses = ExcessSequence(pair, R, alpha, pi, to_canon, from_canon)
    bad = ses.check()
    if bad:
        raise AssertionError("excess sequence invariants fail: " + "; ".join(bad))
    return ses


@dataclass
class SplittingWitness:
    section: PolyMatrix
    retraction: PolyMatrix

    def check(self, ses: ExcessSequence) -> bool:
        R = ses.ring
        e, nh, n = ses.ranks
        ok_s = (ses.pi @ self.section) == PolyMatrix.identity(R, n)
        ok_r = (self.retraction @ ses.alpha) == PolyMatrix.identity(R, e)
        return ok_s and ok_r

    def to_json(self):
        return {
            "section": [[str(a) for a in r] for r in self.section.entries],
            "retraction": [[str(a) for a in r] for r in self.retraction.entries],
        }


@dataclass
class NonSplit:
    column: int
    certificate: list

    def to_json(self):
        return {"column": self.column, "normal_form": [str(f) for f in self.certificate]}


def retraction_from_section(ses: ExcessSequence, s: PolyMatrix) -> PolyMatrix:
    """The retraction rho with alpha * rho = id - s * pi."""
    R = ses.ring
    e, nh, n = ses.ranks
    if e == 0:
        return PolyMatrix(R, 0, nh)
    target = PolyMatrix.identity(R, nh) - s @ ses.pi
    eng = LiftEngine(ses.alpha)
    cols = []
    for j in range(nh):
        c = eng.lift(target.column(j))
        if c is None:
            raise AssertionError("id - s*pi does not factor through alpha")
        cols.append(c)
    return PolyMatrix.from_columns(R, e, cols)


def section_from_retraction(ses: ExcessSequence, rho: PolyMatrix) -> PolyMatrix:
    """The section s with s * pi = id - alpha * rho."""
    R = ses.ring
    e, nh, n = ses.ranks
    if n == 0:
        return PolyMatrix(R, nh, 0)
    target = (PolyMatrix.identity(R, nh) - ses.alpha @ rho).transpose()
    eng = LiftEngine(ses.pi.transpose())
    rows = []
    for j in range(nh):
        c = eng.lift(target.column(j))
        if c is None:
            raise AssertionError("id - alpha*rho does not factor through pi")
        rows.append(c)
    return PolyMatrix.from_rows(R, rows)


def find_module_splitting(ses: ExcessSequence):
    """Solve pi * s = id column by column; return a witness or :class:`NonSplit`."""
    R = ses.ring
    e, nh, n = ses.ranks
    if n == 0:
        s = PolyMatrix(R, nh, 0)
    else:
        eng = LiftEngine(ses.pi)
        cols = []
        for j in range(n):
            c, cert = eng.lift_or_certificate([R.one() if i == j else R.zero() for i in range(n)])
            if c is None:
                return NonSplit(j, cert)
            cols.append(c)
        s = PolyMatrix.from_columns(R, nh, cols)
    rho = retraction_from_section(ses, s)
    w = SplittingWitness(s, rho)
    if not w.check(ses):
        raise AssertionError("computed splitting fails pi*s = id or rho*alpha = id")
    return w


# ---------------------------------------------------------------------------
# reduction to the diagonal and random pairs


@dataclass
class DiagonalReduction:
    pair: LinearCyclePair
    m: int
    codim: int
    diagonal_ok: bool
    conormal_ranks_ok: bool


def reduction_to_diagonal(eq_inner, m: int, field=0, order: str = "degrevlex") -> DiagonalReduction:
    """Replace X ⊂ Y = A^m by the pair (diagonal of Y, X × X) in A^{2m}.

    Coordinates of A^{2m} are (w, w').  The diagonal plays the role of the
    cycle carrying the Koszul resolution; T is then the diagonal copy of X.
    """
    eq_inner = [[int(v) for v in row] for row in eq_inner]
    for row in eq_inner:
        if len(row) != m:
            raise DegenerateInput(f"equation has {len(row)} coefficients, expected {m}")
    c = len(eq_inner)
    diag = [[int(j == i) - int(j == m + i) for j in range(2 * m)] for i in range(m)]
    square = [row + [0] * m for row in eq_inner] + [[0] * m + row for row in eq_inner]
    pair = adapt_coordinates(diag, square, 2 * m, field, order)
    R = pair.original_ring()
    delta_x = [R.linear_form(row) for row in diag] + [R.linear_form(row + [0] * m) for row in eq_inner]
    t_eqs = pair.equations("X") + pair.equations("Y")
    g1 = groebner_basis(t_eqs or [R.zero()]).polys
    g2 = groebner_basis(delta_x or [R.zero()]).polys
    p, q, r, s = pair.blocks
    return DiagonalReduction(
        pair, m, c,
        diagonal_ok=(g1 == g2),
        conormal_ranks_ok=(r == c and p == m - c),
    )


def random_linear_pair(seed, n: int, max_codim: int | None = None, field=0, order="degrevlex",
                       max_n: int = 8) -> LinearCyclePair:
    """Deterministic pseudo-random pair of linear subspaces of A^n."""
    if n < 1 or n > max_n:
        raise ValueError(f"ambient dimension must be in [1, {max_n}]")
    max_codim = n if max_codim is None else max(0, min(max_codim, n))
    rng = random.Random(seed)
    shapes = [
        (p, q, r)
        for r in range(max_codim + 1)
        for p in range(max_codim - r + 1)
        for q in range(max_codim - r + 1)
        if p + q + r <= n
    ]
    while True:
        p, q, r = rng.choice(shapes)
        forms = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(p + q + r)]
        if forms and linalg.rank(forms, 0) < p + q + r:
            continue
        shared, own_x, own_y = forms[:r], forms[r:r + p], forms[r + p:]
        ex = _mix(shared + own_x, rng)
        ey = _mix(shared + own_y, rng)
        try:
            pair = adapt_coordinates(ex, ey, n, field, order)
        except DegenerateInput:
            continue
        if pair.blocks[:3] == (p, q, r):
            return pair


def _mix(rows, rng):
    """Random unimodular recombination of integer rows."""
    rows = [list(r) for r in rows]
    k = len(rows)
    for _ in range(2 * k):
        if k < 2:
            break
        i, j = rng.sample(range(k), 2)
        c = rng.choice([-1, 1])
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
    return rows
