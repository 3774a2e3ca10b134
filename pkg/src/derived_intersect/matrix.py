"""Matrices of polynomials acting on column vectors (R^cols -> R^rows)."""

from __future__ import annotations

import json
from typing import Sequence

from .polyring import Poly, PolyRing


class PolyMatrix:
    """Immutable rectangular matrix over a single :class:`PolyRing`."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: PolyRing, rows: int, cols: int, entries=None):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        if entries is None:
            z = ring.zero()
            entries = [[z] * cols for _ in range(rows)]
        else:
            entries = [[ring(e) for e in row] for row in entries]
            if len(entries) != rows or any(len(r) != cols for r in entries):
                raise ValueError("entries do not match the declared shape")
        self.entries = entries

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, ring, rows, cols):
        return cls(ring, rows, cols)

    @classmethod
    def identity(cls, ring, n):
        one, z = ring.one(), ring.zero()
        return cls(ring, n, n, [[one if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, ring, rows, columns: Sequence[Sequence[Poly]]):
        columns = list(columns)
        for c in columns:
            if len(c) != rows:
                raise ValueError("column has wrong length")
        entries = [[columns[j][i] for j in range(len(columns))] for i in range(rows)]
        return cls(ring, rows, len(columns), entries)

    @classmethod
    def from_rows(cls, ring, rows_data):
        rows_data = [list(r) for r in rows_data]
        cols = len(rows_data[0]) if rows_data else 0
        return cls(ring, len(rows_data), cols, rows_data)

    @classmethod
    def scalar_diag(cls, ring, values):
        n = len(values)
        z = ring.zero()
        return cls(ring, n, n, [[ring(values[i]) if i == j else z for j in range(n)] for i in range(n)])

    # -- access -------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j) -> list[Poly]:
        return [self.entries[i][j] for i in range(self.rows)]

    def columns(self) -> list[list[Poly]]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def __eq__(self, other):
        return (
            isinstance(other, PolyMatrix)
            and self.ring == other.ring
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.shape, tuple(tuple(r) for r in self.entries)))

    # -- algebra --------------------------------------------------------------
    def _check(self, other):
        self.ring.check_same(other.ring)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return PolyMatrix(
            self.ring,
            self.rows,
            self.cols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
        )

    def __neg__(self):
        return PolyMatrix(self.ring, self.rows, self.cols, [[-a for a in r] for r in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PolyMatrix(self.ring, self.rows, self.cols, [[a * c for a in r] for r in self.entries])

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        ring = self.ring
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = ring.zero()
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.terms:
                        b = other.entries[k][j]
                        if b.terms:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(ring, self.rows, other.cols, out)

    def apply(self, vec: Sequence[Poly]) -> list[Poly]:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        ring = self.ring
        out = []
        for i in range(self.rows):
            acc = ring.zero()
            for a, v in zip(self.entries[i], vec):
                if a.terms and v.terms:
                    acc = acc + a * v
            out.append(acc)
        return out

    def transpose(self):
        return PolyMatrix(
            self.ring, self.cols, self.rows,
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def hstack(self, *others):
        mats = (self,) + others
        for m in others:
            self._check(m)
            if m.rows != self.rows:
                raise ValueError("hstack needs equal row counts")
        entries = [sum((m.entries[i] for m in mats), []) for i in range(self.rows)]
        return PolyMatrix(self.ring, self.rows, sum(m.cols for m in mats), entries)

    def vstack(self, *others):
        mats = (self,) + others
        for m in others:
            self._check(m)
            if m.cols != self.cols:
                raise ValueError("vstack needs equal column counts")
        entries = [list(r) for m in mats for r in m.entries]
        return PolyMatrix(self.ring, sum(m.rows for m in mats), self.cols, entries)

    def submatrix(self, rows=None, cols=None):
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        return PolyMatrix(
            self.ring, len(rows), len(cols), [[self.entries[i][j] for j in cols] for i in rows]
        )

    def block_diag(self, other):
        self._check(other)
        z = self.ring.zero()
        top = [list(r) + [z] * other.cols for r in self.entries]
        bot = [[z] * self.cols + list(r) for r in other.entries]
        return PolyMatrix(self.ring, self.rows + other.rows, self.cols + other.cols, top + bot)

    def kron(self, other):
        """Kronecker product; basis of the result is (i, k) with i major."""
        self._check(other)
        out = []
        for i in range(self.rows):
            for k in range(other.rows):
                row = []
                for j in range(self.cols):
                    a = self.entries[i][j]
                    for l in range(other.cols):
                        row.append(a * other.entries[k][l] if a.terms else a)
                out.append(row)
        return PolyMatrix(self.ring, self.rows * other.rows, self.cols * other.cols, out)

    def map_entries(self, fn):
        return PolyMatrix(self.ring, self.rows, self.cols, [[fn(a) for a in r] for r in self.entries])

    def transfer(self, ring):
        """Entrywise :meth:`PolyRing.transfer` into ``ring``."""
        return PolyMatrix(ring, self.rows, self.cols, [[ring.transfer(a) for a in r] for r in self.entries])

    def evaluate(self, point):
        return [[a.evaluate(point) for a in r] for r in self.entries]

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "ring": ring_to_json(self.ring),
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[str(a) for a in r] for r in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict, ring: PolyRing | None = None):
        if ring is None:
            ring = ring_from_json(data["ring"])
        entries = [[ring.parse(s) for s in r] for r in data["entries"]]
        return cls(ring, data["rows"], data["cols"], entries)

    def __str__(self):
        if not self.rows or not self.cols:
            return f"<{self.rows}x{self.cols} matrix>"
        strs = [[str(a) for a in r] for r in self.entries]
        w = max(len(s) for r in strs for s in r)
        return "\n".join("[" + "  ".join(s.rjust(w) for s in r) + "]" for r in strs)

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, {json.dumps(self.to_json()['entries'])})"


def ring_to_json(ring: PolyRing) -> dict:
    return {"variables": list(ring.names), "field": ring.field_name, "order": ring.order}


def ring_from_json(data: dict) -> PolyRing:
    return PolyRing(data["variables"], data.get("field", "qq"), data.get("order", "degrevlex"))
