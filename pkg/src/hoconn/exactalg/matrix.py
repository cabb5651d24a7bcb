"""Rectangular matrices of polynomials (sparse storage)."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from . import linalg
from .poly import Poly


class PolyMatrix:
    __slots__ = ("rows", "cols", "n", "entries")

    def __init__(self, rows: int, cols: int, n: int, entries: Dict[Tuple[int, int], Poly] | None = None):
        self.rows, self.cols, self.n = rows, cols, n
        clean = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i},{j}) outside {rows}x{cols}")
            if not isinstance(v, Poly):
                v = Poly.const(n, v)
            if v.n != n:
                raise ValueError("entry dimension mismatch")
            if v:
                clean[(i, j)] = v
        self.entries = clean

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], n: int = 0) -> "PolyMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        if any(len(r) != nc for r in rows):
            raise ValueError("ragged rows")
        ent = {}
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                ent[(i, j)] = v if isinstance(v, Poly) else Poly.const(n, v)
        return cls(nr, nc, n, ent)

    @classmethod
    def identity(cls, m: int, n: int = 0) -> "PolyMatrix":
        return cls(m, m, n, {(i, i): Poly.const(n, 1) for i in range(m)})

    def __getitem__(self, ij: Tuple[int, int]) -> Poly:
        return self.entries.get(ij, Poly.zero(self.n))

    def __eq__(self, other) -> bool:
        return (isinstance(other, PolyMatrix) and (self.rows, self.cols) == (other.rows, other.cols)
                and self.entries == other.entries)

    def is_constant(self) -> bool:
        return all(v.is_constant() for v in self.entries.values())

    def to_fractions(self) -> List[List[Fraction]]:
        if not self.is_constant():
            raise linalg.NonConstantEntryError("matrix has non-constant entries")
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v.constant_value()
        return out

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row: Dict[int, List[Tuple[int, Poly]]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        out: Dict[Tuple[int, int], Poly] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), Poly.zero(self.n)) + a * b
        return PolyMatrix(self.rows, other.cols, self.n, out)

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, Poly.zero(self.n)) + v
        return PolyMatrix(self.rows, self.cols, self.n, out)

    def rank(self) -> int:
        cols: List[Dict[int, Fraction]] = [dict() for _ in range(self.cols)]
        if not self.is_constant():
            raise linalg.NonConstantEntryError("rank needs a constant matrix")
        for (i, j), v in self.entries.items():
            cols[j][i] = v.constant_value()
        return linalg.rank_sparse(cols, self.rows)

    def __repr__(self) -> str:
        return f"PolyMatrix({self.rows}x{self.cols}, {len(self.entries)} nonzeros)"


def rational_kernel(m: PolyMatrix) -> List[List[Fraction]]:
    """Exact basis of the null space of a constant matrix."""
    return linalg.kernel_basis(m.to_fractions(), m.cols)
