"""Exact linear algebra over Q: rank, kernel basis, solve, inverse.

Rank of large slice matrices goes through an integer kernel. The compiled
``_rank_ext`` is used when it imports; otherwise ``_rank_py``. Set the
environment variable ``HOCONN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import lcm
from typing import Dict, List, Sequence

from . import _rank_py

try:  # pragma: no cover - depends on build
    if os.environ.get("HOCONN_PURE_PYTHON"):
        raise ImportError
    from . import _rank_ext
except ImportError:  # pragma: no cover
    _rank_ext = None

BACKEND = "compiled" if _rank_ext is not None else "python"

SparseRow = Dict[int, Fraction]


class NonConstantEntryError(ValueError):
    pass


def _integer_rows(rows: Sequence[Sequence], ncols: int) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for v in r:
            if v:
                den = lcm(den, Fraction(v).denominator)
        out.append([int(Fraction(v) * den) for v in r])
    return out


def rank_int(rows: Sequence[Sequence[int]], ncols: int, backend: str | None = None) -> int:
    """Rank of an integer matrix, dispatching to the selected kernel."""
    backend = backend or BACKEND
    if backend == "compiled":
        if _rank_ext is None:
            raise RuntimeError("compiled rank kernel is not built")
        try:
            return _rank_ext.rank_int(rows, ncols)
        except OverflowError:
            pass
    return _rank_py.rank_int(rows, ncols)


def rank(rows: Sequence[Sequence], ncols: int | None = None, backend: str | None = None) -> int:
    """Rank over Q of a dense matrix with int/Fraction entries."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0]) if ncols is None else ncols
    if ncols == 0:
        return 0
    # eliminate along the shorter side
    if len(rows) > ncols:
        rows = [list(c) for c in zip(*rows)]
        ncols = len(rows[0])
    return rank_int(_integer_rows(rows, ncols), ncols, backend)


def rank_sparse(columns: Sequence[SparseRow], nrows: int, backend: str | None = None) -> int:
    """Rank of a matrix given as sparse columns ``{row: value}``."""
    cols = [c for c in columns if c]
    if not cols:
        return 0
    used = sorted({i for c in cols for i in c})
    pos = {i: k for k, i in enumerate(used)}
    dense = []
    for c in cols:
        r = [0] * len(used)
        for i, v in c.items():
            r[pos[i]] = v
        dense.append(r)
    return rank(dense, len(used), backend)


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return [], []
    m, n = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        nz = [j for j in range(n) if a[r][j]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                row = a[i]
                for j in nz:
                    row[j] -= f * a[r][j]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def kernel_basis(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right null space of a constant matrix."""
    rows = [list(r) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows)
    free = [j for j in range(ncols) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -red[r][f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """One solution of ``A x = b`` over Q, or ``None`` when inconsistent."""
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    if not a:
        return []
    n = len(a[0]) - 1
    red, pivots = rref(a)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, p in enumerate(pivots):
        x[p] = red[r][n]
    return x


def inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise ValueError("matrix is not square")
    aug = [list(r) + [int(i == j) for j in range(m)] for i, r in enumerate(rows)]
    red, pivots = rref(aug)
    if pivots[:m] != list(range(m)) or len(pivots) < m:
        raise ZeroDivisionError("matrix is singular")
    return [row[m:] for row in red]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list[Fraction]]:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in bt] for r in a]


def independent_rows(rows: Sequence[Sequence]) -> List[int]:
    """Indices of a maximal independent subset of rows (greedy, in order)."""
    cols = [list(c) for c in zip(*rows)] if rows else []
    _, pivots = rref(cols)
    return pivots
