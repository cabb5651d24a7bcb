"""Restriction of homogeneous operators to finite-dimensional degree slices.

A source basis vector ``v`` of weight ``w`` times a monomial of degree
``d - w`` spans the weighted-degree-``d`` slice; an operator of weighted order
``o`` maps it into target components ``i`` times monomials of degree
``d - o - w_i``. Rows are restricted to the target's coordinate rows, which
determine every admissible target value, so ranks are unaffected.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from . import linalg
from .matrix import PolyMatrix
from .poly import Exponent, Poly, homogeneous_exponents


class NotHomogeneousError(ValueError):
    pass


class SliceDegreeError(ValueError):
    pass


def weighted_order(op) -> int:
    """The weighted order of a homogeneous operator; raises if not homogeneous."""
    sw, tw = op.source.weights, op.target.weights
    found = None
    for alpha, mat in op.coeffs.items():
        a = sum(alpha)
        for i, row in mat.items():
            for j, c in row.items():
                for e in c.terms:
                    o = a + sw[j] - tw[i] - sum(e)
                    if found is None:
                        found = o
                    elif o != found:
                        raise NotHomogeneousError(f"operator {op!r} is not homogeneous")
    return 0 if found is None else found


def _basis_weight(op_bundle, vec) -> int:
    ws = {op_bundle.weights[j] for j in vec}
    if len(ws) != 1:
        raise NotHomogeneousError("basis vector mixes weights")
    return ws.pop()


def slice_columns(op, d: int, order: str = "grlex", shift: int | None = None):
    """Sparse columns ``{(target comp, exponent): value}`` of the degree-``d`` slice.

    Returns ``(columns, column labels)`` where labels are ``(basis index, exponent)``.
    """
    n = op.n
    o = weighted_order(op) if shift is None else shift
    rows_ok = set(op.target.coord_rows)
    cols: List[Dict[Tuple[int, Exponent], Fraction]] = []
    labels: List[Tuple[int, Exponent]] = []
    by_source: Dict[int, List[Tuple[Exponent, int, Poly]]] = {}
    for alpha, mat in op.coeffs.items():
        for i, row in mat.items():
            if i not in rows_ok:
                continue
            for j, c in row.items():
                by_source.setdefault(j, []).append((alpha, i, c))
    for k, vec in enumerate(op.source.basis):
        w = _basis_weight(op.source, vec)
        for m in homogeneous_exponents(n, d - w, order):
            col: Dict[Tuple[int, Exponent], Fraction] = {}
            for j, a in vec.items():
                for alpha, i, c in by_source.get(j, ()):
                    if any(x > y for x, y in zip(alpha, m)):
                        continue
                    f = Fraction(a)
                    for y, x in zip(m, alpha):
                        for t in range(x):
                            f *= y - t
                    dm = tuple(y - x for x, y in zip(alpha, m))
                    for e, cv in c.terms.items():
                        key = (i, tuple(p + q for p, q in zip(e, dm)))
                        v = col.get(key, 0) + f * cv
                        if v:
                            col[key] = v
                        else:
                            col.pop(key, None)
            cols.append(col)
            labels.append((k, m))
    return cols, labels, o


def slice_dims(op, d: int, backend: str | None = None) -> Tuple[int, int]:
    """``(dimension of the source slice, rank of the operator on it)``."""
    cols, _, _ = slice_columns(op, d)
    packed = []
    index: Dict[Tuple[int, Exponent], int] = {}
    for c in cols:
        packed.append({index.setdefault(key, len(index)): v for key, v in c.items()})
    return len(cols), linalg.rank_sparse(packed, len(index), backend)


def degree_slice_matrix(op, d: int, order: str = "grlex") -> PolyMatrix:
    """Constant matrix of ``op`` on the homogeneous degree-``d`` slice.

    Columns: source basis vector x monomial; rows: target coordinate row x
    monomial of degree ``d - order``, both in the chosen monomial order.
    """
    o = weighted_order(op)
    if d < o:
        raise SliceDegreeError(f"degree {d} is below the operator order {o}")
    cols, _, _ = slice_columns(op, d, order)
    n = op.n
    row_keys = []
    for i in op.target.coord_rows:
        for m in homogeneous_exponents(n, d - o - op.target.weights[i], order):
            row_keys.append((i, m))
    rindex = {k: r for r, k in enumerate(row_keys)}
    entries = {}
    for c, col in enumerate(cols):
        for key, v in col.items():
            entries[(rindex[key], c)] = Poly.const(0, v)
    return PolyMatrix(len(row_keys), len(cols), 0, entries)


def slice_homology(prev, nxt, d: int, backend: str | None = None) -> Tuple[int, int, int]:
    """Homology of ``prev`` then ``nxt`` at the middle bundle in weighted degree ``d``.

    Returns ``(dim ker nxt, rank prev, homology)``; ``prev`` is sliced at
    ``d + order(prev)`` so that its image lands in degree ``d``.
    """
    cols, r_next = slice_dims(nxt, d, backend)
    o_prev = weighted_order(prev)
    _, r_prev = slice_dims(prev, d + o_prev, backend)
    ker = cols - r_next
    return ker, r_prev, ker - r_prev
