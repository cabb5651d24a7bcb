"""Exact rational arithmetic, polynomials and linear algebra."""

from fractions import Fraction as Rational

from .linalg import BACKEND, kernel_basis, rank, solve
from .matrix import PolyMatrix, rational_kernel
from .poly import Poly, PolyParseError, format_poly, parse_poly
from .slices import degree_slice_matrix


def poly_derive(p: Poly, a: int) -> Poly:
    """Partial derivative along axis ``a`` counted from 1 (``x1 .. xn``)."""
    if not 1 <= a <= p.n:
        raise IndexError(f"axis {a} out of range 1..{p.n}")
    return p.derive(a - 1)


__all__ = [
    "BACKEND", "Poly", "PolyMatrix", "PolyParseError", "Rational", "degree_slice_matrix",
    "format_poly", "kernel_basis", "parse_poly", "poly_derive", "rank", "rational_kernel", "solve",
]
