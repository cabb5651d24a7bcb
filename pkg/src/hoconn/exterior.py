"""Form-degree bookkeeping shared by the Spencer, de Rham and coupled operators.

Every first-order operator ``Lambda^p (x) V -> Lambda^{p+1} (x) W`` used here
has the shape ``(Dw)_{aI} = Alt_{aI} X_{a;I}`` where ``X_{a;I}`` is built from
``w_I`` and is antisymmetric in ``I``. For such ``X`` the normalized
antisymmetrization over ``p+1`` slots collapses to ``p+1`` terms:

    Alt_{s} X = 1/(p+1) * sum_i (-1)^i X_{s_i; s without s_i}.

Degree 0 is identified with the fiber itself (``Lambda^0 (x) V = V``).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterable, Tuple

from .bundles import Bundle, TensorBundle
from .exactalg.poly import Exponent, Poly
from .operators import LinearDiffOp
from .symmetry import Lambda

# kernel(a, I, target fiber index) -> [(source fiber index, alpha, coefficient)]
Kernel = Callable[[int, Tuple[int, ...], int], Iterable[Tuple[int, Exponent, object]]]


def form_bundle(n: int, p: int, fiber: Bundle) -> Bundle:
    """``Lambda^p (x) fiber``, with degree 0 collapsed onto ``fiber``."""
    return fiber if p == 0 else TensorBundle(n, Lambda(p), fiber)


def form_comp(bundle: Bundle, p: int, idx: Tuple[int, ...], fi: int) -> int:
    return fi if p == 0 else bundle.comp(idx, fi)


def _scaled(coef, c: Fraction):
    return coef.scale(c) if isinstance(coef, Poly) else Fraction(coef) * c


def exterior_op(n: int, p: int, src_fiber: Bundle, tgt_fiber: Bundle, kernel: Kernel,
                name: str = "") -> LinearDiffOp:
    """The operator ``w -> Alt_{aI} X_{a;I}`` with ``X`` described by ``kernel``."""
    src = form_bundle(n, p, src_fiber)
    tgt = form_bundle(n, p + 1, tgt_fiber)
    terms = []
    for s in permutations(range(n), p + 1):
        for i in range(p + 1):
            a, rest = s[i], s[:i] + s[i + 1:]
            c = Fraction(-1 if i % 2 else 1, p + 1)
            for ti in range(tgt_fiber.dim):
                for si, alpha, coef in kernel(a, rest, ti):
                    terms.append((form_comp(tgt, p + 1, s, ti), form_comp(src, p, rest, si),
                                  tuple(alpha), _scaled(coef, c)))
    return LinearDiffOp.from_terms(src, tgt, terms, name)


def fiberwise(n: int, p: int, op: LinearDiffOp, name: str = "") -> LinearDiffOp:
    """``Id (x) op`` on ``Lambda^p``-valued sections for an operator between fibers."""
    if p == 0:
        return op
    src = form_bundle(n, p, op.source)
    tgt = form_bundle(n, p, op.target)
    terms = []
    for idx in src.index_tuples:
        for alpha, mat in op.coeffs.items():
            for i, row in mat.items():
                for j, v in row.items():
                    terms.append((tgt.comp(idx, i), src.comp(idx, j), alpha, v))
    return LinearDiffOp.from_terms(src, tgt, terms, name or f"Id(x){op.name}")


def d_unit(n: int, a: int) -> Exponent:
    return tuple(int(i == a) for i in range(n))
