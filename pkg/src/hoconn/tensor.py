"""Symmetry-typed tensor fields and the tensorial maps between them.

Conventions: indices are 0-based in the Python API (1-based in configs and
reports). Square brackets mean the *normalized* antisymmetrization, so
``phi_[ab] = (phi_ab - phi_ba) / 2``; exterior derivatives and wedge
products on full antisymmetric components use the same normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Dict, Mapping, Sequence, Tuple

from .bundles import EBundle, TensorBundle
from .exactalg.poly import Poly
from .operators import LinearDiffOp, build_op
from .symmetry import (Full, Lambda, LambdaLambda, LambdaSym, Sym, SymmetryType, Theta, Xi,
                       dimension, parse_symmetry)

__all__ = [
    "Full", "Lambda", "LambdaLambda", "LambdaSym", "Sym", "SymmetryType", "Theta", "Xi",
    "TensorField", "SymmetryError", "alt_terms", "curl", "curl_op", "delta_hom", "delta_map",
    "dimension", "epsilon", "fiber_rank", "nearrow_hom", "nearrow_map", "parse_symmetry", "project",
    "projector_op",
]


class SymmetryError(ValueError):
    """Input tensor does not have the symmetry an operation requires."""


def _perm_parity(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def alt_terms(k: int):
    """``(permutation, sign / k!)`` pairs for normalized antisymmetrization of k slots."""
    f = Fraction(1, factorial(k))
    return [(perm, f * _perm_parity(perm)) for perm in permutations(range(k))]


def epsilon(*idx: int) -> int:
    """Levi-Civita symbol on 0-based indices (n = 3 when three indices given)."""
    if len(set(idx)) != len(idx):
        return 0
    return _perm_parity(idx)


@dataclass(frozen=True)
class TensorField:
    """Polynomial covariant tensor field with values in R^r."""

    bundle: TensorBundle
    values: Tuple[Poly, ...]

    def __post_init__(self):
        if len(self.values) != self.bundle.dim:
            raise ValueError("value count does not match the bundle")

    @property
    def n(self) -> int:
        return self.bundle.n

    @property
    def sym(self) -> SymmetryType:
        return self.bundle.sym

    @property
    def fiber_rank(self) -> int:
        return self.bundle.fiber.dim

    @property
    def rank(self) -> int:
        return self.bundle.sym.rank

    @classmethod
    def from_components(cls, n: int, sym: SymmetryType, comps: Mapping[Tuple[int, ...], object],
                        r: int = 1) -> "TensorField":
        """Build from ``{index tuple: poly or [poly, ...]}`` (0-based indices); omitted entries are zero."""
        b = TensorBundle(n, sym, EBundle(n, r))
        vals = [Poly.zero(n)] * b.dim
        for t, v in comps.items():
            fib = v if isinstance(v, (list, tuple)) else [v]
            if len(fib) != r:
                raise ValueError(f"component {t} has {len(fib)} fiber entries, expected {r}")
            if len(t) != sym.rank or any(not 0 <= a < n for a in t):
                raise IndexError(f"bad index tuple {t}")
            for f, pv in enumerate(fib):
                vals[b.comp(t, f)] = pv if isinstance(pv, Poly) else Poly.const(n, pv)
        return cls(b, tuple(vals))

    @classmethod
    def from_function(cls, n: int, sym: SymmetryType, fn, r: int = 1) -> "TensorField":
        b = TensorBundle(n, sym, EBundle(n, r))
        vals = []
        for t in b.index_tuples:
            v = fn(t)
            fib = v if isinstance(v, (list, tuple)) else [v]
            vals.extend(p if isinstance(p, Poly) else Poly.const(n, p) for p in fib)
        return cls(b, tuple(vals))

    def __getitem__(self, t: Tuple[int, ...]) -> Tuple[Poly, ...]:
        base = self.bundle.comp(tuple(t), 0)
        return self.values[base:base + self.fiber_rank]

    def component(self, t: Tuple[int, ...], f: int = 0) -> Poly:
        return self.values[self.bundle.comp(tuple(t), f)]

    def nonzero(self) -> Dict[Tuple[int, ...], Tuple[Poly, ...]]:
        return {t: self[t] for t in self.bundle.index_tuples if any(self[t])}

    def with_symmetry(self, sym: SymmetryType) -> "TensorField":
        """Reinterpret the same components under another symmetry label."""
        if sym.rank != self.rank:
            raise ValueError("rank mismatch")
        return TensorField(TensorBundle(self.n, sym, self.bundle.fiber), self.values)

    def is_symmetric(self) -> bool:
        """Whether the components are fixed by this field's projector."""
        proj = self.bundle.projector
        return proj is None or _apply_matrix(proj, self.values, self.n) == self.values

    def is_zero(self) -> bool:
        return not any(self.values)

    def __add__(self, other: "TensorField") -> "TensorField":
        return TensorField(self.bundle, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "TensorField") -> "TensorField":
        return TensorField(self.bundle, tuple(a - b for a, b in zip(self.values, other.values)))


def _apply_matrix(mat, vals, n) -> Tuple[Poly, ...]:
    out = []
    for i in range(len(vals)):
        row = mat.get(i)
        acc = Poly.zero(n)
        if row:
            for j, c in row.items():
                if vals[j]:
                    acc = acc + vals[j].scale(c)
        out.append(acc)
    return tuple(out)


def projector_op(bundle: TensorBundle) -> LinearDiffOp:
    """The orthogonal projector of ``bundle`` as an operator on its ambient components."""
    proj = bundle.projector
    if proj is None:
        return LinearDiffOp.identity(bundle)
    return LinearDiffOp.homomorphism(bundle, bundle, proj, f"P[{bundle.sym}]")


def project(sym: SymmetryType, t: TensorField) -> TensorField:
    """Orthogonal projection of ``t`` onto the ``sym`` subspace."""
    if sym.rank != t.rank:
        raise ValueError(f"rank mismatch: {sym} has rank {sym.rank}, tensor has rank {t.rank}")
    target = TensorBundle(t.n, sym, t.bundle.fiber)
    proj = target.projector
    vals = t.values if proj is None else _apply_matrix(proj, t.values, t.n)
    return TensorField(target, vals)


def fiber_rank(op: LinearDiffOp) -> int:
    """Rank of an order-zero constant operator on the admissible source fiber."""
    return op.fiber_rank()


def _require(t: TensorField, sym: SymmetryType, what: str) -> None:
    if t.rank != sym.rank:
        raise SymmetryError(f"{what} needs a rank-{sym.rank} tensor, got rank {t.rank}")
    if not t.with_symmetry(sym).is_symmetric():
        raise SymmetryError(f"{what} needs {sym} symmetry")


# ---------------------------------------------------------------------------
# delta: Lambda^1 (x) Sym^k -> Theta^{2,k-1}


def delta_hom(n: int, k: int, r: int = 1) -> LinearDiffOp:
    """phi_{a b c..d} -> phi_{[ab] c..d} as a homomorphism into Theta(2,k-1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    src = TensorBundle(n, LambdaSym(1, k), EBundle(n, r))
    tgt = TensorBundle(n, Theta(2, k - 1), EBundle(n, r))
    zero = (0,) * n
    half = Fraction(1, 2)

    def rule(j):
        (t, (f,)) = src.labels[j]
        a, b, rest = t[0], t[1], t[2:]
        if a == b:
            return
        yield tgt.comp(t, f), zero, half
        yield tgt.comp((b, a) + rest, f), zero, -half
    return build_op(src, tgt, rule, "delta")


def delta_map(phi: TensorField) -> TensorField:
    k = phi.rank - 1
    _require(phi, LambdaSym(1, k), "delta_map")
    op = delta_hom(phi.n, k, phi.fiber_rank)
    return TensorField(op.target, op.apply(phi.values))


# ---------------------------------------------------------------------------
# nearrow: Lambda^p (x) Lambda^2 -> Lambda^{p+1} (x) Lambda^1


def nearrow_hom(n: int, p: int, r: int = 1) -> LinearDiffOp:
    """mu_{a..b cd} -> -mu_{[a..b c] d}."""
    src = TensorBundle(n, LambdaLambda(p, 2), EBundle(n, r))
    tgt = TensorBundle(n, LambdaSym(p + 1, 1), EBundle(n, r))
    zero = (0,) * n
    terms = alt_terms(p + 1)

    def rule(j):
        (t, (f,)) = src.labels[j]
        # component mu_{t} contributes to out_{s} whenever the first p+1 of s
        # permute to t[:p+1] and s[p+1] = t[p+1]
        head, d = t[:p + 1], t[p + 1]
        for perm, c in terms:
            # out_{s} = -sum_perm c * mu_{s[perm] , d}; solve s = head permuted back
            s = [0] * (p + 1)
            for pos, src_pos in enumerate(perm):
                s[src_pos] = head[pos]
            yield tgt.comp(tuple(s) + (d,), f), zero, -c
    return build_op(src, tgt, rule, f"nearrow_{p}")


def nearrow_map(mu: TensorField, p: int | None = None) -> TensorField:
    p = mu.rank - 2 if p is None else p
    _require(mu, LambdaLambda(p, 2), "nearrow_map")
    op = nearrow_hom(mu.n, p, mu.fiber_rank)
    return TensorField(op.target, op.apply(mu.values))


# ---------------------------------------------------------------------------
# curl in R^3


def curl_op(rank: int, slot: int, r: int = 1) -> LinearDiffOp:
    """t -> eps_a^{cd} d_c t_{..d..} with the new index a placed at ``slot`` (n = 3)."""
    n = 3
    if not 0 <= slot < rank:
        raise IndexError("slot out of range")
    b = TensorBundle(n, Full(rank), EBundle(n, r))

    def rule(j):
        (t, (f,)) = b.labels[j]
        d = t[slot]
        for a in range(n):
            for c in range(n):
                e = epsilon(a, c, d)
                if e:
                    alpha = tuple(int(i == c) for i in range(n))
                    yield b.comp(t[:slot] + (a,) + t[slot + 1:], f), alpha, e
    return build_op(b, b, rule, f"curl@{slot}")


def curl(t: TensorField, slot: int = 0) -> TensorField:
    if t.n != 3:
        raise ValueError("curl is only defined for n = 3")
    op = curl_op(t.rank, slot, t.fiber_rank)
    full = t.with_symmetry(Full(t.rank))
    return TensorField(op.target, op.apply(full.values))
