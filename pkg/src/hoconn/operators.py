"""Linear differential operators between bundles with polynomial coefficients.

An operator is a map from derivative multi-index ``alpha`` to a sparse matrix
of polynomials ``C_alpha`` (rows: target components, columns: source
components) and acts by

    (L s)_i = sum_alpha sum_j C_alpha[i][j] * d^alpha s_j.

Composition expands the Leibniz rule on the coefficient maps, so identities
between composites are checked as exact coefficient identities.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

from .bundles import Bundle
from .exactalg.poly import Exponent, Poly, iter_sub_exponents, unit

PolyMat = Dict[int, Dict[int, Poly]]


def _add_into(acc: PolyMat, i: int, j: int, v: Poly) -> None:
    if not v:
        return
    row = acc.setdefault(i, {})
    old = row.get(j)
    new = v if old is None else old + v
    if new:
        row[j] = new
    else:
        del row[j]
        if not row:
            del acc[i]


def _matmul(a: PolyMat, b: PolyMat) -> PolyMat:
    out: PolyMat = {}
    for i, arow in a.items():
        acc: Dict[int, Poly] = {}
        for k, av in arow.items():
            brow = b.get(k)
            if not brow:
                continue
            for j, bv in brow.items():
                prod = av * bv
                if not prod:
                    continue
                old = acc.get(j)
                acc[j] = prod if old is None else old + prod
        acc = {j: v for j, v in acc.items() if v}
        if acc:
            out[i] = acc
    return out


def _derive_mat(m: PolyMat, delta: Exponent) -> PolyMat:
    if not any(delta):
        return m
    out: PolyMat = {}
    for i, row in m.items():
        r = {}
        for j, v in row.items():
            d = v.derive_multi(delta)
            if d:
                r[j] = d
        if r:
            out[i] = r
    return out


def _binom_multi(beta: Exponent, delta: Exponent) -> int:
    out = 1
    for b, d in zip(beta, delta):
        out *= comb(b, d)
    return out


class OrderError(AssertionError):
    """A composite failed to drop to its expected order (implementation bug)."""


class LinearDiffOp:
    """Immutable linear differential operator ``source -> target``."""

    __slots__ = ("source", "target", "coeffs", "name")

    def __init__(self, source: Bundle, target: Bundle, coeffs: Mapping[Exponent, PolyMat], name: str = ""):
        if source.n != target.n:
            raise ValueError("source and target over different base dimensions")
        self.source = source
        self.target = target
        clean = {}
        for alpha, mat in coeffs.items():
            m = {i: {j: v for j, v in row.items() if v} for i, row in mat.items()}
            m = {i: row for i, row in m.items() if row}
            if m:
                clean[tuple(alpha)] = m
        self.coeffs: Dict[Exponent, PolyMat] = clean
        self.name = name

    @property
    def n(self) -> int:
        return self.source.n

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, source: Bundle, target: Bundle, name: str = "0") -> "LinearDiffOp":
        return cls(source, target, {}, name)

    @classmethod
    def homomorphism(cls, source: Bundle, target: Bundle, mat: Mapping[int, Mapping[int, object]], name: str = "") -> "LinearDiffOp":
        """Order-zero operator from a sparse matrix of Poly/Fraction entries."""
        n = source.n
        m: PolyMat = {}
        for i, row in mat.items():
            for j, v in row.items():
                pv = v if isinstance(v, Poly) else Poly.const(n, v)
                if pv:
                    m.setdefault(i, {})[j] = pv
        return cls(source, target, {(0,) * n: m}, name)

    @classmethod
    def identity(cls, bundle: Bundle) -> "LinearDiffOp":
        return cls.homomorphism(bundle, bundle, {i: {i: 1} for i in range(bundle.dim)}, "Id")

    @classmethod
    def from_terms(cls, source: Bundle, target: Bundle,
                   terms: Iterable[Tuple[int, int, Exponent, object]], name: str = "") -> "LinearDiffOp":
        """Build from ``(target comp, source comp, alpha, coefficient)`` tuples."""
        n = source.n
        coeffs: Dict[Exponent, PolyMat] = {}
        for i, j, alpha, c in terms:
            pc = c if isinstance(c, Poly) else Poly.const(n, c)
            _add_into(coeffs.setdefault(tuple(alpha), {}), i, j, pc)
        return cls(source, target, coeffs, name)

    # -- structure -----------------------------------------------------------

    @property
    def order(self) -> int:
        """Largest |alpha| with a nonzero coefficient; -1 for the zero operator."""
        return max((sum(a) for a in self.coeffs), default=-1)

    def coefficient(self, alpha: Exponent) -> PolyMat:
        return self.coeffs.get(tuple(alpha), {})

    def part(self, order: int) -> "LinearDiffOp":
        """The terms with |alpha| == order."""
        return LinearDiffOp(self.source, self.target,
                            {a: m for a, m in self.coeffs.items() if sum(a) == order}, self.name)

    def symbol(self) -> "LinearDiffOp":
        return self.part(self.order)

    def is_constant_coefficient(self) -> bool:
        return all(v.is_constant() for m in self.coeffs.values() for row in m.values() for v in row.values())

    # -- algebra -------------------------------------------------------------

    def _check_same(self, other: "LinearDiffOp") -> None:
        if self.source != other.source or self.target != other.target:
            raise ValueError(f"bundle mismatch: {self.source}->{self.target} vs {other.source}->{other.target}")

    def __add__(self, other: "LinearDiffOp") -> "LinearDiffOp":
        self._check_same(other)
        coeffs = {a: {i: dict(r) for i, r in m.items()} for a, m in self.coeffs.items()}
        for a, m in other.coeffs.items():
            acc = coeffs.setdefault(a, {})
            for i, row in m.items():
                for j, v in row.items():
                    _add_into(acc, i, j, v)
        return LinearDiffOp(self.source, self.target, coeffs)

    def __neg__(self) -> "LinearDiffOp":
        return self.scale(-1)

    def __sub__(self, other: "LinearDiffOp") -> "LinearDiffOp":
        return self + (-other)

    def scale(self, c) -> "LinearDiffOp":
        c = Fraction(c)
        return LinearDiffOp(self.source, self.target,
                            {a: {i: {j: v.scale(c) for j, v in r.items()} for i, r in m.items()}
                             for a, m in self.coeffs.items()}, self.name)

    def compose(self, inner: "LinearDiffOp") -> "LinearDiffOp":
        """``self o inner`` via the Leibniz rule on coefficients."""
        if inner.target != self.source:
            raise ValueError(f"cannot compose {self.source}<-... with ...->{inner.target}")
        out: Dict[Exponent, PolyMat] = {}
        for beta, lmat in self.coeffs.items():
            for delta in iter_sub_exponents(beta):
                b = _binom_multi(beta, delta)
                rest = tuple(x - y for x, y in zip(beta, delta))
                for alpha, mmat in inner.coeffs.items():
                    dm = _derive_mat(mmat, delta)
                    if not dm:
                        continue
                    prod = _matmul(lmat, dm)
                    if not prod:
                        continue
                    gamma = tuple(x + y for x, y in zip(rest, alpha))
                    acc = out.setdefault(gamma, {})
                    for i, row in prod.items():
                        for j, v in row.items():
                            _add_into(acc, i, j, v.scale(b) if b != 1 else v)
        return LinearDiffOp(inner.source, self.target, out)

    __matmul__ = compose

    def apply(self, section: Sequence[Poly]) -> Tuple[Poly, ...]:
        if len(section) != self.source.dim:
            raise ValueError(f"section has {len(section)} components, expected {self.source.dim}")
        n = self.n
        out = [Poly.zero(n) for _ in range(self.target.dim)]
        cache: Dict[Tuple[int, Exponent], Poly] = {}
        for alpha, mat in self.coeffs.items():
            for i, row in mat.items():
                acc = out[i]
                for j, c in row.items():
                    key = (j, alpha)
                    d = cache.get(key)
                    if d is None:
                        d = section[j].derive_multi(alpha)
                        cache[key] = d
                    if d:
                        acc = acc + c * d
                out[i] = acc
        return tuple(out)

    __call__ = apply

    # -- comparisons on the admissible source subspace -----------------------

    def restricted(self) -> Dict[Exponent, Dict[int, Dict[int, Poly]]]:
        """Coefficients composed with the source basis (columns = basis vectors)."""
        basis = self.source.basis
        out = {}
        for alpha, mat in self.coeffs.items():
            m = {}
            for i, row in mat.items():
                r = {}
                for k, vec in enumerate(basis):
                    acc = None
                    for j, c in vec.items():
                        v = row.get(j)
                        if v is not None:
                            t = v.scale(c)
                            acc = t if acc is None else acc + t
                    if acc:
                        r[k] = acc
                if r:
                    m[i] = r
            if m:
                out[alpha] = m
        return out

    def is_zero(self) -> bool:
        """Zero on every admissible source section (coefficient identity)."""
        return not self.restricted()

    def equals(self, other: "LinearDiffOp") -> bool:
        self._check_same(other)
        return (self - other).is_zero()

    def max_order_on_source(self) -> int:
        return max((sum(a) for a in self.restricted()), default=-1)

    def fiber_rank(self) -> int:
        """Rank of a constant order-zero operator on the admissible source fiber."""
        from .exactalg import linalg
        if self.order > 0:
            raise ValueError("fiber rank is defined for homomorphisms only")
        rows = set(self.target.coord_rows)
        mat = self.restricted().get((0,) * self.n, {})
        cols = [dict() for _ in self.source.basis]
        for i, row in mat.items():
            if i not in rows:
                continue
            for k, v in row.items():
                if not v.is_constant():
                    raise linalg.NonConstantEntryError("fiber rank needs constant coefficients")
                cols[k][i] = v.constant_value()
        return linalg.rank_sparse(cols, self.target.dim)

    def lands_in_target(self) -> bool:
        """Whether outputs on admissible inputs are fixed by the target projector."""
        proj = self.target.projector
        if proj is None:
            return True
        p = LinearDiffOp.homomorphism(self.target, self.target, proj)
        return (p.compose(self) - self).is_zero()

    # -- presentation --------------------------------------------------------

    def to_dict(self) -> dict:
        """Machine-readable coefficient map with human component labels."""
        from .exactalg.poly import format_poly
        terms = []
        for alpha in sorted(self.coeffs, key=lambda a: (sum(a), a)):
            for i in sorted(self.coeffs[alpha]):
                for j in sorted(self.coeffs[alpha][i]):
                    terms.append({
                        "alpha": list(alpha),
                        "target": _label_str(self.target.labels[i]),
                        "source": _label_str(self.source.labels[j]),
                        "coeff": format_poly(self.coeffs[alpha][i][j]),
                    })
        return {"source": self.source.name, "target": self.target.name,
                "order": self.order, "terms": terms}

    def __repr__(self) -> str:
        return f"LinearDiffOp({self.name or '?'}: {self.source} -> {self.target}, order {self.order})"


def _label_str(label) -> str:
    """Compact rendering of nested component labels (0-based, as stored)."""
    def conv(x):
        if isinstance(x, tuple):
            return "(" + ",".join(conv(y) for y in x) + ")"
        return str(x)
    return conv(label)


def derivative(bundle: Bundle, axis: int) -> LinearDiffOp:
    """Componentwise d/dx^axis on sections of ``bundle``."""
    e = unit(bundle.n, axis)
    one = Poly.const(bundle.n, 1)
    return LinearDiffOp(bundle, bundle, {e: {i: {i: one} for i in range(bundle.dim)}}, f"d{axis + 1}")


def build_op(source: Bundle, target: Bundle, rule: Callable[[int], Iterable[Tuple[int, Exponent, object]]],
             name: str = "") -> LinearDiffOp:
    """Build an operator column by column.

    ``rule(j)`` yields ``(target comp, alpha, coefficient)`` for the image of
    the ``j``-th source component.
    """
    terms = ((i, j, alpha, c) for j in range(source.dim) for (i, alpha, c) in rule(j))
    return LinearDiffOp.from_terms(source, target, terms, name)
