"""Multivariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction`. Exponents are tuples of length
``n``; variables are written ``x1 .. xn`` in the literal syntax, while the
Python API indexes axes from 0.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Iterable, Iterator, Tuple, Union

Exponent = Tuple[int, ...]
Rational = Fraction
Scalar = Union[int, Fraction]


class PolyParseError(ValueError):
    """Raised for malformed polynomial literals; ``pos`` is a 0-based column."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1}: {text!r}")
        self.text = text
        self.pos = pos


class Poly:
    """Immutable polynomial in ``n`` variables with rational coefficients.

    Zero coefficients are never stored, so two polynomials are equal exactly
    when their term maps are equal.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Dict[Exponent, Scalar] | None = None):
        self.n = n
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} has wrong length for n={n}")
                if c:
                    clean[tuple(e)] = Fraction(c)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: Dict[Exponent, Fraction]) -> "Poly":
        # trusted constructor: terms already clean
        p = object.__new__(cls)
        p.n = n
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls._raw(n, {})

    @classmethod
    def const(cls, n: int, c: Scalar) -> "Poly":
        c = Fraction(c)
        return cls._raw(n, {(0,) * n: c} if c else {})

    @classmethod
    def var(cls, n: int, axis: int) -> "Poly":
        if not 0 <= axis < n:
            raise IndexError(f"axis {axis} out of range for n={n}")
        e = [0] * n
        e[axis] = 1
        return cls._raw(n, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Exponent, coeff: Scalar = 1) -> "Poly":
        c = Fraction(coeff)
        return cls._raw(len(exps), {tuple(exps): c} if c else {})

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((0,) * self.n, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return d is None or degs == {d}

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly._raw(self.n, {e: c for e, c in self.terms.items() if sum(e) == d})

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.n, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.n, other)
        return NotImplemented

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def scale(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly._raw(self.n, {})
        if c == 1:
            return self
        return Poly._raw(self.n, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly._raw(self.n, {})
        if len(other.terms) == 1 and not any(next(iter(other.terms))):
            return self.scale(next(iter(other.terms.values())))
        if len(self.terms) == 1 and not any(next(iter(self.terms))):
            return other.scale(next(iter(self.terms.values())))
        out: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Poly._raw(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Poly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus ------------------------------------------------------------

    def derive(self, axis: int) -> "Poly":
        """Partial derivative along ``axis`` (0-based)."""
        if not 0 <= axis < self.n:
            raise IndexError(f"axis {axis} out of range for n={self.n}")
        out: Dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[axis]
            if k:
                e2 = e[:axis] + (k - 1,) + e[axis + 1:]
                out[e2] = c * k
        return Poly._raw(self.n, out)

    def derive_multi(self, alpha: Exponent) -> "Poly":
        """Apply the mixed partial ``d^alpha``."""
        out: Dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            coeff = c
            for k, a in zip(e, alpha):
                if a > k:
                    coeff = 0
                    break
                for j in range(a):
                    coeff *= k - j
            if coeff:
                out[tuple(k - a for k, a in zip(e, alpha))] = coeff
        return Poly._raw(self.n, out)

    def evaluate(self, point: Iterable[Scalar]) -> Fraction:
        pt = [Fraction(v) for v in point]
        if len(pt) != self.n:
            raise ValueError("point has wrong dimension")
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(pt, e):
                if k:
                    t *= v ** k
            total += t
        return total

    # -- text ----------------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly({self.n}, {format_poly(self)!r})"


# ---------------------------------------------------------------------------
# monomial enumeration


def grlex_key(e: Exponent):
    """Sort key placing exponents in descending graded-lex order."""
    return (-sum(e), tuple(-k for k in e))


def homogeneous_exponents(n: int, d: int, order: str = "grlex") -> list[Exponent]:
    """All exponents of total degree ``d`` in ``n`` variables.

    ``order="grlex"`` gives x1^d first; ``"revlex"`` reverses that list.
    """
    if d < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for a in combo:
            e[a] += 1
        out.append(tuple(e))
    out.sort(key=grlex_key)
    if order == "revlex":
        out.reverse()
    elif order != "grlex":
        raise ValueError(f"unknown monomial order {order!r}")
    return out


def exponents_up_to(n: int, d: int) -> list[Exponent]:
    """Exponents of degree <= d in ascending degree, graded-lex within a degree."""
    out: list[Exponent] = []
    for k in range(d + 1):
        out.extend(homogeneous_exponents(n, k))
    return out


def count_monomials(n: int, d: int) -> int:
    return comb(n + d - 1, d) if d >= 0 else 0


def multinomial(e: Exponent) -> int:
    """Number of ordered index tuples with content ``e``."""
    total = sum(e)
    out = 1
    for k in e:
        out *= comb(total, k)
        total -= k
    return out


def unit(n: int, axis: int) -> Exponent:
    return tuple(1 if i == axis else 0 for i in range(n))


def exponent_of(indices: Iterable[int], n: int) -> Exponent:
    """Content of an index tuple (0-based indices) as an exponent vector."""
    e = [0] * n
    for a in indices:
        e[a] += 1
    return tuple(e)


def indices_of(e: Exponent) -> Tuple[int, ...]:
    """Sorted index tuple whose content is ``e``."""
    out: list[int] = []
    for a, k in enumerate(e):
        out.extend([a] * k)
    return tuple(out)


def iter_sub_exponents(beta: Exponent) -> Iterator[Exponent]:
    """All ``delta`` with ``0 <= delta <= beta`` componentwise."""
    if not beta:
        yield ()
        return
    for head in range(beta[0] + 1):
        for tail in iter_sub_exponents(beta[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# literal syntax


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly) -> str:
    """Canonical literal: terms in descending graded-lex order."""
    if not p.terms:
        return "0"
    pieces = []
    for e in sorted(p.terms, key=grlex_key):
        c = p.terms[e]
        mono = " ".join(
            f"x{a + 1}" if k == 1 else f"x{a + 1}^{k}" for a, k in enumerate(e) if k
        )
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{_format_coeff(mag)} {mono}"
        else:
            body = _format_coeff(mag)
        sign = "-" if c < 0 else "+"
        pieces.append((sign, body))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\s*/\s*\d+)?)|(?P<var>x\s*(?P<idx>\d+)(?:\s*\^\s*(?P<exp>\d+))?)|(?P<op>[+\-*]))")


def parse_poly(text: str, n: int) -> Poly:
    """Parse a literal such as ``"3/2 x1^2 x2 - x3"`` in ``n`` variables."""
    if not isinstance(text, str):
        if isinstance(text, (int, Fraction)):
            return Poly.const(n, text)
        raise PolyParseError("expected a string", str(text), 0)
    pos = 0
    terms: Dict[Exponent, Fraction] = {}
    sign = 1
    coeff: Fraction | None = None
    exps = [0] * n
    have_factor = False
    expect_term = True

    def flush(at: int):
        nonlocal sign, coeff, exps, have_factor
        if not have_factor:
            raise PolyParseError("empty term", text, at)
        c = sign * (coeff if coeff is not None else Fraction(1))
        e = tuple(exps)
        terms[e] = terms.get(e, Fraction(0)) + c
        sign, coeff, exps, have_factor = 1, None, [0] * n, False

    stripped = text.strip()
    if not stripped:
        raise PolyParseError("empty polynomial", text, 0)
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolyParseError("unexpected character", text, len(text) - len(text[pos:].lstrip()))
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("op") in ("+", "-"):
            if have_factor:
                flush(start)
                sign = 1 if m.group("op") == "+" else -1
            elif expect_term:
                sign *= 1 if m.group("op") == "+" else -1
            else:
                raise PolyParseError("misplaced sign", text, start)
        elif m.group("op") == "*":
            if not have_factor:
                raise PolyParseError("misplaced '*'", text, start)
        elif m.group("num") is not None:
            if coeff is not None or any(exps):
                # a number after variables, e.g. "x1 2", is ambiguous
                raise PolyParseError("coefficient must precede variables", text, start)
            num = m.group("num").replace(" ", "")
            if "/" in num:
                a, b = num.split("/")
                if int(b) == 0:
                    raise PolyParseError("zero denominator", text, start)
                coeff = Fraction(int(a), int(b))
            else:
                coeff = Fraction(int(num))
            have_factor = True
        else:
            idx = int(m.group("idx"))
            if not 1 <= idx <= n:
                raise PolyParseError(f"variable x{idx} out of range for n={n}", text, start)
            k = int(m.group("exp")) if m.group("exp") is not None else 1
            exps[idx - 1] += k
            have_factor = True
        expect_term = not have_factor
        pos = m.end()
    flush(len(text))
    return Poly(n, terms)
