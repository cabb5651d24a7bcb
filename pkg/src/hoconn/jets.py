"""Jet sections, the universal operators j^l and pi, and the Spencer operator.

Slot ``u_beta`` of a jet is indexed by a derivative multi-index (exponent
vector) and stands for ``d^beta s`` on holonomic jets. The Spencer operator is
realized as

    (S u)_{a, beta} = d_a u_beta - u_{beta + e_a},       |beta| <= l - 1,

and on form-valued jets ``Lambda^p (x) J^l E -> Lambda^{p+1} (x) J^{l-1} E`` as
``Alt_{aI}[d_a w_{I,beta} - w_{I,beta+e_a}]``, which agrees with
``S(w (x) s) = dw (x) pi s - w ^ S s`` on decomposable forms.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Dict, List, Mapping, Sequence, Tuple

from .bundles import Bundle, EBundle, JetBundle, TensorBundle
from .exactalg.poly import Exponent, Poly, exponent_of, exponents_up_to, homogeneous_exponents, indices_of
from .exterior import d_unit, exterior_op, fiberwise, form_bundle, form_comp
from .operators import LinearDiffOp
from .symmetry import LambdaSym, Sym

__all__ = [
    "Diagram4Report", "FormValuedJet", "JetSection", "check_diagram4", "column0_op", "inclusion_op",
    "iota_op", "jet_op", "jet_project", "jet_prolong", "projection_op", "random_poly", "random_section",
    "spencer", "spencer_op", "spencer_wedge", "sym_form_bundle",
]


def _as_section(s, n: int | None = None) -> Tuple[Poly, ...]:
    if isinstance(s, Poly):
        return (s,)
    return tuple(s)


@dataclass(frozen=True)
class JetSection:
    """Coordinates of a (not necessarily holonomic) section of J^l E."""

    bundle: JetBundle
    values: Tuple[Poly, ...]

    def __post_init__(self):
        if len(self.values) != self.bundle.dim:
            raise ValueError("value count does not match the jet bundle")

    @property
    def n(self) -> int:
        return self.bundle.n

    @property
    def order(self) -> int:
        return self.bundle.order

    @property
    def r(self) -> int:
        return self.bundle.r

    @classmethod
    def from_slots(cls, n: int, order: int, r: int, slots: Mapping[Exponent, object]) -> "JetSection":
        """``slots`` maps a multi-index to a fiber vector (or a Poly when r = 1); omitted slots are zero."""
        b = JetBundle(n, order, r)
        vals = [Poly.zero(n)] * b.dim
        for beta, v in slots.items():
            beta = tuple(beta)
            if len(beta) != n or sum(beta) > order:
                raise ValueError(f"multi-index {beta} out of range for order {order}")
            fib = v if isinstance(v, (list, tuple)) else [v]
            if len(fib) != r:
                raise ValueError(f"slot {beta} has {len(fib)} entries, expected {r}")
            for f, pv in enumerate(fib):
                vals[b.slot(beta, f)] = pv if isinstance(pv, Poly) else Poly.const(n, pv)
        return cls(b, tuple(vals))

    @property
    def slots(self) -> Dict[Exponent, Tuple[Poly, ...]]:
        r = self.r
        return {beta: self.values[i * r:(i + 1) * r] for i, beta in enumerate(self.bundle.multi_indices)}

    def __getitem__(self, beta: Exponent) -> Tuple[Poly, ...]:
        base = self.bundle.slot(tuple(beta), 0)
        return self.values[base:base + self.r]

    def is_holonomic(self) -> bool:
        return jet_prolong(self[(0,) * self.n], self.order, self.n) == self


@dataclass(frozen=True)
class FormValuedJet:
    """A section of Lambda^p (x) J^l E (antisymmetric in the form indices)."""

    p: int
    bundle: Bundle
    values: Tuple[Poly, ...]

    @property
    def jet_bundle(self) -> JetBundle:
        return self.bundle if self.p == 0 else self.bundle.fiber

    @property
    def order(self) -> int:
        return self.jet_bundle.order

    def slot(self, idx: Tuple[int, ...], beta: Exponent) -> Tuple[Poly, ...]:
        jb = self.jet_bundle
        base = form_comp(self.bundle, self.p, tuple(idx), jb.slot(tuple(beta), 0))
        return self.values[base:base + jb.r]

    @classmethod
    def from_jet(cls, u: JetSection) -> "FormValuedJet":
        return cls(0, u.bundle, u.values)


# ---------------------------------------------------------------------------
# operators


@lru_cache(maxsize=None)
def jet_op(n: int, ell: int, r: int = 1) -> LinearDiffOp:
    """j^l : E -> J^l E."""
    src, tgt = EBundle(n, r), JetBundle(n, ell, r)
    terms = [(tgt.slot(beta, f), f, beta, 1) for beta in tgt.multi_indices for f in range(r)]
    return LinearDiffOp.from_terms(src, tgt, terms, f"j{ell}")


@lru_cache(maxsize=None)
def projection_op(n: int, ell: int, r: int = 1, p: int = 0) -> LinearDiffOp:
    """Id (x) pi : Lambda^p (x) J^l E -> Lambda^p (x) J^{l-1} E."""
    if ell < 1:
        raise ValueError("projection needs jet order >= 1")
    src, tgt = JetBundle(n, ell, r), JetBundle(n, ell - 1, r)
    terms = [(tgt.slot(beta, f), src.slot(beta, f), (0,) * n, 1)
             for beta in tgt.multi_indices for f in range(r)]
    return fiberwise(n, p, LinearDiffOp.from_terms(src, tgt, terms, "pi"), "pi")


@lru_cache(maxsize=None)
def spencer_op(n: int, ell: int, r: int = 1, p: int = 0) -> LinearDiffOp:
    """S : Lambda^p (x) J^l E -> Lambda^{p+1} (x) J^{l-1} E."""
    if ell < 1:
        raise ValueError("the Spencer operator needs jet order >= 1")
    src_j, tgt_j = JetBundle(n, ell, r), JetBundle(n, ell - 1, r)
    zero = (0,) * n
    labels = tgt_j.labels

    def kernel(a, _I, ti):
        beta, f = labels[ti]
        up = tuple(b + (i == a) for i, b in enumerate(beta))
        return ((src_j.slot(beta, f), d_unit(n, a), 1), (src_j.slot(up, f), zero, -1))
    return exterior_op(n, p, src_j, tgt_j, kernel, f"S[{p},{ell}]")


def sym_form_bundle(n: int, p: int, q: int, r: int = 1) -> TensorBundle:
    """Lambda^p (x) Sym^q (x) E."""
    sym = Sym(q) if p == 0 else LambdaSym(p, q)
    return TensorBundle(n, sym, EBundle(n, r))


@lru_cache(maxsize=None)
def inclusion_op(n: int, p: int, q: int, r: int = 1) -> LinearDiffOp:
    """Lambda^p (x) Sym^q (x) E  ->  Lambda^p (x) J^q E onto the top slots."""
    src = sym_form_bundle(n, p, q, r)
    jb = JetBundle(n, q, r)
    tgt = form_bundle(n, p, jb)
    zero = (0,) * n
    terms = []
    for idx in product(range(n), repeat=p):
        for beta in homogeneous_exponents(n, q):
            for f in range(r):
                terms.append((form_comp(tgt, p, idx, jb.slot(beta, f)), src.comp(idx + indices_of(beta), f), zero, 1))
    return LinearDiffOp.from_terms(src, tgt, terms, f"incl[{p},{q}]")


@lru_cache(maxsize=None)
def iota_op(n: int, k: int, r: int = 1) -> LinearDiffOp:
    """iota (x) Id : Sym^k (x) E -> Lambda^1 (x) Sym^{k-1} (x) E (the same components)."""
    src, tgt = sym_form_bundle(n, 0, k, r), sym_form_bundle(n, 1, k - 1, r)
    zero = (0,) * n
    terms = [(tgt.comp(t, f), src.comp(t, f), zero, 1) for t in src.index_tuples for f in range(r)]
    return LinearDiffOp.from_terms(src, tgt, terms, "iota")


@lru_cache(maxsize=None)
def column0_op(n: int, p: int, q: int, r: int = 1) -> LinearDiffOp:
    """First column of the Spencer diagram: w_{I;T} -> -Alt_{aI} w_{I; a T'}.

    For p = 0 this is ``-iota (x) Id``.
    """
    src, tgt = sym_form_bundle(n, p, q, r), sym_form_bundle(n, p + 1, q - 1, r)
    zero = (0,) * n
    c0 = Fraction(1, p + 1)
    terms = []
    for s in permutations(range(n), p + 1):
        for rest in product(range(n), repeat=q - 1):
            for i in range(p + 1):
                a, idx = s[i], s[:i] + s[i + 1:]
                c = -c0 if i % 2 == 0 else c0
                for f in range(r):
                    terms.append((tgt.comp(s + rest, f), src.comp(idx + (a,) + rest, f), zero, c))
    return LinearDiffOp.from_terms(src, tgt, terms, f"col0[{p},{q}]")


# ---------------------------------------------------------------------------
# section-level wrappers


def jet_prolong(s, ell: int, n: int | None = None) -> JetSection:
    """j^l s; ``s`` is a Poly (r = 1) or a sequence of Polys."""
    sec = _as_section(s)
    if ell < 0:
        raise ValueError("order must be >= 0")
    n = sec[0].n if n is None else n
    op = jet_op(n, ell, len(sec))
    return JetSection(op.target, op.apply(sec))


def jet_project(u: JetSection) -> JetSection:
    if u.order < 1:
        raise ValueError("cannot project a jet of order 0")
    op = projection_op(u.n, u.order, u.r)
    return JetSection(op.target, op.apply(u.values))


def spencer(u: JetSection) -> FormValuedJet:
    if u.order < 1:
        raise ValueError("the Spencer operator needs jet order >= 1")
    op = spencer_op(u.n, u.order, u.r, 0)
    return FormValuedJet(1, op.target, op.apply(u.values))


def spencer_wedge(w: FormValuedJet) -> FormValuedJet:
    jb = w.jet_bundle
    if jb.order < 1:
        raise ValueError("the Spencer operator needs jet order >= 1")
    op = spencer_op(jb.n, jb.order, jb.r, w.p)
    return FormValuedJet(w.p + 1, op.target, op.apply(w.values))


# ---------------------------------------------------------------------------
# random samples


def random_poly(rng: random.Random, n: int, deg: int, density: float = 0.6, span: int = 5) -> Poly:
    terms = {}
    for e in exponents_up_to(n, deg):
        if rng.random() < density:
            c = rng.randint(-span, span)
            if c:
                terms[e] = Fraction(c, rng.choice((1, 1, 2, 3)))
    return Poly(n, terms)


def random_section(rng: random.Random, bundle: Bundle, deg: int) -> Tuple[Poly, ...]:
    """A random admissible section (combination of the bundle's basis)."""
    n = bundle.n
    vals = [Poly.zero(n)] * bundle.dim
    for vec in bundle.basis:
        c = random_poly(rng, n, deg, density=0.3)
        if not c:
            continue
        for j, a in vec.items():
            vals[j] = vals[j] + c.scale(a)
    return tuple(vals)


# ---------------------------------------------------------------------------
# diagram check


@dataclass
class Diagram4Report:
    k: int
    n: int
    r: int
    checks: List[Tuple[str, bool]] = field(default_factory=list)

    def add(self, name: str, ok: bool) -> None:
        self.checks.append((name, bool(ok)))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok in self.checks)

    @property
    def failures(self) -> List[str]:
        return [name for name, ok in self.checks if not ok]


def _agree(a: LinearDiffOp, b: LinearDiffOp, samples) -> bool:
    if not a.equals(b):
        return False
    return all(a.apply(s) == b.apply(s) for s in samples)


def check_diagram4(k: int, n: int, r: int = 1, samples: int = 20, deg: int = 4, seed: int = 0) -> Diagram4Report:
    """Verify rows, columns and squares of the Spencer diagram for J^k E.

    Each identity is checked as an exact coefficient identity and, in
    addition, on ``samples`` random admissible polynomial sections.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = random.Random(seed)
    rep = Diagram4Report(k, n, r)

    def sample(b):
        return [random_section(rng, b, deg) for _ in range(samples)]

    # top row: pi o j^k = j^{k-1}, and the columns start with S o j^l = 0
    e_samples = sample(EBundle(n, r))
    rep.add("pi o j^k = j^(k-1)", _agree(projection_op(n, k, r) @ jet_op(n, k, r), jet_op(n, k - 1, r), e_samples))
    for ell in (k, k - 1):
        if ell >= 1:
            comp = spencer_op(n, ell, r) @ jet_op(n, ell, r)
            rep.add(f"S o j^{ell} = 0", comp.is_zero() and all(not any(comp.apply(s)) for s in e_samples))

    pmax = min(n, k - 1)
    for p in range(pmax + 1):
        q = k - p
        incl, pi = inclusion_op(n, p, q, r), projection_op(n, q, r, p)
        sub, mid, quo = incl.source, incl.target, pi.target
        rep.add(f"row {p}: pi o incl = 0", (pi @ incl).is_zero())
        ranks_ok = (incl.fiber_rank() == sub.rank and pi.fiber_rank() == quo.rank
                    and sub.rank + quo.rank == mid.rank)
        rep.add(f"row {p}: fiber ranks {sub.rank} + {quo.rank} = {mid.rank}", ranks_ok)

        if p + 1 <= n:
            s_mid = spencer_op(n, q, r, p)
            mid_samples = sample(mid)
            # left square: S o incl = incl o (first column map)
            left = s_mid @ incl
            right = inclusion_op(n, p + 1, q - 1, r) @ column0_op(n, p, q, r)
            rep.add(f"square L{p}: S o incl = incl o col0", _agree(left, right, sample(sub)))
            if p == 0:
                minus_iota = (column0_op(n, 0, k, r) + iota_op(n, k, r))
                rep.add("first column is -iota (x) Id", minus_iota.is_zero())
            # right square: (Id (x) pi) o S = S o (Id (x) pi)
            if q >= 2:
                lhs = projection_op(n, q - 1, r, p + 1) @ s_mid
                rhs = spencer_op(n, q - 1, r, p) @ pi
                rep.add(f"square R{p}: pi o S = S o pi", _agree(lhs, rhs, mid_samples))
            # columns are complexes
            if q >= 2 and p + 2 <= n:
                ss = spencer_op(n, q - 1, r, p + 1) @ s_mid
                rep.add(f"column {p}: S o S = 0", ss.is_zero() and all(not any(ss.apply(s)) for s in mid_samples))
            rep.add(f"S[{p},{q}] lands in Lambda^{p + 1}", s_mid.lands_in_target())
    return rep
