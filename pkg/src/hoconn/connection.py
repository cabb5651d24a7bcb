"""Higher order connections, their curvature and the induced jet connection.

A k-th order connection is stored through coefficient tensors ``Gamma_j``
(j = 0..k-1) with k symmetric lower and j symmetric upper indices:

    (nabla^(k) s)_{b..e} = d_b..d_e s + sum_j Gamma_{j; b..e}^{F} d_F s,

with the contraction running over all ordered upper tuples ``F``. Symmetric
index groups are keyed by exponent vectors (multi-indices); an ordered tuple
with content ``mu`` occurs ``multinomial(mu)`` times in the contraction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .bundles import Bundle, EBundle, JetBundle, TensorBundle
from .exactalg.poly import Exponent, Poly, exponent_of, homogeneous_exponents, indices_of, multinomial
from .exterior import d_unit, exterior_op, form_bundle, form_comp
from .jets import (FormValuedJet, JetSection, inclusion_op, iota_op, jet_op, projection_op, random_poly,
                   spencer_op, sym_form_bundle)
from .operators import LinearDiffOp, OrderError
from .symmetry import Sym, Theta

__all__ = [
    "ConnectionData", "JetConnection", "RoundTripReport", "apply_higher", "apply_higher_op", "coupled_op",
    "connection_from_jet", "curvature", "induced_operator", "jet_connection", "jet_curvature",
    "roundtrip_check", "splitting_h", "splitting_op", "top_slot_op",
]

Matrix = Tuple[Tuple[Poly, ...], ...]


def _mat(n: int, m) -> Matrix:
    return tuple(tuple(v if isinstance(v, Poly) else Poly.const(n, v) for v in row) for row in m)


def _is_zero_mat(m: Matrix) -> bool:
    return not any(v for row in m for v in row)


@dataclass(frozen=True)
class ConnectionData:
    """Coefficients of a k-th order connection on the trivial rank-r bundle over R^n.

    ``gammas[j]`` maps ``(lower multi-index of size k, upper multi-index of
    size j)`` to an r x r matrix of polynomials; absent keys are zero.
    """

    n: int
    k: int
    r: int
    gammas: Tuple[Dict[Tuple[Exponent, Exponent], Matrix], ...]
    load_notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.gammas) != self.k:
            raise ValueError(f"expected {self.k} coefficient tensors, got {len(self.gammas)}")
        for j, g in enumerate(self.gammas):
            for (lam, mu), m in g.items():
                if len(lam) != self.n or sum(lam) != self.k or len(mu) != self.n or sum(mu) != j:
                    raise ValueError(f"bad index content {lam}/{mu} for Gamma_{j}")
                if len(m) != self.r or any(len(row) != self.r for row in m):
                    raise ValueError("coefficient matrices must be r x r")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def flat(cls, n: int, k: int, r: int = 1) -> "ConnectionData":
        return cls(n, k, r, tuple({} for _ in range(k)))

    @classmethod
    def from_canonical(cls, n: int, k: int, r: int,
                       entries: Mapping[Tuple[int, Sequence[int], Sequence[int]], object]) -> "ConnectionData":
        """``{(j, lower indices, upper indices): matrix}`` with 0-based indices.

        Every ordering of an index group names the same coefficient, so the
        value is taken as the symmetric coefficient itself.
        """
        gam: List[Dict] = [{} for _ in range(k)]
        for (j, lower, upper), m in entries.items():
            key = (exponent_of(lower, n), exponent_of(upper, n))
            mat = _mat(n, m if r > 1 or isinstance(m, (list, tuple)) else [[m]])
            if not _is_zero_mat(mat):
                gam[j][key] = mat
        return cls(n, k, r, tuple(gam))

    @classmethod
    def from_full_entries(cls, n: int, k: int, r: int,
                          entries: Sequence[Tuple[int, Sequence[int], Sequence[int], object]]) -> "ConnectionData":
        """Symmetrize componentwise data given on ordered index tuples.

        The coefficient for a content pair is the average over all ordered
        tuples with that content (missing tuples count as zero); a note is
        recorded whenever this discards a non-symmetric part.
        """
        sums: List[Dict] = [{} for _ in range(k)]
        seen: List[Dict] = [{} for _ in range(k)]
        for j, lower, upper, m in entries:
            lower, upper = tuple(lower), tuple(upper)
            if len(lower) != k or len(upper) != j or not 0 <= j < k:
                raise ValueError(f"Gamma_{j} needs {k} lower and {j} upper indices")
            if any(not 0 <= a < n for a in lower + upper):
                raise IndexError(f"index out of range in {lower}/{upper}")
            mat = _mat(n, m)
            key = (exponent_of(lower, n), exponent_of(upper, n))
            old = sums[j].get(key)
            sums[j][key] = mat if old is None else tuple(
                tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(old, mat))
            seen[j].setdefault(key, {})[(lower, upper)] = mat
        gam: List[Dict] = [{} for _ in range(k)]
        notes = []
        for j in range(k):
            for key, total in sums[j].items():
                count = multinomial(key[0]) * multinomial(key[1])
                avg = tuple(tuple(v.scale(Fraction(1, count)) for v in row) for row in total)
                vals = list(seen[j][key].values())
                if len(seen[j][key]) != count or any(v != vals[0] for v in vals):
                    lo = ",".join(str(a + 1) for a in indices_of(key[0]))
                    up = ",".join(str(a + 1) for a in indices_of(key[1]))
                    notes.append(f"Gamma_{j}[{lo}|{up}]: non-symmetric input, kept the symmetric part")
                if not _is_zero_mat(avg):
                    gam[j][key] = avg
        return cls(n, k, r, tuple(gam), tuple(notes))

    @classmethod
    def random(cls, rng: random.Random, n: int, k: int, r: int = 1, deg: int = 2,
               density: float = 0.5) -> "ConnectionData":
        gam: List[Dict] = []
        for j in range(k):
            g = {}
            for lam in homogeneous_exponents(n, k):
                for mu in homogeneous_exponents(n, j):
                    if rng.random() < density:
                        m = tuple(tuple(random_poly(rng, n, deg, density=0.4, span=3) for _ in range(r))
                                  for _ in range(r))
                        if not _is_zero_mat(m):
                            g[(lam, mu)] = m
            gam.append(g)
        return cls(n, k, r, tuple(gam))

    # -- queries ----------------------------------------------------------------

    @property
    def is_flat_model(self) -> bool:
        """All coefficients vanish (the operator d^(k))."""
        return not any(self.gammas)

    def gamma(self, j: int, lam: Exponent, mu: Exponent) -> Optional[Matrix]:
        return self.gammas[j].get((tuple(lam), tuple(mu)))

    @cached_property
    def max_degree(self) -> int:
        return max((v.degree() for g in self.gammas for m in g.values() for row in m for v in row), default=0)

    def terms(self, lam: Exponent):
        """``(mu, multinomial(mu) * Gamma_j[lam][mu])`` over all nonzero coefficients with lower content lam."""
        for j, g in enumerate(self.gammas):
            for mu in homogeneous_exponents(self.n, j):
                m = g.get((lam, mu))
                if m is not None:
                    c = multinomial(mu)
                    yield mu, (m if c == 1 else tuple(tuple(v.scale(c) for v in row) for row in m))


# ---------------------------------------------------------------------------
# nabla^(k), the induced operator and the curvature


def apply_higher_op(c: ConnectionData) -> LinearDiffOp:
    """nabla^(k) : E -> Sym^k (x) E."""
    n, k, r = c.n, c.k, c.r
    src, tgt = EBundle(n, r), sym_form_bundle(n, 0, k, r)
    terms = []
    for t in tgt.index_tuples:
        lam = exponent_of(t, n)
        for f in range(r):
            terms.append((tgt.comp(t, f), f, lam, 1))
        for mu, m in c.terms(lam):
            for f in range(r):
                for g in range(r):
                    if m[f][g]:
                        terms.append((tgt.comp(t, f), g, mu, m[f][g]))
    return LinearDiffOp.from_terms(src, tgt, terms, f"nabla^({k})")


def apply_higher(c: ConnectionData, s) -> "TensorField":
    from .tensor import TensorField
    sec = (s,) if isinstance(s, Poly) else tuple(s)
    if len(sec) != c.r or any(p.n != c.n for p in sec):
        raise ValueError("section does not match the connection's dimension or fiber rank")
    op = apply_higher_op(c)
    return TensorField(op.target, op.apply(sec))


def induced_operator(c: ConnectionData) -> LinearDiffOp:
    """w_{b C} -> d_[a w_b]C + Gamma_{k-1; C[a}^F w_b]F  :  Sym^k (x) E -> Theta^{2,k-1} (x) E."""
    n, k, r = c.n, c.k, c.r
    src = sym_form_bundle(n, 0, k, r)
    tgt = TensorBundle(n, Theta(2, k - 1), EBundle(n, r))
    zero = (0,) * n
    half = Fraction(1, 2)
    top = c.gammas[k - 1]
    uppers = list(product(range(n), repeat=k - 1))
    terms = []
    for a, b in product(range(n), repeat=2):
        if a == b:
            continue
        for rest in uppers:
            for f in range(r):
                out = tgt.comp((a, b) + rest, f)
                terms.append((out, src.comp((b,) + rest, f), d_unit(n, a), half))
                terms.append((out, src.comp((a,) + rest, f), d_unit(n, b), -half))
            for x, y, sign in ((a, b, half), (b, a, -half)):
                lam = exponent_of(rest + (x,), n)
                for F in uppers:
                    m = top.get((lam, exponent_of(F, n)))
                    if m is None:
                        continue
                    for f in range(r):
                        for g in range(r):
                            if m[f][g]:
                                terms.append((tgt.comp((a, b) + rest, f), src.comp((y,) + F, g), zero,
                                              m[f][g].scale(sign)))
    return LinearDiffOp.from_terms(src, tgt, terms, "nabla_induced")


def curvature(c: ConnectionData) -> LinearDiffOp:
    """nabla o nabla^(k) : E -> Theta^{2,k-1} (x) E, checked to have order <= k-1."""
    op = induced_operator(c) @ apply_higher_op(c)
    op.name = "curvature"
    if op.max_order_on_source() > c.k - 1:
        raise OrderError(f"curvature kept derivatives of order {op.max_order_on_source()} > {c.k - 1}")
    return op


# ---------------------------------------------------------------------------
# the splitting h and the jet connection


def splitting_op(c: ConnectionData) -> LinearDiffOp:
    """h : J^{k-1}E -> J^k E with top slots -sum_j Gamma_j u_(j)."""
    n, k, r = c.n, c.k, c.r
    src, tgt = JetBundle(n, k - 1, r), JetBundle(n, k, r)
    zero = (0,) * n
    terms = [(tgt.slot(beta, f), src.slot(beta, f), zero, 1) for beta in src.multi_indices for f in range(r)]
    for lam in homogeneous_exponents(n, k):
        for mu, m in c.terms(lam):
            for f in range(r):
                for g in range(r):
                    if m[f][g]:
                        terms.append((tgt.slot(lam, f), src.slot(mu, g), zero, -m[f][g]))
    return LinearDiffOp.from_terms(src, tgt, terms, "h")


def splitting_h(c: ConnectionData, u: JetSection) -> JetSection:
    op = splitting_op(c)
    if u.bundle != op.source:
        raise ValueError("jet does not match the connection (order k-1, fiber rank r)")
    return JetSection(op.target, op.apply(u.values))


@dataclass(frozen=True)
class JetConnection:
    """A connection ``nabla = d + C`` on J^{k-1}E as an operator J^{k-1}E -> Lambda^1 (x) J^{k-1}E."""

    op: LinearDiffOp
    base: Optional[ConnectionData] = None

    @property
    def bundle(self) -> Bundle:
        return self.op.source

    def symbol_is_identity(self) -> bool:
        b = self.op.source
        n = b.n
        sym = self.op.part(1)
        want = LinearDiffOp.from_terms(b, self.op.target, [
            (self.op.target.comp((a,), i), i, d_unit(n, a), 1) for a in range(n) for i in range(b.dim)])
        return sym.equals(want)

    def homomorphism_part(self) -> Dict[int, Dict[int, Dict[int, Poly]]]:
        """``C[a][i][j]``: the order-zero coefficients split by form index."""
        b, t = self.op.source, self.op.target
        out: Dict[int, Dict[int, Dict[int, Poly]]] = {}
        for i, row in self.op.coefficient((0,) * b.n).items():
            (a,), fl = t.labels[i]
            out.setdefault(a, {})[b.index_of[fl]] = dict(row)
        return out

    def __call__(self, u: JetSection) -> FormValuedJet:
        return FormValuedJet(1, self.op.target, self.op.apply(u.values))


def jet_connection(c: ConnectionData) -> JetConnection:
    op = spencer_op(c.n, c.k, c.r) @ splitting_op(c)
    op.name = "nabla_J"
    return JetConnection(op, c)


def coupled_op(nab: JetConnection | LinearDiffOp, p: int) -> LinearDiffOp:
    """The coupled exterior derivative ``Lambda^p (x) F -> Lambda^{p+1} (x) F`` of a connection on F.

    ``(nabla w)_{aI} = Alt_{aI}(d_a w_I + C_a w_I)``, equivalently
    ``nabla(w (x) s) = dw (x) s + (-1)^p w ^ nabla s``.
    """
    if isinstance(nab, LinearDiffOp):
        nab = JetConnection(nab)
    fiber = nab.op.source
    n = fiber.n
    if not nab.symbol_is_identity():
        raise ValueError("operator is not a connection (symbol is not the identity)")
    C = nab.homomorphism_part()
    zero = (0,) * n

    def kernel(a, _I, ti):
        yield ti, d_unit(n, a), 1
        row = C.get(a, {}).get(ti, {})
        for j, v in row.items():
            yield j, zero, v
    return exterior_op(n, p, fiber, fiber, kernel, f"nabla[{p}]")


def top_slot_op(n: int, p: int, q: int, r: int, sym=None) -> LinearDiffOp:
    """Read the order-q slots of Lambda^p (x) J^q E as a tensor in Lambda^p (x) Sym^q (x) E (or ``sym``)."""
    jb = JetBundle(n, q, r)
    src = form_bundle(n, p, jb)
    if sym is None:
        tgt = sym_form_bundle(n, p, q, r)
    else:
        tgt = TensorBundle(n, sym, EBundle(n, r))
    zero = (0,) * n
    terms = []
    for idx in product(range(n), repeat=p):
        for T in product(range(n), repeat=q):
            beta = exponent_of(T, n)
            for f in range(r):
                terms.append((tgt.comp(idx + T, f), form_comp(src, p, idx, jb.slot(beta, f)), zero, 1))
    return LinearDiffOp.from_terms(src, tgt, terms, f"top[{p},{q}]")


@dataclass
class JetCurvature:
    kappa: LinearDiffOp           # J^{k-1}E -> Lambda^2 (x) J^{k-1}E
    kappa_theta: LinearDiffOp     # J^{k-1}E -> Theta^{2,k-1} (x) E
    is_homomorphism: bool
    only_top_slots: bool
    lands_in_theta: bool


def jet_curvature(c: ConnectionData | JetConnection) -> JetCurvature:
    """kappa = nabla o nabla on J^{k-1}E and its Theta^{2,k-1}-valued top part."""
    jc = c if isinstance(c, JetConnection) else jet_connection(c)
    fiber: JetBundle = jc.op.source
    n, q, r = fiber.n, fiber.order, fiber.r
    kappa = coupled_op(jc, 1) @ jc.op
    kappa.name = "kappa"
    homog = kappa.max_order_on_source() <= 0
    top_only = True if q == 0 else (projection_op(n, q, r, 2) @ kappa).is_zero() if n >= 2 else True
    if n < 2:
        kt = LinearDiffOp.zero(fiber, TensorBundle(n, Theta(2, q), EBundle(n, r)))
        return JetCurvature(kappa, kt, homog, top_only, True)
    kt = top_slot_op(n, 2, q, r, Theta(2, q)) @ kappa
    kt.name = "kappa_theta"
    return JetCurvature(kappa, kt, homog, top_only, kt.lands_in_target())


# ---------------------------------------------------------------------------
# the correspondence of connections


def connection_from_jet(jc: JetConnection, k: int) -> Tuple[Optional[ConnectionData], List[str]]:
    """Recover Gamma_j from a connection on J^{k-1}E satisfying the two properties.

    Top rows of ``nabla`` read ``d_a u_beta + sum_mu M_{a beta}^mu u_mu``; the
    coefficient ``Gamma_j[beta + e_a][mu] = M_{a beta}^mu / multinomial(mu)``
    is well defined only if M depends on ``beta + e_a`` alone.
    """
    fiber: JetBundle = jc.op.source
    n, r = fiber.n, fiber.r
    problems: List[str] = []
    C = jc.homomorphism_part()
    gam: List[Dict] = [{} for _ in range(k)]
    filled: Dict[Tuple, Matrix] = {}
    for a in range(n):
        for beta in homogeneous_exponents(n, k - 1):
            lam = tuple(b + (i == a) for i, b in enumerate(beta))
            for mu in fiber.multi_indices:
                m = []
                for f in range(r):
                    row = C.get(a, {}).get(fiber.slot(beta, f), {})
                    m.append(tuple(row.get(fiber.slot(mu, g), Poly.zero(n)).scale(Fraction(1, multinomial(mu)))
                                   for g in range(r)))
                m = tuple(m)
                key = (lam, mu)
                if key in filled and filled[key] != m:
                    problems.append(f"coefficient for lower content {lam}, upper {mu} depends on the split index")
                filled[key] = m
                if not _is_zero_mat(m):
                    gam[sum(mu)][key] = m
    return ConnectionData(n, k, r, tuple(gam)), problems


@dataclass
class RoundTripReport:
    checks: List[Tuple[str, bool]] = field(default_factory=list)

    def add(self, name: str, ok: bool) -> None:
        self.checks.append((name, bool(ok)))

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.checks)

    @property
    def failures(self) -> List[str]:
        return [name for name, v in self.checks if not v]


def _embed_higher(c: ConnectionData) -> LinearDiffOp:
    """nabla^(k) viewed in Lambda^1 (x) J^{k-1}E via iota and the top-slot inclusion."""
    return inclusion_op(c.n, 1, c.k - 1, c.r) @ iota_op(c.n, c.k, c.r) @ apply_higher_op(c)


def check_jet_connection(jc: JetConnection, k: int, rep: RoundTripReport, tag: str = "") -> None:
    """The two characterizing properties of the connection induced on J^{k-1}E."""
    fiber: JetBundle = jc.op.source
    n, r = fiber.n, fiber.r
    rep.add(f"{tag}identity symbol", jc.symbol_is_identity())
    if k >= 2:
        rep.add(f"{tag}property 1: (Id x pi) o nabla = S",
                (projection_op(n, k - 1, r, 1) @ jc.op).equals(spencer_op(n, k - 1, r)))
    if n >= 2:
        jcurv = jet_curvature(jc)
        rep.add(f"{tag}property 2: kappa is a homomorphism into Lambda^2 (x) Sym^(k-1)",
                jcurv.is_homomorphism and jcurv.only_top_slots)
        rep.add(f"{tag}kappa takes values in Theta^(2,k-1)", jcurv.lands_in_theta)


def roundtrip_check(c: ConnectionData, reverse: Optional[JetConnection] = None) -> RoundTripReport:
    """Forward: nabla^(k) -> h -> S o h -> (S o h) o j^{k-1} reproduces nabla^(k).

    Reverse: the connection on J^{k-1}E (``reverse`` or the one built from
    ``c``) -> Gamma -> S o h gives back the same jet connection.
    """
    rep = RoundTripReport()
    n, k, r = c.n, c.k, c.r
    h = splitting_op(c)
    rep.add("pi o h = Id", (projection_op(n, k, r) @ h).equals(LinearDiffOp.identity(h.source)))
    jc = jet_connection(c)
    check_jet_connection(jc, k, rep)
    rep.add("nabla o j^(k-1) = nabla^(k)", (jc.op @ jet_op(n, k - 1, r)).equals(_embed_higher(c)))
    if n >= 2:
        jcurv = jet_curvature(jc)
        rep.add("kappa o j^(k-1) = curvature", (jcurv.kappa_theta @ jet_op(n, k - 1, r)).equals(curvature(c)))

    target = reverse if reverse is not None else jc
    tag = "reverse: " if reverse is not None else ""
    if reverse is not None:
        check_jet_connection(reverse, k, rep, tag)
    c2, problems = connection_from_jet(target, k)
    rep.add(f"{tag}Gamma well defined from the jet connection", not problems)
    if not problems:
        rep.add(f"{tag}S o h(Gamma) reproduces the jet connection", jet_connection(c2).op.equals(target.op))
        if reverse is None:
            rep.add("Gamma -> jet connection -> Gamma is the identity", c2.gammas == c.gammas)
    return rep
