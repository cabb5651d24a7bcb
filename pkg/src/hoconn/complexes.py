"""Differential complexes: tractor connections, BGG sequences and elasticity.

Bundles of the form ``Lambda^p (x) (Lambda^q (x) E)`` are numbered exactly as
the flat tensor bundle of rank p+q, so operators can be moved between the two
descriptions with :func:`relabel` without touching coefficients.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .bundles import Bundle, EBundle, JetBundle, SumBundle, TensorBundle
from .connection import (ConnectionData, JetConnection, apply_higher_op, coupled_op, jet_connection,
                         top_slot_op)
from .exactalg import linalg
from .exactalg.poly import Poly
from .exactalg.slices import slice_dims, slice_homology, weighted_order
from .exterior import d_unit, exterior_op, fiberwise, form_bundle
from .jets import inclusion_op, jet_op, random_poly
from .operators import LinearDiffOp
from .symmetry import Full, Lambda, LambdaLambda, Sym, Theta, Xi
from .tensor import epsilon, projector_op

__all__ = [
    "CHASE_SCALE", "ComplexSpec", "ExactnessReport", "KillingTypeOperator", "TractorSection2", "TractorSection5",
    "broken_complex", "build_bgg_flat", "build_full_coupled_bgg", "chase_obstruction", "chase_parts",
    "de_rham_complex", "elasticity_complex", "epsilon_conjugate", "epsilon_lift", "exactness_check",
    "flat_bgg_op", "killing_flat", "load_conjugate", "random_shift", "relabel", "saint_venant_flat", "splitting_independent",
    "second_operator_chase", "splitting_shift", "third_operator_flat", "tractor2_bundle", "tractor2_connection",
    "tractor2_coupled", "tractor5_bundle", "tractor5_connection", "tractor5_curvature",
]

# The chase output is scaled so that the flat case is exactly the Saint Venant operator.
CHASE_SCALE = Fraction(2)


def relabel(op: LinearDiffOp, source: Bundle | None = None, target: Bundle | None = None,
            name: str | None = None) -> LinearDiffOp:
    """The same coefficient map between bundles with identical component numbering."""
    src = source or op.source
    tgt = target or op.target
    if src.dim != op.source.dim or tgt.dim != op.target.dim:
        raise ValueError("relabel needs bundles of the same dimension")
    return LinearDiffOp(src, tgt, op.coeffs, op.name if name is None else name)


def _assemble(source: Bundle, target: Bundle,
              blocks: Iterable[Tuple[LinearDiffOp, int, int]], name: str) -> LinearDiffOp:
    """Sum of operators placed at ``(source offset, target offset)`` in a bigger operator."""
    terms = []
    for op, so, to in blocks:
        for alpha, mat in op.coeffs.items():
            for i, row in mat.items():
                for j, v in row.items():
                    terms.append((to + i, so + j, alpha, v))
    return LinearDiffOp.from_terms(source, target, terms, name)


def _index_map(src: TensorBundle, tgt: TensorBundle, rule, name: str) -> LinearDiffOp:
    """Homomorphism ``out_t = sum c * in_s`` with ``rule(t) -> [(s, c)]`` on index tuples."""
    zero = (0,) * src.n
    r = tgt.fiber.dim
    terms = []
    for t in tgt.index_tuples:
        for s, c in rule(t):
            for f in range(r):
                terms.append((tgt.comp(t, f), src.comp(s, f), zero, c))
    return LinearDiffOp.from_terms(src, tgt, terms, name)


def _tb(n: int, sym, r: int = 1) -> TensorBundle:
    return TensorBundle(n, sym, EBundle(n, r))


# ---------------------------------------------------------------------------
# complexes and exactness


@dataclass(frozen=True)
class ComplexSpec:
    ops: Tuple[LinearDiffOp, ...]
    name: str = ""

    def __post_init__(self):
        for a, b in zip(self.ops, self.ops[1:]):
            if a.target != b.source:
                raise ValueError(f"{a.name} -> {a.target} does not feed {b.name} <- {b.source}")

    @property
    def bundles(self) -> List[Bundle]:
        return [self.ops[0].source] + [op.target for op in self.ops]

    def compositions(self) -> List[LinearDiffOp]:
        return [b @ a for a, b in zip(self.ops, self.ops[1:])]

    def compositions_zero(self) -> List[bool]:
        return [c.is_zero() for c in self.compositions()]


@dataclass
class ExactnessReport:
    name: str
    rows: List[dict] = field(default_factory=list)
    composable_zero: List[bool] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.composable_zero) and all(r["homology"] == 0 for r in self.rows)

    def homology_at(self, spot: int) -> Dict[int, int]:
        return {r["degree"]: r["homology"] for r in self.rows if r["spot"] == spot}


def exactness_check(cs: ComplexSpec, d_max: int, spots: Sequence[int] | None = None,
                    backend: str | None = None) -> ExactnessReport:
    """Homology at interior spots on homogeneous slices of weighted degree ``d <= d_max``.

    Spot ``i`` is the bundle between ``ops[i-1]`` and ``ops[i]``. The image
    of ``ops[i-1]`` in degree ``d`` comes from its source slice in degree
    ``d + order``, so no boundary terms of a filtered space enter the count.
    """
    rep = ExactnessReport(cs.name, composable_zero=cs.compositions_zero())
    interior = range(1, len(cs.ops)) if spots is None else spots
    for i in interior:
        prev, nxt = cs.ops[i - 1], cs.ops[i]
        for d in range(d_max + 1):
            ker, im, hom = slice_homology(prev, nxt, d, backend)
            rep.rows.append({"spot": i, "bundle": nxt.source.name, "degree": d,
                             "kernel": ker, "image": im, "homology": hom})
    return rep


def de_rham_complex(n: int, r: int = 1) -> ComplexSpec:
    e = EBundle(n, r)
    zero = (0,) * n

    def kernel(a, _I, ti):
        return ((ti, d_unit(n, a), 1),)
    return ComplexSpec(tuple(exterior_op(n, p, e, e, kernel, f"d{p}") for p in range(n)), "de Rham")


def broken_complex(cs: ComplexSpec, index: int, drop: int = 1) -> ComplexSpec:
    """Negative control: zero out the coefficient rows of ``drop`` target components of one operator."""
    ops = list(cs.ops)
    op = ops[index]
    rows = op.target.coord_rows[:drop]
    coeffs = {a: {i: row for i, row in m.items() if i not in rows} for a, m in op.coeffs.items()}
    ops[index] = LinearDiffOp(op.source, op.target, coeffs, op.name + "(broken)")
    return ComplexSpec(tuple(ops), cs.name + " (broken)")


# ---------------------------------------------------------------------------
# flat tractor connection on T = Lambda^0 + Lambda^1


@dataclass(frozen=True)
class TractorSection2:
    f: Poly
    mu: Tuple[Poly, ...]

    def values(self) -> Tuple[Poly, ...]:
        return (self.f,) + tuple(self.mu)


def tractor2_bundle(n: int) -> SumBundle:
    return SumBundle([EBundle(n, 1), _tb(n, Lambda(1))], "T")


def tractor2_connection(n: int) -> LinearDiffOp:
    """nabla_a [f; mu_b] = [d_a f - mu_a; d_a mu_b]."""
    T = tractor2_bundle(n)
    tgt = form_bundle(n, 1, T)
    zero = (0,) * n
    terms = []
    for a in range(n):
        terms.append((tgt.comp((a,), 0), 0, d_unit(n, a), 1))
        terms.append((tgt.comp((a,), 0), 1 + a, zero, -1))
        for b in range(n):
            terms.append((tgt.comp((a,), 1 + b), 1 + b, d_unit(n, a), 1))
    return LinearDiffOp.from_terms(T, tgt, terms, "nabla_T")


def tractor2_coupled(n: int) -> ComplexSpec:
    """Lambda^0 (x) T -> Lambda^1 (x) T -> ... -> Lambda^n (x) T."""
    nab = tractor2_connection(n)
    return ComplexSpec(tuple([nab] + [coupled_op(nab, p) for p in range(1, n)]), "coupled de Rham on T")


# ---------------------------------------------------------------------------
# flat BGG sequences


def _theta(n: int, p: int, q: int, r: int = 1) -> TensorBundle:
    return _tb(n, Theta(p, q), r)


def flat_bgg_op(n: int, p: int, k: int, r: int = 1, project: bool = True) -> LinearDiffOp:
    """Theta^{p,k-1} -> Theta^{p+1,k-1}: w -> P(d_[a w_{b..c]d..e})."""
    src, tgt = _theta(n, p, k - 1, r), _theta(n, p + 1, k - 1, r)
    terms = []
    for s in permutations(range(n), p + 1):
        for rest in product(range(n), repeat=k - 1):
            for i in range(p + 1):
                c = Fraction(-1 if i % 2 else 1, p + 1)
                for f in range(r):
                    terms.append((tgt.comp(s + rest, f), src.comp(s[:i] + s[i + 1:] + rest, f), d_unit(n, s[i]), c))
    op = LinearDiffOp.from_terms(src, tgt, terms, f"D{p}")
    if project:
        op = projector_op(tgt) @ op
        op.name = f"D{p}"
    return op


def build_bgg_flat(n: int, k: int, r: int = 1) -> ComplexSpec:
    """Lambda^0 -> Theta^{1,k-1} -> Theta^{2,k-1} -> ... -> Theta^{n,k-1}."""
    if k < 1 or n < 2:
        raise ValueError("need k >= 1 and n >= 2")
    d_k = relabel(apply_higher_op(ConnectionData.flat(n, k, r)), target=_theta(n, 1, k - 1, r), name=f"d^({k})")
    ops = [d_k] + [flat_bgg_op(n, p, k, r) for p in range(1, n)]
    return ComplexSpec(tuple(ops), f"BGG(n={n}, k={k})")


def build_full_coupled_bgg(c: ConnectionData) -> ComplexSpec:
    """E -> Theta^{1,k-1} (x) E -> ... -> Theta^{n,k-1} (x) E from the jet connection.

    Operator p includes Theta^{p,k-1} (x) E into the top slots of
    Lambda^p (x) J^{k-1}E, applies the coupled jet connection and reads off
    the top slots; operator 0 starts from j^{k-1}.
    """
    n, k, r = c.n, c.k, c.r
    jc = jet_connection(c)
    q = k - 1
    ops = []
    for p in range(n):
        nab = jc.op if p == 0 else coupled_op(jc, p)
        read = top_slot_op(n, p + 1, q, r, Theta(p + 1, q))
        if p == 0:
            op = read @ nab @ jet_op(n, q, r)
        else:
            incl = relabel(inclusion_op(n, p, q, r), source=_theta(n, p, q, r))
            op = read @ nab @ incl
        op.name = f"B{p}"
        ops.append(op)
    return ComplexSpec(tuple(ops), f"coupled BGG(n={n}, k={k}, r={r})")


# ---------------------------------------------------------------------------
# flat Killing and Saint Venant operators


def _sym2_of_full(n: int, r: int = 1) -> LinearDiffOp:
    half = Fraction(1, 2)
    return _index_map(_tb(n, Full(2), r), _tb(n, Sym(2), r),
                      lambda t: ((t, half), ((t[1], t[0]), half)), "sym")


def killing_flat(n: int, r: int = 1) -> LinearDiffOp:
    """phi_a -> d_(a phi_b)."""
    src, tgt = _tb(n, Lambda(1), r), _tb(n, Sym(2), r)
    half = Fraction(1, 2)
    terms = []
    for a, b in product(range(n), repeat=2):
        for f in range(r):
            terms.append((tgt.comp((a, b), f), src.comp((b,), f), d_unit(n, a), half))
            terms.append((tgt.comp((a, b), f), src.comp((a,), f), d_unit(n, b), half))
    return LinearDiffOp.from_terms(src, tgt, terms, "Killing")


def saint_venant_flat(n: int, r: int = 1) -> LinearDiffOp:
    """h_ab -> d_a d_c h_bd - d_b d_c h_ad - d_a d_d h_bc + d_b d_d h_ac, into Xi^{2,2}."""
    src, tgt = _tb(n, Sym(2), r), _tb(n, Xi(2, 2), r)

    def dd(x, y):
        return tuple(int(i == x) + int(i == y) for i in range(n))
    terms = []
    for a, b, c, d in product(range(n), repeat=4):
        for f in range(r):
            out = tgt.comp((a, b, c, d), f)
            terms.append((out, src.comp((b, d), f), dd(a, c), 1))
            terms.append((out, src.comp((a, d), f), dd(b, c), -1))
            terms.append((out, src.comp((b, c), f), dd(a, d), -1))
            terms.append((out, src.comp((a, c), f), dd(b, d), 1))
    return LinearDiffOp.from_terms(src, tgt, terms, "SaintVenant")


# ---------------------------------------------------------------------------
# Killing-type operators and the tractor connection on T = Lambda^1 E + Lambda^2 E


@dataclass(frozen=True)
class TractorSection5:
    phi: Tuple[Poly, ...]
    mu: Tuple[Poly, ...]

    def values(self) -> Tuple[Poly, ...]:
        return tuple(self.phi) + tuple(self.mu)


def _F(n: int, r: int) -> TensorBundle:
    return _tb(n, Lambda(1), r)


def _G(n: int, r: int) -> TensorBundle:
    return _tb(n, Lambda(2), r)


def tractor5_bundle(n: int, r: int = 1) -> SumBundle:
    return SumBundle([_F(n, r), _G(n, r)], "T")


class KillingTypeOperator:
    """A connection ``nabla_a = d_a + A_a`` on Lambda^1 (x) E and the operator D = sym o nabla."""

    def __init__(self, nabla: LinearDiffOp):
        F = nabla.source
        if not isinstance(F, TensorBundle) or F.sym != Lambda(1):
            raise ValueError("a Killing-type connection acts on Lambda^1 (x) E")
        self.n, self.r = F.n, F.fiber.dim
        if nabla.target != form_bundle(self.n, 1, F):
            raise ValueError("connection must map into Lambda^1 (x) Lambda^1 (x) E")
        if not JetConnection(nabla).symbol_is_identity():
            raise ValueError("operator does not have identity symbol")
        self.nabla = nabla

    @classmethod
    def flat(cls, n: int, r: int = 1) -> "KillingTypeOperator":
        F = _F(n, r)
        tgt = form_bundle(n, 1, F)
        terms = [(tgt.comp((a,), i), i, d_unit(n, a), 1) for a in range(n) for i in range(F.dim)]
        return cls(LinearDiffOp.from_terms(F, tgt, terms, "d"))

    @classmethod
    def from_potential(cls, n: int, r: int, A: Dict[int, Dict[int, Dict[int, object]]]) -> "KillingTypeOperator":
        """``A[a][i][j]``: coefficient of ``phi_j`` in ``(nabla_a phi)_i`` (ambient F components)."""
        base = cls.flat(n, r).nabla
        tgt = base.target
        zero = (0,) * n
        terms = [(tgt.comp((a,), i), j, zero, v) for a, rows in A.items() for i, row in rows.items()
                 for j, v in row.items()]
        return cls(base + LinearDiffOp.from_terms(base.source, tgt, terms))

    @classmethod
    def random(cls, rng: random.Random, n: int, r: int = 1, deg: int = 1, density: float = 0.4) -> "KillingTypeOperator":
        dim = n * r
        A = {a: {i: {j: random_poly(rng, n, deg, density=0.5, span=3) for j in range(dim) if rng.random() < density}
                 for i in range(dim)} for a in range(n)}
        return cls.from_potential(n, r, A)

    @property
    def F(self) -> TensorBundle:
        return self.nabla.source

    @cached_property
    def kappa(self) -> LinearDiffOp:
        """Curvature Lambda^1 (x) E -> Lambda^2 (x) Lambda^1 (x) E (a homomorphism)."""
        k = coupled_op(self.nabla, 1) @ self.nabla
        k.name = "kappa"
        return k

    @cached_property
    def D(self) -> LinearDiffOp:
        """phi -> nabla_(a phi_b)."""
        n, r = self.n, self.r
        op = _sym2_of_full(n, r) @ relabel(self.nabla, target=_tb(n, Full(2), r))
        op.name = "D"
        return op

    def shifted(self, B: LinearDiffOp) -> "KillingTypeOperator":
        """nabla'_a phi_b = nabla_a phi_b + (B phi)_ab for a homomorphism B into Lambda^2 (x) E."""
        if B.source != self.F or B.target != _G(self.n, self.r):
            raise ValueError("B must map Lambda^1 (x) E to Lambda^2 (x) E")
        return KillingTypeOperator(self.nabla + relabel(B, target=self.nabla.target))


def _perm3(n: int, r: int, signs: Sequence[Tuple[Tuple[int, int, int], int]]) -> LinearDiffOp:
    """out_{abc} = sum sign * in_{abc permuted} on Full(3) (x) E."""
    b3 = _tb(n, Full(3), r)
    return _index_map(b3, b3, lambda t: [((t[p[0]], t[p[1]], t[p[2]]), s) for p, s in signs], "perm")


def tractor5_connection(kt: KillingTypeOperator) -> LinearDiffOp:
    """nabla_a [phi_b; mu_bc] = [nabla_a phi_b - mu_ab;
    nabla_[a mu_b]c - kappa_abc^d phi_d - nabla_[a mu_c]b + kappa_acb^d phi_d - nabla_[b mu_c]a + kappa_bca^d phi_d].

    ``nabla_[a mu_b]c`` is the coupled derivative of mu viewed as a 1-form
    (index b) with values in Lambda^1 (x) E (index c).
    """
    n, r = kt.n, kt.r
    F, G = kt.F, _G(n, r)
    T = tractor5_bundle(n, r)
    tgt = form_bundle(n, 1, T)
    full2, full3 = _tb(n, Full(2), r), _tb(n, Full(3), r)
    lam1F = form_bundle(n, 1, F)

    # first slot: nabla_a phi_b - mu_ab, both read as Full(2) (x) E
    nab2 = relabel(kt.nabla, target=full2)
    minus_mu = LinearDiffOp.homomorphism(G, full2, {i: {i: -1} for i in range(G.dim)})
    # second slot: P(d^nabla mu - kappa phi) with P(Y)_abc = Y_abc - Y_acb - Y_bca
    dmu = relabel(coupled_op(kt.nabla, 1), source=lam1F, target=full3) @ relabel(
        LinearDiffOp.identity(G), target=lam1F)
    kap = relabel(kt.kappa, target=full3)
    P = _perm3(n, r, (((0, 1, 2), 1), ((0, 2, 1), -1), ((1, 2, 0), -1)))
    second_mu = P @ dmu
    second_phi = -(P @ kap)

    # place blocks: target comp ((a,), T-index) numbered a * T.dim + T-index
    def placed(op: LinearDiffOp, src_off: int, part: int) -> List[Tuple[int, int, Tuple, Poly]]:
        off = T.offsets[part]
        pdim = T.parts[part].dim
        out = []
        for alpha, mat in op.coeffs.items():
            for i, row in mat.items():
                a, rest = divmod(i, pdim)
                for j, v in row.items():
                    out.append((a * T.dim + off + rest, src_off + j, alpha, v))
        return out
    terms = (placed(nab2, 0, 0) + placed(minus_mu, F.dim, 0)
             + placed(second_mu, F.dim, 1) + placed(second_phi, 0, 1))
    return LinearDiffOp.from_terms(T, tgt, terms, "nabla_T")


def splitting_shift(n: int, r: int, B: LinearDiffOp) -> LinearDiffOp:
    """Phi[phi; mu] = [phi; mu + B phi] on T."""
    T = tractor5_bundle(n, r)
    F = _F(n, r)
    return _assemble(T, T, [(LinearDiffOp.identity(T), 0, 0), (B, 0, F.dim)], "Phi")


def splitting_independent(kt: KillingTypeOperator, B: LinearDiffOp) -> bool:
    """Whether the tractor connection of ``kt.shifted(B)`` is the Phi-conjugate of that of ``kt``."""
    Phi = splitting_shift(kt.n, kt.r, B)
    return (tractor5_connection(kt.shifted(B)) @ Phi).equals(fiberwise(kt.n, 1, Phi) @ tractor5_connection(kt))


def random_shift(rng: random.Random, n: int, r: int = 1, deg: int = 1) -> LinearDiffOp:
    """A random homomorphism B : Lambda^1 (x) E -> Lambda^2 (x) E (antisymmetric values)."""
    F, G = _F(n, r), _G(n, r)
    zero = (0,) * n
    terms = []
    for a, b in product(range(n), repeat=2):
        if a >= b:
            continue
        for f in range(r):
            for j in range(F.dim):
                if rng.random() < 0.5:
                    v = random_poly(rng, n, deg, density=0.5, span=3)
                    terms.append((G.comp((a, b), f), j, zero, v))
                    terms.append((G.comp((b, a), f), j, zero, -v))
    return LinearDiffOp.from_terms(F, G, terms, "B")


# ---------------------------------------------------------------------------
# the diagram chase for the second operator


def _inverse_hom(op: LinearDiffOp) -> LinearDiffOp:
    """Inverse of a constant bijective homomorphism between admissible subspaces."""
    src, tgt = op.source, op.target
    rows = tgt.coord_rows
    basis = src.basis
    res = op.restricted().get((0,) * op.n, {})
    M = [[Fraction(0)] * len(basis) for _ in rows]
    for ri, i in enumerate(rows):
        for k, v in res.get(i, {}).items():
            if not v.is_constant():
                raise linalg.NonConstantEntryError("chase needs a constant homomorphism")
            M[ri][k] = v.constant_value()
    if len(rows) != len(basis):
        raise ValueError("homomorphism is not square on admissible coordinates")
    Minv = linalg.inverse(M)
    mat: Dict[int, Dict[int, Fraction]] = {}
    for k, vec in enumerate(basis):
        for j, a in vec.items():
            for ri, i in enumerate(rows):
                c = Minv[k][ri]
                if c:
                    mat.setdefault(j, {})[i] = mat.get(j, {}).get(i, 0) + a * c
    return LinearDiffOp.homomorphism(tgt, src, mat, "inverse")


@dataclass
class ChaseParts:
    lift: LinearDiffOp          # Sym^2 (x) E -> Lambda^1 (x) T, h -> (h, m(h))
    residual: LinearDiffOp      # Lambda^2 (x) Lambda^1 (x) E component of nabla(lift)
    output: LinearDiffOp        # Lambda^2 (x) Lambda^2 (x) E component, scaled
    nearrow1: LinearDiffOp      # m -> Lambda^2 (x) Lambda^1 component (the p = 1 iso)
    coupled: LinearDiffOp       # nabla : Lambda^1 (x) T -> Lambda^2 (x) T
    take_F: LinearDiffOp
    take_G: LinearDiffOp
    put_m: LinearDiffOp
    solve_m: LinearDiffOp       # -(nearrow1)^{-1}


def chase_parts(kt: KillingTypeOperator) -> ChaseParts:
    n, r = kt.n, kt.r
    F, G = kt.F, _G(n, r)
    T = tractor5_bundle(n, r)
    l1T = form_bundle(n, 1, T)
    l2T = form_bundle(n, 2, T)
    Q = coupled_op(tractor5_connection(kt), 1)
    lam2F = _tb(n, LambdaLambda(2, 1), r)
    out_b = _tb(n, LambdaLambda(2, 2), r)
    sym2 = _tb(n, Sym(2), r)
    lam1G = _tb(n, LambdaLambda(1, 2), r)

    def put(src: Bundle, part: int) -> LinearDiffOp:
        pdim, off = T.parts[part].dim, T.offsets[part]
        mat = {}
        for j in range(src.dim):
            a, rest = divmod(j, pdim)
            mat[a * T.dim + off + rest] = {j: 1}
        return LinearDiffOp.homomorphism(src, l1T, mat, f"put{part}")

    def take(tgt: Bundle, part: int) -> LinearDiffOp:
        pdim, off = T.parts[part].dim, T.offsets[part]
        mat = {}
        for i in range(tgt.dim):
            ab, rest = divmod(i, pdim)
            mat[i] = {ab * T.dim + off + rest: 1}
        return LinearDiffOp.homomorphism(l2T, tgt, mat, f"take{part}")

    put_h, put_m = put(sym2, 0), put(lam1G, 1)
    take_F, take_G = take(lam2F, 0), take(out_b, 1)
    y1 = take_F @ Q @ put_h
    N = take_F @ Q @ put_m
    solve_m = -_inverse_hom(N)
    lift = put_h + put_m @ solve_m @ y1
    residual = take_F @ Q @ lift
    out = (take_G @ Q @ lift).scale(CHASE_SCALE)
    out = relabel(out, target=_tb(n, Xi(2, 2), r), name="chase")
    return ChaseParts(lift, residual, out, N, Q, take_F, take_G, put_m, solve_m)


def second_operator_chase(kt: KillingTypeOperator, check: bool = True) -> LinearDiffOp:
    """The second operator of the Killing-type sequence, Sym^2 (x) E -> Xi^{2,2} (x) E."""
    parts = chase_parts(kt)
    if check:
        if not parts.residual.is_zero():
            raise AssertionError("lift did not cancel the Lambda^2 (x) Lambda^1 component")
        if not parts.output.lands_in_target():
            raise AssertionError("chase output is not in Xi^{2,2}")
    return parts.output


def tractor5_curvature(kt: KillingTypeOperator) -> LinearDiffOp:
    """W = nabla o nabla on T (a homomorphism T -> Lambda^2 (x) T)."""
    nab = tractor5_connection(kt)
    w = coupled_op(nab, 1) @ nab
    w.name = "W"
    return w


def chase_obstruction(kt: KillingTypeOperator) -> LinearDiffOp:
    """The operator that chase o D must equal, written through the tractor curvature W.

    With tau(phi) = [phi; nabla_[a phi_b]] one has nabla^T tau = lift-candidate
    of D phi, hence

        chase o D = c * take_G (W tau + nabla (0, -nearrow^{-1} take_F W tau)),

    which vanishes whenever W does.
    """
    n, r = kt.n, kt.r
    F, G, T = kt.F, _G(n, r), tractor5_bundle(n, r)
    full2 = _tb(n, Full(2), r)
    half = Fraction(1, 2)
    alt = _index_map(full2, G, lambda t: ((t, half), ((t[1], t[0]), -half)), "alt")
    mu = alt @ relabel(kt.nabla, target=full2)
    tau = _assemble(F, T, [(LinearDiffOp.identity(F), 0, 0), (mu, 0, F.dim)], "tau")
    parts = chase_parts(kt)
    w_tau = tractor5_curvature(kt) @ tau
    fix = parts.take_G @ parts.coupled @ parts.put_m @ parts.solve_m @ parts.take_F @ w_tau
    out = (parts.take_G @ w_tau + fix).scale(CHASE_SCALE)
    return relabel(out, target=parts.output.target, name="obstruction")


# ---------------------------------------------------------------------------
# epsilon conjugation and the elasticity complex (n = 3)


def epsilon_conjugate(r: int = 1) -> LinearDiffOp:
    """R -> 1/4 eps_p^{ab} eps_q^{cd} R_abcd : Xi^{2,2} -> Sym^2."""
    n = 3
    src, tgt = _tb(n, Xi(2, 2), r), _tb(n, Sym(2), r)
    quarter = Fraction(1, 4)

    def rule(t):
        p, q = t
        for a, b, c, d in product(range(n), repeat=4):
            e = epsilon(p, a, b) * epsilon(q, c, d)
            if e:
                yield (a, b, c, d), quarter * e
    return _index_map(src, tgt, rule, "eps-conj")


def epsilon_lift(r: int = 1) -> LinearDiffOp:
    """sigma -> eps_abp eps_cdq sigma_pq : Sym^2 -> Xi^{2,2} (inverse of epsilon_conjugate)."""
    n = 3
    src, tgt = _tb(n, Sym(2), r), _tb(n, Xi(2, 2), r)

    def rule(t):
        a, b, c, d = t
        for p, q in product(range(n), repeat=2):
            e = epsilon(a, b, p) * epsilon(c, d, q)
            if e:
                yield (p, q), e
    return _index_map(src, tgt, rule, "eps-lift")


def third_operator_flat(r: int = 1) -> LinearDiffOp:
    """Y_{bc;de} -> d_[a Y_bc];de : Xi^{2,2} -> Xi^{3,2} (n = 3)."""
    n = 3
    src, tgt = _tb(n, Xi(2, 2), r), _tb(n, Xi(3, 2), r)
    terms = []
    for s in permutations(range(n), 3):
        for de in product(range(n), repeat=2):
            for i in range(3):
                c = Fraction(-1 if i % 2 else 1, 3)
                for f in range(r):
                    terms.append((tgt.comp(s + de, f), src.comp(s[:i] + s[i + 1:] + de, f), d_unit(n, s[i]), c))
    return LinearDiffOp.from_terms(src, tgt, terms, "third")


def load_conjugate(r: int = 1) -> LinearDiffOp:
    """Z -> 1/4 eps^{abc} eps_q^{de} Z_abcde : Xi^{3,2} -> Lambda^1."""
    n = 3
    src, tgt = _tb(n, Xi(3, 2), r), _tb(n, Lambda(1), r)
    quarter = Fraction(1, 4)

    def rule(t):
        (q,) = t
        for a, b, c, d, e in product(range(n), repeat=5):
            s = epsilon(a, b, c) * epsilon(q, d, e)
            if s:
                yield (a, b, c, d, e), quarter * s
    return _index_map(src, tgt, rule, "eps-conj3")


def elasticity_complex(n: int = 3) -> ComplexSpec:
    """displacement -> strain -> stress -> load on R^3."""
    if n != 3:
        raise ValueError("the elasticity complex is built for n = 3")
    strain = killing_flat(3)
    cc = epsilon_conjugate() @ saint_venant_flat(3)
    cc.name = "curl curl"
    load = load_conjugate() @ third_operator_flat() @ epsilon_lift()
    load.name = "div"
    return ComplexSpec((strain, cc, load), "elasticity")
