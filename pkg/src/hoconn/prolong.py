"""First prolongation of an operator D = sigma o nabla^(k) with surjective symbol.

Unknowns are a jet ``phi~`` in J^{k-1}E and ``omega`` in K = ker sigma; the
closed first order system is

    nabla phi~ - iota(omega) = 0,        nabla omega - kappa phi~ = 0,

with ``nabla`` the jet connection, ``iota`` the inclusion of K into the top
slots of Lambda^1 (x) J^{k-1}E, ``nabla omega`` the induced first order
operator on Sym^k (x) E restricted to K and ``kappa`` the Theta-valued jet
curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .bundles import EBundle, JetBundle, SumBundle
from .connection import ConnectionData, apply_higher_op, induced_operator, jet_connection, jet_curvature
from .exactalg import linalg
from .exactalg.poly import Poly, exponents_up_to, homogeneous_exponents, indices_of
from .jets import inclusion_op, iota_op, jet_op, spencer_op, sym_form_bundle
from .operators import LinearDiffOp

__all__ = ["EquivalenceReport", "ProlongationProblem", "ProlongedSystem", "SigmaError", "assemble_system",
           "laplacian_problem", "solution_equivalence_check"]


class SigmaError(ValueError):
    pass


@dataclass(frozen=True)
class ProlongationProblem:
    """``sigma`` has one row per component of F and one column per canonical coordinate
    of Sym^k (x) E (multi-indices in graded-lex order, fiber index fastest)."""

    c: ConnectionData
    sigma: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        n, k, r = self.c.n, self.c.k, self.c.r
        ncols = len(homogeneous_exponents(n, k)) * r
        sig = tuple(tuple(Fraction(v) for v in row) for row in self.sigma)
        object.__setattr__(self, "sigma", sig)
        if any(len(row) != ncols for row in sig):
            raise SigmaError(f"sigma needs {ncols} columns")
        if sig and linalg.rank(sig, ncols) != len(sig):
            raise SigmaError("sigma is not surjective (rows are dependent)")

    @property
    def coords(self) -> List[Tuple[Tuple[int, ...], int]]:
        n, k, r = self.c.n, self.c.k, self.c.r
        return [(lam, f) for lam in homogeneous_exponents(n, k) for f in range(r)]

    @property
    def kernel_basis(self) -> List[List[Fraction]]:
        ncols = len(self.coords)
        if not self.sigma:
            return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
        return linalg.kernel_basis(self.sigma, ncols)

    @property
    def K(self) -> EBundle:
        return EBundle(self.c.n, len(self.kernel_basis))

    def sigma_op(self) -> LinearDiffOp:
        n, k, r = self.c.n, self.c.k, self.c.r
        src = sym_form_bundle(n, 0, k, r)
        tgt = EBundle(n, len(self.sigma))
        mat: Dict[int, Dict[int, Fraction]] = {}
        for i, row in enumerate(self.sigma):
            for (lam, f), v in zip(self.coords, row):
                if v:
                    mat.setdefault(i, {})[src.comp(indices_of(lam), f)] = v
        return LinearDiffOp.homomorphism(src, tgt, mat, "sigma")

    def D(self) -> LinearDiffOp:
        op = self.sigma_op() @ apply_higher_op(self.c)
        op.name = "D"
        return op

    def k_inclusion(self) -> LinearDiffOp:
        """K -> Sym^k (x) E, filling every ordering of each canonical coordinate."""
        n, k, r = self.c.n, self.c.k, self.c.r
        tgt = sym_form_bundle(n, 0, k, r)
        mat: Dict[int, Dict[int, Fraction]] = {}
        from .exactalg.poly import exponent_of
        for t in tgt.index_tuples:
            lam = exponent_of(t, n)
            for f in range(r):
                col = self.coords.index((lam, f))
                for m, vec in enumerate(self.kernel_basis):
                    if vec[col]:
                        mat.setdefault(tgt.comp(t, f), {})[m] = vec[col]
        return LinearDiffOp.homomorphism(self.K, tgt, mat, "K->Sym")

    def k_projection(self) -> LinearDiffOp:
        """A left inverse Sym^k (x) E -> K of the inclusion (least squares on canonical coordinates)."""
        n, k, r = self.c.n, self.c.k, self.c.r
        src = sym_form_bundle(n, 0, k, r)
        B = self.kernel_basis
        if not B:
            return LinearDiffOp.zero(src, self.K)
        gram = linalg.matmul(B, [list(col) for col in zip(*B)])
        ginv = linalg.inverse(gram)
        left = linalg.matmul(ginv, B)
        mat: Dict[int, Dict[int, Fraction]] = {}
        for m, row in enumerate(left):
            for (lam, f), v in zip(self.coords, row):
                if v:
                    mat.setdefault(m, {})[src.comp(indices_of(lam), f)] = v
        return LinearDiffOp.homomorphism(src, self.K, mat, "Sym->K")


def laplacian_problem(n: int = 2) -> ProlongationProblem:
    """D = sum_a d_a d_a on scalars with the flat splitting."""
    coords = homogeneous_exponents(n, 2)
    row = tuple(Fraction(1) if max(lam) == 2 else Fraction(0) for lam in coords)
    return ProlongationProblem(ConnectionData.flat(n, 2, 1), (row,))


@dataclass
class ProlongedSystem:
    problem: ProlongationProblem
    op: LinearDiffOp            # J^{k-1}E + K -> (Lambda^1 (x) J^{k-1}E) + (Theta^{2,k-1} (x) E)
    holonomic: Optional[LinearDiffOp]   # S on the jet part (k >= 2)
    blocks: Dict[str, LinearDiffOp] = field(default_factory=dict)


def _block(src: SumBundle, tgt: SumBundle, parts) -> LinearDiffOp:
    terms = []
    for op, si, ti in parts:
        so, to = src.offsets[si], tgt.offsets[ti]
        for alpha, mat in op.coeffs.items():
            for i, row in mat.items():
                for j, v in row.items():
                    terms.append((to + i, so + j, alpha, v))
    return LinearDiffOp.from_terms(src, tgt, terms, "prolonged")


def assemble_system(p: ProlongationProblem, kappa_perturbation: Optional[LinearDiffOp] = None) -> ProlongedSystem:
    c = p.c
    n, k, r = c.n, c.k, c.r
    jc = jet_connection(c)
    J = jc.op.source
    K = p.K
    curv = jet_curvature(jc)
    kappa = curv.kappa_theta
    if kappa_perturbation is not None:
        kappa = kappa + kappa_perturbation
    incl = inclusion_op(n, 1, k - 1, r) @ iota_op(n, k, r) @ p.k_inclusion()
    nab_omega = induced_operator(c) @ p.k_inclusion()
    src = SumBundle([J, K], "J+K")
    tgt = SumBundle([jc.op.target, kappa.target], "L1J+Theta")
    op = _block(src, tgt, [(jc.op, 0, 0), (-incl, 1, 0), (nab_omega, 1, 1), (-kappa, 0, 1)])
    hol = None
    if k >= 2:
        s = spencer_op(n, k - 1, r)
        hol = _block(src, SumBundle([s.target], "S"), [(s, 0, 0)])
    blocks = {"nabla": jc.op, "iota": incl, "nabla_K": nab_omega, "kappa": kappa}
    return ProlongedSystem(p, op, hol, blocks)


# ---------------------------------------------------------------------------
# polynomial solution spaces


def _columns(ops: Sequence[LinearDiffOp], bounds: Sequence[int]):
    """Columns (one per basis vector x monomial within the per-component degree bound)."""
    src = ops[0].source
    n = src.n
    cols, sections = [], []
    for vec in src.basis:
        comps = list(vec)
        bound = min(bounds[j] for j in comps)
        for e in exponents_up_to(n, bound) if bound >= 0 else []:
            mono = Poly.monomial(e)
            sec = [Poly.zero(n)] * src.dim
            for j, a in vec.items():
                sec[j] = mono.scale(a)
            sec = tuple(sec)
            col = {}
            for oi, op in enumerate(ops):
                out = op.apply(sec)
                for i, pv in enumerate(out):
                    for ex, v in pv.terms.items():
                        col[(oi, i, ex)] = v
            cols.append(col)
            sections.append(sec)
    return cols, sections


def _kernel(cols) -> List[List[Fraction]]:
    keys = sorted({key for c in cols for key in c})
    index = {key: i for i, key in enumerate(keys)}
    rows = [[Fraction(0)] * len(cols) for _ in keys]
    for j, c in enumerate(cols):
        for key, v in c.items():
            rows[index[key]][j] = v
    if not rows:
        return [[Fraction(int(i == j)) for i in range(len(cols))] for j in range(len(cols))]
    return linalg.kernel_basis(rows, len(cols))


def _combine(sections, coeffs, n) -> Tuple[Poly, ...]:
    dim = len(sections[0]) if sections else 0
    out = [Poly.zero(n)] * dim
    for sec, a in zip(sections, coeffs):
        if a:
            for i in range(dim):
                if sec[i]:
                    out[i] = out[i] + sec[i].scale(a)
    return tuple(out)


@dataclass
class EquivalenceReport:
    rows: List[dict] = field(default_factory=list)
    checks: List[Tuple[str, bool]] = field(default_factory=list)

    def add(self, name: str, ok: bool) -> None:
        self.checks.append((name, bool(ok)))

    @property
    def ok(self) -> bool:
        return all(v for _, v in self.checks)

    @property
    def failures(self) -> List[str]:
        return [name for name, v in self.checks if not v]


def solution_equivalence_check(p: ProlongationProblem, d_max: int,
                               system: Optional[ProlongedSystem] = None) -> EquivalenceReport:
    """Compare ker D with holonomic solutions of the prolonged system, degree by degree.

    Spaces are filtered by degree: phi of degree <= d, slot u_beta of degree
    <= d - |beta| and omega of degree <= d - k (or d + deg Gamma when the
    connection has coefficients). Per-degree dimensions are successive
    differences of the filtered dimensions.
    """
    c = p.c
    n, k, r = c.n, c.k, c.r
    sysm = system or assemble_system(p)
    D = p.D()
    J: JetBundle = sysm.op.source.parts[0]
    g = c.max_degree if not c.is_flat_model else None
    rep = EquivalenceReport()
    prev_d = prev_s = 0
    j_op = jet_op(n, k - 1, r)
    hk = apply_higher_op(c)
    to_k = p.k_projection()
    from_k = p.k_inclusion()
    all_i, all_ii, all_lift = True, True, True
    for d in range(d_max + 1):
        # D side
        dcols, dsecs = _columns([D], [d] * D.source.dim)
        dker = _kernel(dcols)
        # system side
        w_bound = d - k if g is None else d + g
        bounds = [d - w for w in J.weights] + [w_bound] * p.K.dim
        ops = [sysm.op] + ([sysm.holonomic] if sysm.holonomic is not None else [])
        scols, ssecs = _columns(ops, bounds)
        sker = _kernel(scols)
        rep.rows.append({"degree": d, "D_kernel": len(dker) - prev_d, "system": len(sker) - prev_s,
                         "D_kernel_filtered": len(dker), "system_filtered": len(sker)})
        prev_d, prev_s = len(dker), len(sker)
        # (i) D-kernel elements give system solutions
        for vec in dker:
            phi = _combine(dsecs, vec, n)
            higher = hk.apply(phi)
            omega = to_k.apply(higher)
            if from_k.apply(omega) != higher:
                all_lift = False
            out = sysm.op.apply(j_op.apply(phi) + omega)
            if any(out):
                all_i = False
        # (ii) holonomic system solutions project into ker D
        for vec in sker:
            sec = _combine(ssecs, vec, n)
            phi = tuple(sec[J.slot((0,) * n, f)] for f in range(r))
            if any(D.apply(phi)) or j_op.apply(phi) != sec[:J.dim]:
                all_ii = False
    rep.add("nabla^(k) phi lies in K for D phi = 0", all_lift)
    rep.add("(j^(k-1) phi, nabla^(k) phi) solves the system", all_i)
    rep.add("holonomic system solutions are D-solutions", all_ii)
    rep.add("solution dimensions agree per degree", all(r_["D_kernel"] == r_["system"] for r_ in rep.rows))
    return rep
