"""Bundle descriptors over R^n in a fixed global trivialization.

A bundle is a list of ambient components (its coordinates) together with the
admissible subspace singled out by index symmetries. Sections are tuples of
:class:`~hoconn.exactalg.poly.Poly`, one per ambient component.

Each component also carries an integer *weight*. Jet slots are weighted by
their derivative order so that the Spencer operator is homogeneous; tensor
components have weight 0.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Sequence, Tuple

from .exactalg.poly import Exponent, exponents_up_to
from .symmetry import SymmetryType, canonical_tuples, full_basis, projector_blocks

SparseVec = Dict[int, Fraction]
SparseMat = Dict[int, Dict[int, Fraction]]


class Bundle:
    """Base class; subclasses fill in labels, weights, basis and projector."""

    n: int
    name: str

    def key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return isinstance(other, Bundle) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return self.name

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def labels(self) -> List[tuple]:
        raise NotImplementedError

    @cached_property
    def weights(self) -> List[int]:
        return [0] * self.dim

    @cached_property
    def index_of(self) -> Dict[tuple, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def basis(self) -> List[SparseVec]:
        """Independent spanning vectors of the admissible subspace."""
        return [{i: Fraction(1)} for i in range(self.dim)]

    @cached_property
    def coord_rows(self) -> List[int]:
        """Components whose values determine an element of the subspace."""
        return list(range(self.dim))

    @cached_property
    def projector(self) -> SparseMat | None:
        """Orthogonal projector onto the subspace; ``None`` means identity."""
        return None

    @property
    def rank(self) -> int:
        return len(self.basis)

    def zero_section(self):
        from .exactalg.poly import Poly
        z = Poly.zero(self.n)
        return tuple(z for _ in range(self.dim))


class EBundle(Bundle):
    """The trivial bundle R^n x R^r."""

    def __init__(self, n: int, r: int):
        self.n, self.r = n, r
        self.name = f"E{r}" if r != 1 else "R"

    def key(self):
        return ("E", self.n, self.r)

    @cached_property
    def labels(self):
        return [(f,) for f in range(self.r)]


class JetBundle(Bundle):
    """Coordinates of J^order E: one fiber vector per multi-index |beta| <= order."""

    def __init__(self, n: int, order: int, r: int):
        if order < 0:
            raise ValueError("jet order must be >= 0")
        self.n, self.order, self.r = n, order, r
        self.name = f"J{order}(E{r})"

    def key(self):
        return ("J", self.n, self.order, self.r)

    @cached_property
    def multi_indices(self) -> List[Exponent]:
        return exponents_up_to(self.n, self.order)

    @cached_property
    def labels(self):
        return [(beta, f) for beta in self.multi_indices for f in range(self.r)]

    @cached_property
    def weights(self):
        return [sum(beta) for beta, _ in self.labels]

    def slot(self, beta: Exponent, f: int) -> int:
        return self.index_of[(beta, f)]


class SumBundle(Bundle):
    """Direct sum; labels are ``(part index, part label)``."""

    def __init__(self, parts: Sequence[Bundle], name: str | None = None):
        self.parts = tuple(parts)
        ns = {p.n for p in self.parts}
        if len(ns) != 1:
            raise ValueError("summands live over different base dimensions")
        self.n = ns.pop()
        self.name = name or " + ".join(p.name for p in self.parts)

    def key(self):
        return ("Sum",) + tuple(p.key() for p in self.parts)

    @cached_property
    def offsets(self) -> List[int]:
        out, acc = [], 0
        for p in self.parts:
            out.append(acc)
            acc += p.dim
        return out

    @cached_property
    def labels(self):
        return [(k, lab) for k, p in enumerate(self.parts) for lab in p.labels]

    @cached_property
    def weights(self):
        return [w for p in self.parts for w in p.weights]

    @cached_property
    def basis(self):
        out = []
        for off, p in zip(self.offsets, self.parts):
            for v in p.basis:
                out.append({off + i: c for i, c in v.items()})
        return out

    @cached_property
    def coord_rows(self):
        return [off + i for off, p in zip(self.offsets, self.parts) for i in p.coord_rows]

    @cached_property
    def projector(self):
        if all(p.projector is None for p in self.parts):
            return None
        out: SparseMat = {}
        for off, p in zip(self.offsets, self.parts):
            if p.projector is None:
                for i in range(p.dim):
                    out[off + i] = {off + i: Fraction(1)}
            else:
                for i, row in p.projector.items():
                    out[off + i] = {off + j: v for j, v in row.items()}
        return out


class TensorBundle(Bundle):
    """Covariant tensors of a given symmetry type with values in ``fiber``.

    Components are ``(index tuple, fiber label)`` with the index tuple running
    over all of ``range(n) ** rank`` in lexicographic order.
    """

    def __init__(self, n: int, sym: SymmetryType, fiber: Bundle | None = None, r: int = 1):
        self.n, self.sym = n, sym
        self.fiber = fiber if fiber is not None else EBundle(n, r)
        if self.fiber.n != n:
            raise ValueError("fiber over a different base dimension")
        suffix = "" if (isinstance(self.fiber, EBundle) and self.fiber.r == 1) else f"(x){self.fiber.name}"
        self.name = f"{sym}{suffix}"

    def key(self):
        return ("T", self.n, self.sym, self.fiber.key())

    @property
    def tensor_rank(self) -> int:
        return self.sym.rank

    @cached_property
    def index_tuples(self) -> List[Tuple[int, ...]]:
        return list(product(range(self.n), repeat=self.sym.rank))

    @cached_property
    def tuple_pos(self) -> Dict[Tuple[int, ...], int]:
        return {t: i for i, t in enumerate(self.index_tuples)}

    @cached_property
    def labels(self):
        return [(t, lab) for t in self.index_tuples for lab in self.fiber.labels]

    @cached_property
    def weights(self):
        return list(self.fiber.weights) * len(self.index_tuples)

    def comp(self, t: Tuple[int, ...], fiber_index: int = 0) -> int:
        """Ambient index of tensor component ``t`` at fiber coordinate ``fiber_index``."""
        return self.tuple_pos[tuple(t)] * self.fiber.dim + fiber_index

    @cached_property
    def tensor_basis(self) -> List[Dict[Tuple[int, ...], Fraction]]:
        return [v for vecs in full_basis(self.sym, self.n).values() for v in vecs]

    @cached_property
    def basis(self):
        fd = self.fiber.dim
        out = []
        for tv in self.tensor_basis:
            for fv in self.fiber.basis:
                vec = {}
                for t, a in tv.items():
                    base = self.tuple_pos[t] * fd
                    for j, b in fv.items():
                        vec[base + j] = a * b
                out.append(vec)
        return out

    @cached_property
    def coord_rows(self):
        blocks = self.sym.blocks() if self.sym.kind not in ("Theta", "Xi") else (
            SymmetryType("LambdaSym" if self.sym.kind == "Theta" else "LambdaLambda", self.sym.p, self.sym.q).blocks()
        )
        fd = self.fiber.dim
        rows = []
        for t in canonical_tuples(blocks, self.n):
            base = self.tuple_pos[t] * fd
            rows.extend(base + j for j in self.fiber.coord_rows)
        return sorted(rows)

    @cached_property
    def tensor_projector(self) -> Dict[Tuple[int, ...], Dict[Tuple[int, ...], Fraction]]:
        out = {}
        for rows in projector_blocks(self.sym, self.n).values():
            out.update(rows)
        return out

    @cached_property
    def projector(self):
        trivial_tensor = self.sym.kind == "Full" or (self.sym.rank <= 1 and not self.sym.has_extra_condition)
        if trivial_tensor and self.fiber.projector is None:
            return None
        fd = self.fiber.dim
        fproj = self.fiber.projector
        if fproj is None:
            fproj = {j: {j: Fraction(1)} for j in range(fd)}
        tproj = self.tensor_projector
        out: SparseMat = {}
        for s, trow in tproj.items():
            bs = self.tuple_pos[s] * fd
            for j, frow in fproj.items():
                row = {}
                for t, a in trow.items():
                    bt = self.tuple_pos[t] * fd
                    for jj, b in frow.items():
                        row[bt + jj] = a * b
                out[bs + j] = row
        return out


def E(n: int, r: int = 1) -> EBundle:
    return EBundle(n, r)


def tensors(n: int, sym: SymmetryType, r: int = 1) -> TensorBundle:
    return TensorBundle(n, sym, EBundle(n, r))


def forms(n: int, p: int, fiber: Bundle) -> TensorBundle:
    """Lambda^p (x) fiber."""
    from .symmetry import Lambda
    return TensorBundle(n, Lambda(p), fiber)
