"""Index-symmetry types and exact bases for the corresponding tensor subspaces.

Tensors are stored densely over full index tuples. A symmetry type fixes a
block structure (antisymmetric and symmetric index groups) and, for the
``Theta`` and ``Xi`` families, the extra condition that antisymmetrizing the
first ``p + 1`` indices gives zero.

Everything is computed one index *content* (multiset of index values) at a
time: permuting slots preserves content, so every projector and every basis
is block diagonal over contents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations, product
from math import comb
from typing import Dict, List, Sequence, Tuple

from .exactalg import linalg

Index = Tuple[int, ...]

_KINDS = ("Full", "Lambda", "Sym", "LambdaSym", "LambdaLambda", "Theta", "Xi")


@dataclass(frozen=True)
class SymmetryType:
    kind: str
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if self.p < 0 or self.q < 0:
            raise ValueError("p and q must be non-negative")

    # constructors ---------------------------------------------------------
    @classmethod
    def full(cls, rank: int) -> "SymmetryType":
        return cls("Full", rank)

    @classmethod
    def wedge(cls, p: int) -> "SymmetryType":
        return cls("Lambda", p)

    @classmethod
    def sym(cls, q: int) -> "SymmetryType":
        return cls("Sym", 0, q)

    @classmethod
    def lambda_sym(cls, p: int, q: int) -> "SymmetryType":
        return cls("LambdaSym", p, q)

    @classmethod
    def lambda_lambda(cls, p: int, q: int) -> "SymmetryType":
        return cls("LambdaLambda", p, q)

    @classmethod
    def theta(cls, p: int, q: int) -> "SymmetryType":
        return cls("Theta", p, q)

    @classmethod
    def xi(cls, p: int, q: int) -> "SymmetryType":
        return cls("Xi", p, q)

    # structure ------------------------------------------------------------
    @property
    def rank(self) -> int:
        if self.kind in ("Full", "Lambda"):
            return self.p
        if self.kind == "Sym":
            return self.q
        return self.p + self.q

    def blocks(self) -> List[Tuple[str, int]]:
        """Consecutive slot groups as ``("anti" | "sym", length)``."""
        k = self.kind
        if k == "Full":
            return [("sym", 1)] * self.p
        if k == "Lambda":
            return [("anti", self.p)] if self.p else []
        if k == "Sym":
            return [("sym", self.q)] if self.q else []
        second = "anti" if k in ("LambdaLambda", "Xi") else "sym"
        out = []
        if self.p:
            out.append(("anti", self.p))
        if self.q:
            out.append((second, self.q))
        return out

    @property
    def has_extra_condition(self) -> bool:
        return self.kind in ("Theta", "Xi") and self.q >= 1

    def __str__(self) -> str:
        if self.kind in ("Full", "Lambda"):
            return f"{self.kind}({self.p})"
        if self.kind == "Sym":
            return f"Sym({self.q})"
        return f"{self.kind}({self.p},{self.q})"


Full = SymmetryType.full
Lambda = SymmetryType.wedge
Sym = SymmetryType.sym
LambdaSym = SymmetryType.lambda_sym
LambdaLambda = SymmetryType.lambda_lambda
Theta = SymmetryType.theta
Xi = SymmetryType.xi


def parse_symmetry(text: str) -> SymmetryType:
    """Parse ``"Theta(2,1)"``, ``"Sym(2)"``, ``"Lambda(1)"`` and friends."""
    s = text.replace(" ", "")
    if "(" not in s or not s.endswith(")"):
        raise ValueError(f"bad symmetry literal {text!r}")
    kind, args = s[:-1].split("(", 1)
    nums = [int(a) for a in args.split(",") if a]
    if kind in ("Full", "Lambda") and len(nums) == 1:
        return SymmetryType(kind, nums[0])
    if kind == "Sym" and len(nums) == 1:
        return SymmetryType(kind, 0, nums[0])
    if kind in _KINDS and len(nums) == 2:
        return SymmetryType(kind, nums[0], nums[1])
    raise ValueError(f"bad symmetry literal {text!r}")


# ---------------------------------------------------------------------------
# canonical forms


def _perm_sign(seq: Sequence[int]) -> int:
    """Sign of the sorting permutation; 0 if entries repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def canonicalize(blocks: Sequence[Tuple[str, int]], t: Index) -> Tuple[Index | None, int]:
    """Sort each block of ``t``; return (canonical tuple, sign) or (None, 0)."""
    out: list[int] = []
    sign = 1
    pos = 0
    for kind, length in blocks:
        part = t[pos:pos + length]
        pos += length
        if kind == "anti":
            s = _perm_sign(part)
            if s == 0:
                return None, 0
            sign *= s
        out.extend(sorted(part))
    return tuple(out), sign


def canonical_tuples(blocks: Sequence[Tuple[str, int]], n: int) -> List[Index]:
    """Canonical index tuples (strict within anti blocks, weak within sym)."""
    pieces = []
    for kind, length in blocks:
        if kind == "anti":
            pieces.append(list(combinations(range(n), length)))
        else:
            pieces.append(list(combinations_with_replacement(range(n), length)))
    return [tuple(i for part in combo for i in part) for combo in product(*pieces)]


def _content(t: Index) -> Index:
    return tuple(sorted(t))


def _target_blocks(sym: SymmetryType) -> List[Tuple[str, int]]:
    second = "anti" if sym.kind == "Xi" else "sym"
    out = [("anti", sym.p + 1)]
    if sym.q - 1:
        out.append((second, sym.q - 1))
    return out


@lru_cache(maxsize=None)
def reduced_blocks(sym: SymmetryType, n: int) -> Dict[Index, Tuple[List[Index], List[List[Fraction]]]]:
    """Per content: (canonical tuples, kernel basis in canonical coordinates).

    The coordinates of a block-symmetric tensor are its values at canonical
    tuples. For Theta/Xi the kernel of the extra antisymmetrization is taken
    inside those coordinates.
    """
    blocks = sym.blocks()
    if sym.kind in ("Theta", "Xi"):
        base_blocks = LambdaSym(sym.p, sym.q).blocks() if sym.kind == "Theta" else LambdaLambda(sym.p, sym.q).blocks()
    else:
        base_blocks = blocks
    by_content: Dict[Index, List[Index]] = {}
    for t in canonical_tuples(base_blocks, n):
        by_content.setdefault(_content(t), []).append(t)
    out: Dict[Index, Tuple[List[Index], List[List[Fraction]]]] = {}
    for c, tuples in by_content.items():
        m = len(tuples)
        if not sym.has_extra_condition:
            basis = [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
            out[c] = (tuples, basis)
            continue
        pos = {t: i for i, t in enumerate(tuples)}
        tblocks = _target_blocks(sym)
        targets = [t for t in canonical_tuples(tblocks, n) if _content(t) == c]
        rows = []
        p = sym.p
        for s in targets:
            row = [Fraction(0)] * m
            head, rest = s[:p + 1], s[p + 1:]
            for i in range(p + 1):
                cand = head[:i] + head[i + 1:] + (head[i],) + rest
                u, sgn = canonicalize(base_blocks, cand)
                if u is None:
                    continue
                row[pos[u]] += (-1) ** (p - i) * sgn
            rows.append(row)
        basis = linalg.kernel_basis(rows, m) if rows else [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
        if basis:
            out[c] = (tuples, basis)
    return out


@lru_cache(maxsize=None)
def dimension(sym: SymmetryType, n: int) -> int:
    """Fiber dimension of the symmetry subspace of rank-``sym.rank`` tensors on R^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(len(b) for _, b in reduced_blocks(sym, n).values())


def _arrangements(c: Index) -> List[Index]:
    return sorted(set(permutations(c)))


@lru_cache(maxsize=None)
def full_basis(sym: SymmetryType, n: int) -> Dict[Index, List[Dict[Index, Fraction]]]:
    """Per content: basis vectors of the subspace in full index coordinates."""
    base_blocks = (
        LambdaSym(sym.p, sym.q).blocks() if sym.kind == "Theta"
        else LambdaLambda(sym.p, sym.q).blocks() if sym.kind == "Xi"
        else sym.blocks()
    )
    out: Dict[Index, List[Dict[Index, Fraction]]] = {}
    for c, (tuples, kbasis) in reduced_blocks(sym, n).items():
        pos = {t: i for i, t in enumerate(tuples)}
        expansion: Dict[Index, Tuple[int, int]] = {}
        for t in _arrangements(c):
            u, sgn = canonicalize(base_blocks, t)
            if u is not None:
                expansion[t] = (pos[u], sgn)
        vecs = []
        for kv in kbasis:
            v = {}
            for t, (i, sgn) in expansion.items():
                if kv[i]:
                    v[t] = kv[i] * sgn
            vecs.append(v)
        out[c] = vecs
    return out


@lru_cache(maxsize=None)
def projector_blocks(sym: SymmetryType, n: int) -> Dict[Index, Dict[Index, Dict[Index, Fraction]]]:
    """Orthogonal projector onto the subspace, as sparse rows keyed by index tuple."""
    out: Dict[Index, Dict[Index, Dict[Index, Fraction]]] = {}
    for c, vecs in full_basis(sym, n).items():
        support = sorted({t for v in vecs for t in v})
        gram = [[sum((a.get(t, 0) * b.get(t, 0) for t in support), Fraction(0)) for b in vecs] for a in vecs]
        ginv = linalg.inverse(gram)
        # P = B G^-1 B^T
        coeff = [[sum((ginv[k][l] * vecs[l].get(t, 0) for l in range(len(vecs))), Fraction(0))
                  for t in support] for k in range(len(vecs))]
        for i, s in enumerate(support):
            row = {}
            for j, t in enumerate(support):
                val = sum((vecs[k].get(s, 0) * coeff[k][j] for k in range(len(vecs))), Fraction(0))
                if val:
                    row[t] = val
            if row:
                out.setdefault(c, {})[s] = row
    return out


def hook_content_dimension(shape: Sequence[int], n: int) -> int:
    """GL(n) irreducible dimension for a Young diagram (rows listed longest first).

    Used as an independent oracle for :func:`dimension`.
    """
    shape = [r for r in shape if r]
    cols = [sum(1 for r in shape if r > j) for j in range(shape[0])] if shape else []
    num = Fraction(1)
    for i, r in enumerate(shape):
        for j in range(r):
            hook = (r - j - 1) + (cols[j] - i - 1) + 1
            num *= Fraction(n + j - i, hook)
    return int(num)


def theta_shape(p: int, q: int) -> List[int]:
    """Young shape of Theta(p,q): one row of length q+1 atop a column of height p."""
    if q == 0:
        return [1] * p
    return [q + 1] + [1] * (p - 1)


def xi_shape(p: int, q: int) -> List[int]:
    """Young shape of Xi(p,q) (two columns of heights p >= q)."""
    rows = []
    for i in range(max(p, q)):
        rows.append((1 if i < p else 0) + (1 if i < q else 0))
    return rows


def binomial(a: int, b: int) -> int:
    return comb(a, b) if 0 <= b <= a else 0
