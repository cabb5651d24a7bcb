"""JSON configuration loaders.

Every document carries ``"schema_version": 1``. Indices in configs are
1-based; polynomials use the literal syntax of :func:`parse_poly`. Errors
are raised as :class:`ConfigError` with the line and column of the offending
value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from .bundles import JetBundle
from .connection import ConnectionData
from .exactalg.poly import Poly, PolyParseError, parse_poly
from .jets import JetSection
from .prolong import ProlongationProblem, SigmaError
from .symmetry import Full, parse_symmetry
from .tensor import TensorField, project

__all__ = ["SCHEMA_VERSION", "ConfigError", "LoadedTensor", "load_connection", "load_document",
           "load_elasticity", "load_jet", "load_prolong", "load_tensor", "DEFAULT_ELASTICITY_DEMO"]

SCHEMA_VERSION = 1

Path = Tuple[Any, ...]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str = "<config>"):
        where = f"{source}:{line}:{column}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line, self.column = line, column


# ---------------------------------------------------------------------------
# locating JSON values by path

_DEC = json.JSONDecoder()


def _ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _offset(text: str, path: Path) -> int:
    """Character offset of the value at ``path`` (best effort, 0 on failure)."""
    i = _ws(text, 0)
    try:
        for step in path:
            if text[i] == "{":
                i = _ws(text, i + 1)
                while text[i] != "}":
                    key, i = _DEC.raw_decode(text, i)
                    i = _ws(text, _ws(text, i) + 1)   # past ':'
                    if key == step:
                        break
                    _, i = _DEC.raw_decode(text, i)
                    i = _ws(text, i)
                    if text[i] == ",":
                        i = _ws(text, i + 1)
                else:
                    return i
            elif text[i] == "[":
                i = _ws(text, i + 1)
                for _ in range(int(step)):
                    _, i = _DEC.raw_decode(text, i)
                    i = _ws(text, _ws(text, i) + 1)   # past ','
            else:
                return i
    except (IndexError, ValueError, TypeError):
        return 0
    return i


def _line_col(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


class _Doc:
    """Parsed document plus its text, for positioned errors."""

    def __init__(self, text: str, source: str):
        self.text, self.source = text, source
        try:
            self.data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, e.lineno, e.colno, source) from None
        if not isinstance(self.data, dict):
            raise ConfigError("top level must be an object", 1, 1, source)

    def error(self, path: Path, message: str, extra_col: int = 0) -> ConfigError:
        line, col = _line_col(self.text, _offset(self.text, path))
        return ConfigError(message, line, col + extra_col, self.source)

    def get(self, path: Path, kind=None, required: bool = True, default=None):
        cur = self.data
        for step in path:
            try:
                cur = cur[step]
            except (KeyError, IndexError, TypeError):
                if required:
                    raise self.error(path[:-1], f"missing field {'/'.join(map(str, path))}") from None
                return default
        if kind is not None and not isinstance(cur, kind) or isinstance(cur, bool) and kind is int:
            name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            raise self.error(path, f"{'/'.join(map(str, path))} must be {name}")
        return cur

    def poly(self, path: Path, n: int) -> Poly:
        v = self.get(path, (str, int))
        try:
            return parse_poly(v, n)
        except PolyParseError as e:
            raise self.error(path, str(e), extra_col=1 + e.pos) from None

    def index(self, path: Path, n: int) -> int:
        v = self.get(path, int)
        if not 1 <= v <= n:
            raise self.error(path, f"index {v} outside 1..{n}")
        return v - 1


def load_document(text: str, source: str = "<config>") -> _Doc:
    doc = _Doc(text, source)
    ver = doc.get(("schema_version",), int)
    if ver != SCHEMA_VERSION:
        raise doc.error(("schema_version",), f"unsupported schema_version {ver} (expected {SCHEMA_VERSION})")
    return doc


def _doc(text_or_doc, source: str) -> _Doc:
    return text_or_doc if isinstance(text_or_doc, _Doc) else load_document(text_or_doc, source)


def _positive(doc: _Doc, path: Path, lo: int = 1) -> int:
    v = doc.get(path, int)
    if v < lo:
        raise doc.error(path, f"{path[-1]} must be >= {lo}")
    return v


# ---------------------------------------------------------------------------
# loaders


@dataclass(frozen=True)
class LoadedTensor:
    field: TensorField
    was_symmetric: bool


def load_tensor(text, source: str = "<config>", base: Path = ()) -> LoadedTensor:
    """``{n, symmetry, fiber_rank, components: [{indices, fiber}]}``; the result is projected."""
    doc = _doc(text, source)
    n = _positive(doc, base + ("n",))
    r = _positive(doc, base + ("fiber_rank",)) if "fiber_rank" in doc.get(base, dict) else 1
    try:
        sym = parse_symmetry(doc.get(base + ("symmetry",), str))
    except ValueError as e:
        raise doc.error(base + ("symmetry",), str(e)) from None
    comps: Dict[Tuple[int, ...], List[Poly]] = {}
    recs = doc.get(base + ("components",), list)
    for i, _ in enumerate(recs):
        p = base + ("components", i)
        idx = doc.get(p + ("indices",), list)
        if len(idx) != sym.rank:
            raise doc.error(p + ("indices",), f"expected {sym.rank} indices")
        t = tuple(doc.index(p + ("indices", m), n) for m in range(len(idx)))
        fib = doc.get(p + ("fiber",), list)
        if len(fib) != r:
            raise doc.error(p + ("fiber",), f"expected {r} fiber entries")
        vals = [doc.poly(p + ("fiber", m), n) for m in range(r)]
        if t in comps:
            raise doc.error(p, f"duplicate component {[a + 1 for a in t]}")
        comps[t] = vals
    raw = TensorField.from_components(n, Full(sym.rank), comps, r)
    proj = project(sym, raw)
    return LoadedTensor(proj, _fixed_by(raw, proj))


def _fixed_by(raw: TensorField, proj: TensorField) -> bool:
    """Whether projecting left every component unchanged."""
    for t in raw.bundle.index_tuples:
        if raw[t] != proj[t]:
            return False
    return True


def _alpha(doc: _Doc, path: Path, key: str, n: int) -> Tuple[int, ...]:
    body = key.strip().strip("()[]")
    try:
        alpha = tuple(int(x) for x in body.split(",")) if body else ()
    except ValueError:
        raise doc.error(path, f"bad multi-index {key!r}") from None
    if len(alpha) != n or min(alpha, default=0) < 0:
        raise doc.error(path, f"multi-index {key!r} needs {n} nonnegative entries")
    return alpha


def load_jet(text, source: str = "<config>") -> JetSection:
    """``{n, order, fiber_rank, slots: {"a1,...,an": [poly, ...]}}``; omitted slots are zero."""
    doc = _doc(text, source)
    n = _positive(doc, ("n",))
    ell = _positive(doc, ("order",), 0)
    r = _positive(doc, ("fiber_rank",))
    J = JetBundle(n, ell, r)
    vals = [Poly.zero(n)] * J.dim
    for key in doc.get(("slots",), dict):
        alpha = _alpha(doc, ("slots", key), key, n)
        if sum(alpha) > ell:
            raise doc.error(("slots", key), f"slot {key!r} exceeds order {ell}")
        fib = doc.get(("slots", key), list)
        if len(fib) != r:
            raise doc.error(("slots", key), f"expected {r} fiber entries")
        for f in range(r):
            vals[J.slot(alpha, f)] = doc.poly(("slots", key, f), n)
    return JetSection(J, tuple(vals))


def load_connection(text, source: str = "<config>") -> ConnectionData:
    """``{n, k, fiber_rank, gammas: [{order_j, entries: [{lower, upper, matrix}]}]}``.

    Any ordering of ``lower`` (resp. ``upper``) names the same symmetric
    coefficient; repeating a coefficient with a different value is an error.
    """
    doc = _doc(text, source)
    n = _positive(doc, ("n",))
    k = _positive(doc, ("k",))
    r = _positive(doc, ("fiber_rank",))
    entries: Dict[Tuple[int, Tuple[int, ...], Tuple[int, ...]], Any] = {}
    canon: Dict[Tuple[int, Tuple[int, ...], Tuple[int, ...]], Any] = {}
    for gi, _ in enumerate(doc.get(("gammas",), list)):
        gp = ("gammas", gi)
        j = doc.get(gp + ("order_j",), int)
        if not 0 <= j < k:
            raise doc.error(gp + ("order_j",), f"order_j must lie in 0..{k - 1}")
        for ei, _ in enumerate(doc.get(gp + ("entries",), list)):
            ep = gp + ("entries", ei)
            lower = doc.get(ep + ("lower",), list)
            upper = doc.get(ep + ("upper",), list, required=False, default=[])
            if len(lower) != k or len(upper) != j:
                raise doc.error(ep, f"Gamma_{j} needs {k} lower and {j} upper indices")
            lo = tuple(doc.index(ep + ("lower", m), n) for m in range(k))
            up = tuple(doc.index(ep + ("upper", m), n) for m in range(j))
            rows = doc.get(ep + ("matrix",), list)
            if len(rows) != r:
                raise doc.error(ep + ("matrix",), f"matrix must be {r} x {r}")
            mat = []
            for a in range(r):
                row = doc.get(ep + ("matrix", a), list)
                if len(row) != r:
                    raise doc.error(ep + ("matrix", a), f"matrix must be {r} x {r}")
                mat.append(tuple(doc.poly(ep + ("matrix", a, b), n) for b in range(r)))
            mat = tuple(mat)
            key = (j, tuple(sorted(lo)), tuple(sorted(up)))
            if key in canon and canon[key] != mat:
                raise doc.error(ep, "conflicting values for the same symmetric coefficient")
            canon[key] = mat
            entries[key] = mat
    return ConnectionData.from_canonical(n, k, r, entries)


def load_prolong(text, source: str = "<config>") -> ProlongationProblem:
    """A connection document plus ``sigma``: rows over the canonical Sym^k (x) E coordinates."""
    doc = _doc(text, source)
    c = load_connection(doc, source)
    rows = []
    for i, row in enumerate(doc.get(("sigma",), list)):
        vals = []
        for m, _ in enumerate(doc.get(("sigma", i), list)):
            v = doc.get(("sigma", i, m), (str, int))
            try:
                vals.append(Fraction(v))
            except (ValueError, ZeroDivisionError):
                raise doc.error(("sigma", i, m), f"bad rational {v!r}") from None
        rows.append(tuple(vals))
    try:
        return ProlongationProblem(c, tuple(rows))
    except SigmaError as e:
        raise doc.error(("sigma",), str(e)) from None


DEFAULT_ELASTICITY_DEMO = {
    "schema_version": 1,
    "displacement": ["1 + x2 - x3", "2 - x1 + 4 x3", "3 + x1 - 4 x2"],
    "strain": {"n": 3, "symmetry": "Sym(2)",
               "components": [{"indices": [1, 1], "fiber": ["x2^2"]},
                              {"indices": [2, 2], "fiber": ["x1^2"]}]},
}


def load_elasticity(text, source: str = "<config>") -> Tuple[Tuple[Poly, ...], LoadedTensor | None]:
    """``{displacement: [p1, p2, p3], strain: <tensor record, optional>}`` on R^3."""
    doc = _doc(text, source)
    disp = doc.get(("displacement",), list)
    if len(disp) != 3:
        raise doc.error(("displacement",), "displacement needs 3 components")
    u = tuple(doc.poly(("displacement", i), 3) for i in range(3))
    strain = None
    if doc.get(("strain",), dict, required=False) is not None:
        strain = load_tensor(doc, source, ("strain",))
        if strain.field.n != 3 or str(strain.field.sym) != "Sym(2)":
            raise doc.error(("strain",), "strain must be a Sym(2) tensor on R^3")
    return u, strain
