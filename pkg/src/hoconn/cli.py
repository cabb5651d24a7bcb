"""Command-line front end.

Every subcommand prints a text table by default or a JSON document with
``--format json``. The JSON document never contains timings, so the same
config and seed always give byte-identical output. Exit codes: 0 when all
checks pass, 1 when a check fails, 2 for usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from . import __version__
from .config import (DEFAULT_ELASTICITY_DEMO, SCHEMA_VERSION, ConfigError, load_connection,
                     load_elasticity, load_prolong)
from .exactalg.poly import format_poly

__all__ = ["RunReport", "SUITES", "main", "run_suite"]

DEFAULT_SEED = 20240601


@dataclass
class RunReport:
    suite: str
    checks: List[dict] = field(default_factory=list)
    data: Dict[str, object] = field(default_factory=dict)
    timing: float = 0.0

    def add(self, check_id: str, ok: bool, detail: str = "") -> None:
        self.checks.append({"id": check_id, "status": "pass" if ok else "fail", "detail": detail})

    def extend(self, other: "RunReport") -> None:
        for c in other.checks:
            self.checks.append(dict(c, id=f"{other.suite}.{c['id']}"))

    @property
    def ok(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def to_json(self) -> str:
        doc = {"schema_version": SCHEMA_VERSION, "suite": self.suite, "ok": self.ok,
               "checks": self.checks, "data": self.data}
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"== {self.suite} =="]
        for c in self.checks:
            tail = f"  ({c['detail']})" if c["detail"] else ""
            lines.append(f"[{c['status'].upper()}] {c['id']}{tail}")
        npass = sum(c["status"] == "pass" for c in self.checks)
        lines.append(f"{npass}/{len(self.checks)} checks passed in {self.timing:.2f} s")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# verify-all suites


def _suite_exactalg(rng: random.Random, rep: RunReport) -> None:
    from .exactalg import linalg
    from .exactalg.poly import parse_poly
    from .jets import random_poly
    ok_ring = ok_parse = True
    for _ in range(10):
        a, b, c = (random_poly(rng, 3, 3) for _ in range(3))
        ok_ring &= a * (b + c) == a * b + a * c and (a * b) * c == a * (b * c)
        ok_parse &= parse_poly(format_poly(a), 3) == a
    rep.add("ring-axioms", ok_ring)
    rep.add("literal-roundtrip", ok_parse)
    agree = True
    for _ in range(10):
        rows = [[rng.randint(-3, 3) if rng.random() < 0.5 else 0 for _ in range(8)] for _ in range(6)]
        agree &= linalg.rank_int(rows, 8, "python") == linalg.rank_int(rows, 8)
    rep.add("rank-backends-agree", agree, f"backend {linalg.BACKEND}")


def _suite_tensor(rng: random.Random, rep: RunReport) -> None:
    from .symmetry import Theta, dimension, hook_content_dimension, theta_shape
    from .tensor import nearrow_hom
    ok = all(dimension(Theta(p, q), n) == hook_content_dimension(theta_shape(p, q), n)
             for n in range(1, 5) for p in range(1, n + 1) for q in range(0, 4))
    rep.add("theta-dimension-hook-formula", ok)
    ranks = [nearrow_hom(3, p).fiber_rank() for p in range(3)]
    rep.add("nearrow-fiber-ranks", ranks == [3, 9, 3], f"ranks {ranks}")


def _suite_jets(rng: random.Random, rep: RunReport) -> None:
    from .jets import check_diagram4
    for k, n in ((2, 2), (3, 2)):
        d = check_diagram4(k, n, samples=5, deg=3, seed=rng.randrange(10 ** 6))
        rep.add(f"jet-diagram-k{k}-n{n}", d.ok, "; ".join(d.failures))


def _suite_connection(rng: random.Random, rep: RunReport) -> None:
    from .connection import ConnectionData, curvature, roundtrip_check
    from .operators import OrderError
    rep.add("flat-model-zero-curvature",
            all(curvature(ConnectionData.flat(n, k)).is_zero() for n in (1, 2, 3) for k in (1, 2, 3)))
    drop = trip = True
    for _ in range(4):
        c = ConnectionData.random(rng, rng.choice((2, 3)), 2, rng.choice((1, 2)), deg=1)
        try:
            curvature(c)
        except OrderError:
            drop = False
        trip &= roundtrip_check(c).ok
    rep.add("order-drop", drop)
    rep.add("jet-roundtrip", trip)


def _suite_complexes(rng: random.Random, rep: RunReport) -> None:
    from .complexes import (KillingTypeOperator, build_bgg_flat, elasticity_complex, exactness_check,
                            random_shift, saint_venant_flat, second_operator_chase, splitting_independent,
                            tractor2_coupled)
    rep.add("tractor-flat", all(tractor2_coupled(n).compositions_zero()[0] for n in (2, 3, 4)))
    bgg = exactness_check(build_bgg_flat(2, 2), 4)
    rep.add("bgg-n2-k2-exact", bgg.ok)
    rep.add("flat-chase-saint-venant", second_operator_chase(KillingTypeOperator.flat(3)).equals(saint_venant_flat(3)))
    kt = KillingTypeOperator.random(rng, 2)
    rep.add("splitting-independence", splitting_independent(kt, random_shift(rng, 2)))
    ela = elasticity_complex()
    rep.add("elasticity-compositions", all(ela.compositions_zero()))


def _suite_prolong(rng: random.Random, rep: RunReport) -> None:
    from .prolong import laplacian_problem, solution_equivalence_check
    r = solution_equivalence_check(laplacian_problem(2), 5)
    dims = [row["system"] for row in r.rows]
    rep.add("laplacian-equivalence", r.ok and dims == [1] + [2] * 5, f"slice dims {dims}")


SUITES: Dict[str, Callable[[random.Random, RunReport], None]] = {
    "exactalg": _suite_exactalg, "tensor": _suite_tensor, "jets": _suite_jets,
    "connection": _suite_connection, "complexes": _suite_complexes, "prolong": _suite_prolong,
}


def run_suite(name: str, seed: int) -> RunReport:
    rep = RunReport(name)
    t0 = time.perf_counter()
    SUITES[name](random.Random(f"{seed}:{name}"), rep)
    rep.timing = time.perf_counter() - t0
    return rep


def cmd_verify_all(args) -> RunReport:
    names = list(SUITES) if not args.only else args.only
    unknown = [m for m in names if m not in SUITES]
    if unknown:
        raise ConfigError(f"unknown module(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}", source="--only")
    total = RunReport("verify-all")
    t0 = time.perf_counter()
    for name in names:
        total.extend(run_suite(name, args.seed))
    total.timing = time.perf_counter() - t0
    total.data = {"modules": names, "seed": args.seed, "check_count": len(total.checks)}
    return total


# ---------------------------------------------------------------------------
# single-purpose commands


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None


def _op_table(d: dict, limit: Optional[int] = None) -> List[str]:
    lines = [f"  {d['source']} -> {d['target']}, order {d['order']}, {len(d['terms'])} nonzero coefficients"]
    terms = d["terms"] if limit is None else d["terms"][:limit]
    for t in terms:
        alpha = "".join(str(a) for a in t["alpha"])
        lines.append(f"  d^{alpha}  {t['target']} <- {t['source']}: {t['coeff']}")
    if limit is not None and len(d["terms"]) > limit:
        lines.append(f"  ... {len(d['terms']) - limit} more")
    return lines


def cmd_curvature(args) -> RunReport:
    from .connection import ConnectionData, curvature
    from .operators import OrderError
    if args.config:
        c = load_connection(_read(args.config), args.config)
    else:
        c = ConnectionData.flat(args.n, args.k)
    rep = RunReport("curvature")
    try:
        op = curvature(c)
    except OrderError as e:
        rep.add("order <= k-1", False, str(e))
        return rep
    rep.add("order <= k-1", op.order <= c.k - 1, f"order {op.order}")
    if c.is_flat_model:
        rep.add("flat model has zero curvature", op.is_zero())
    rep.data = {"n": c.n, "k": c.k, "fiber_rank": c.r, "is_zero": op.is_zero(), "operator": op.to_dict(),
                "notes": list(c.load_notes)}
    rep.data["text"] = ["curvature operator:"] + (["  zero operator"] if op.is_zero() else _op_table(op.to_dict()))
    return rep


def cmd_bgg_check(args) -> RunReport:
    from .complexes import build_bgg_flat, exactness_check
    cs = build_bgg_flat(args.n, args.k)
    ex = exactness_check(cs, args.dmax)
    rep = RunReport("bgg-check")
    rep.add("compositions zero", all(ex.composable_zero))
    for row in ex.rows:
        rep.add(f"spot{row['spot']}-d{row['degree']}", row["homology"] == 0,
                f"{row['bundle']}: ker {row['kernel']}, im {row['image']}, H {row['homology']}")
    rep.data = {"n": args.n, "k": args.k, "dmax": args.dmax, "rows": ex.rows,
                "operators": [f"{op.name}: {op.source.name} -> {op.target.name}" for op in cs.ops]}
    text = ["spot  bundle              degree  kernel  image  homology"]
    for row in ex.rows:
        text.append(f"{row['spot']:>4}  {row['bundle']:<18}  {row['degree']:>6}  {row['kernel']:>6}  "
                    f"{row['image']:>5}  {row['homology']:>8}")
    rep.data["text"] = text
    return rep


def cmd_prolong(args) -> RunReport:
    from .prolong import assemble_system, laplacian_problem, solution_equivalence_check
    p = load_prolong(_read(args.config), args.config) if args.config else laplacian_problem(2)
    system = assemble_system(p)
    eq = solution_equivalence_check(p, args.dmax, system)
    rep = RunReport("prolong")
    for name, ok in eq.checks:
        rep.add(name, ok)
    rep.data = {"block_operator": system.op.to_dict(), "K_dimension": p.K.dim, "rows": eq.rows}
    text = ["block operator:"] + _op_table(system.op.to_dict(), limit=12)
    text.append("degree  ker D  system")
    for row in eq.rows:
        text.append(f"{row['degree']:>6}  {row['D_kernel']:>5}  {row['system']:>6}")
    rep.data["text"] = text
    return rep


def cmd_elasticity(args) -> RunReport:
    from .complexes import elasticity_complex
    text = _read(args.config) if args.config else json.dumps(DEFAULT_ELASTICITY_DEMO, indent=2)
    u, h = load_elasticity(text, args.config or "<demo>")
    strain_op, cc, div = elasticity_complex().ops
    strain = strain_op.apply(u)
    rep = RunReport("elasticity")
    rep.add("stress of strain(u) vanishes", not any(cc.apply(strain)))
    fields: Dict[str, object] = {"displacement": [format_poly(v) for v in u],
                                 "strain": _sym_dict(strain_op.target, strain)}
    if h is not None:
        stress = cc.apply(h.field.values)
        load = div.apply(stress)
        rep.add("load of stress(h) vanishes", not any(load))
        fields.update({"input_strain_was_symmetric": h.was_symmetric,
                       "stress": _sym_dict(cc.target, stress), "load": [format_poly(v) for v in load]})
    rep.data = fields
    out = [f"displacement: {', '.join(fields['displacement'])}"]
    out.append("strain of displacement: " + (_fmt_sym(fields["strain"]) or "0"))
    if h is not None:
        out.append("stress = curl curl h: " + (_fmt_sym(fields["stress"]) or "0"))
        out.append(f"load = div stress: {', '.join(fields['load'])}")
    rep.data["text"] = out
    return rep


def _sym_dict(bundle, values) -> Dict[str, str]:
    out = {}
    for t in bundle.index_tuples:
        if list(t) == sorted(t):
            v = values[bundle.comp(t, 0)]
            if v:
                out["".join(str(a + 1) for a in t)] = format_poly(v)
    return out


def _fmt_sym(d: Dict[str, str]) -> str:
    return "; ".join(f"[{k}] {v}" for k, v in d.items())


def cmd_theta_dim(args) -> RunReport:
    from .symmetry import Theta, dimension, hook_content_dimension, theta_shape
    rep = RunReport("theta-dim")
    table = []
    for p in range(1, args.n + 1):
        for q in range(0, args.k + 1):
            d = dimension(Theta(p, q), args.n)
            h = hook_content_dimension(theta_shape(p, q), args.n)
            table.append({"p": p, "q": q, "dimension": d})
            rep.add(f"Theta({p},{q})", d == h, f"dim {d}, hook formula {h}")
    rep.data = {"n": args.n, "table": table,
                "text": ["p  q  dim Theta(p,q)"] + [f"{r['p']}  {r['q']}  {r['dimension']}" for r in table]}
    return rep


COMMANDS = {"verify-all": cmd_verify_all, "curvature": cmd_curvature, "bgg-check": cmd_bgg_check,
            "prolong": cmd_prolong, "elasticity": cmd_elasticity, "theta-dim": cmd_theta_dim}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hoconn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify-all", parents=[common], help="run every module's property checks")
    v.add_argument("--only", action="append", metavar="MODULE", help=f"one of {', '.join(SUITES)}")
    c = sub.add_parser("curvature", parents=[common], help="curvature of a higher order connection")
    c.add_argument("--config")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--k", type=int, default=2)
    b = sub.add_parser("bgg-check", parents=[common], help="local exactness of the flat BGG complex")
    b.add_argument("--n", type=int, default=2)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--dmax", type=int, default=4)
    p = sub.add_parser("prolong", parents=[common], help="prolongation of D = sigma o nabla^(k)")
    p.add_argument("--config")
    p.add_argument("--dmax", type=int, default=6)
    e = sub.add_parser("elasticity", parents=[common], help="displacement, strain, stress, load")
    e.add_argument("--config")
    e.add_argument("--demo", action="store_true", help="use the built-in demo data")
    t = sub.add_parser("theta-dim", parents=[common], help="dimensions of Theta(p,q)")
    t.add_argument("--n", type=int, default=3)
    t.add_argument("--k", type=int, default=3)
    return ap


def _validate(args, ap: argparse.ArgumentParser) -> None:
    for name in ("n", "k", "dmax"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "dmax" else 1):
            ap.error(f"--{name} must be {'>= 0' if name == 'dmax' else '>= 1'}")
    if args.command == "elasticity" and not args.demo and not args.config:
        ap.error("elasticity needs --demo or --config")


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _validate(args, ap)
    try:
        rep = COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.format == "json":
        data = dict(rep.data)
        data.pop("text", None)
        rep.data = data
        print(rep.to_json())
    else:
        for line in rep.data.get("text", []):
            print(line)
        print(rep.to_text())
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
