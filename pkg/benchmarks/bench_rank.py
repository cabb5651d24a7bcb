"""Compare the compiled rank kernel with the pure-Python fallback.

Two workloads: random sparse integer matrices, and the degree slices of the
flat BGG complex that the exactness checks actually rank. Dense random
matrices overflow int64 during elimination, so the compiled kernel hands
them back to the big-integer fallback and the speedup there is about 1x;
the sparse slice matrices stay in int64 and show the real gain.

    python3 benchmarks/bench_rank.py [--repeat 3] [--sizes 40 80 120]
"""

from __future__ import annotations

import argparse
import random
import time

from hoconn.complexes import build_bgg_flat
from hoconn.exactalg import linalg
from hoconn.exactalg.slices import slice_columns


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def random_matrix(rng: random.Random, m: int, n: int, density: float = 0.3):
    return [[rng.randint(-9, 9) if rng.random() < density else 0 for _ in range(n)] for _ in range(m)]


def slice_matrix(n: int, k: int, spot: int, d: int):
    op = build_bgg_flat(n, k).ops[spot]
    cols = slice_columns(op, d)[0]
    used = sorted({i for c in cols for i in c})
    pos = {i: j for j, i in enumerate(used)}
    rows = []
    for c in cols:
        r = [0] * len(used)
        for i, v in c.items():
            r[pos[i]] = v
        rows.append(r)
    return linalg._integer_rows(rows, len(used)), len(used)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 80, 120])
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if linalg.BACKEND != "compiled":
        print("compiled kernel unavailable; only the fallback can be timed")
    rng = random.Random(args.seed)
    cases = [(f"random {s}x{s}", random_matrix(rng, s, s), s) for s in args.sizes]
    for n, k, spot, d in ((2, 3, 1, 6), (3, 2, 1, 4), (3, 2, 2, 4)):
        rows, ncols = slice_matrix(n, k, spot, d)
        cases.append((f"BGG n={n} k={k} op {spot} d={d} ({len(rows)}x{ncols})", rows, ncols))
    print(f"{'case':<40} {'rank':>5} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for name, rows, ncols in cases:
        r_py = linalg.rank_int(rows, ncols, "python")
        t_py = _time(lambda: linalg.rank_int(rows, ncols, "python"), args.repeat)
        if linalg.BACKEND == "compiled":
            r_c = linalg.rank_int(rows, ncols, "compiled")
            assert r_c == r_py, f"backends disagree on {name}"
            t_c = _time(lambda: linalg.rank_int(rows, ncols, "compiled"), args.repeat)
            print(f"{name:<40} {r_py:>5} {t_py:>10.4f} {t_c:>11.4f} {t_py / t_c:>7.1f}x")
        else:
            print(f"{name:<40} {r_py:>5} {t_py:>10.4f} {'-':>11} {'-':>8}")


if __name__ == "__main__":
    main()
