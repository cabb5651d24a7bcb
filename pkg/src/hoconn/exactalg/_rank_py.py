"""Pure-Python integer rank kernel (reference and fallback for ``_rank_ext``).

Fraction-free row elimination on integer rows. After each update the row is
divided by the gcd of its entries, which keeps entries small for the sparse,
small-coefficient matrices produced by derivative slices.
"""

from math import gcd


def _normalize(row):
    g = 0
    for v in row:
        if v:
            g = gcd(g, v)
            if g == 1:
                return row
    if g > 1:
        return [v // g for v in row]
    return row


def rank_int(rows, ncols):
    """Rank over Q of an integer matrix given as a list of row lists."""
    a = [list(r) for r in rows if any(r)]
    rank = 0
    m = len(a)
    for col in range(ncols):
        if rank == m:
            break
        piv = -1
        best = 0
        for i in range(rank, m):
            v = a[i][col]
            if v and (piv < 0 or abs(v) < best):
                piv, best = i, abs(v)
                if best == 1:
                    break
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        p = prow[col]
        nz = [j for j in range(col + 1, ncols) if prow[j]]
        for i in range(rank + 1, m):
            row = a[i]
            f = row[col]
            if not f:
                continue
            g = gcd(p, f)
            mp, mf = p // g, f // g
            if mp != 1:
                for j in range(col + 1, ncols):
                    if row[j]:
                        row[j] *= mp
            for j in nz:
                row[j] -= mf * prow[j]
            row[col] = 0
            a[i] = _normalize(row)
        rank += 1
    return rank
