"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (lines go straight to the
terminal) or ``python3 tests/test_acceptance.py`` for the bare table.
"""
import random
import time
from functools import lru_cache
from itertools import product

import pytest

from hoconn.complexes import (KillingTypeOperator, build_bgg_flat, chase_obstruction, elasticity_complex,
                              epsilon_conjugate, exactness_check, killing_flat, random_shift,
                              saint_venant_flat, second_operator_chase, splitting_independent,
                              tractor2_coupled, tractor5_curvature)
from hoconn.connection import ConnectionData, curvature, jet_connection, jet_curvature, roundtrip_check
from hoconn.exactalg.linalg import rank
from hoconn.exactalg.poly import Poly
from hoconn.exactalg.slices import slice_dims
from hoconn.jets import jet_op, projection_op, random_section, spencer_op
from hoconn.prolong import laplacian_problem, solution_equivalence_check
from hoconn.tensor import TensorField, curl, epsilon, projector_op

SEED = 20240601
POPULATION = 24


@lru_cache(maxsize=None)
def population():
    """Randomized connections with k <= 3, n <= 3, r <= 2 and Gamma of degree <= 2."""
    rng = random.Random(SEED)
    out = []
    for i in range(POPULATION):
        k, n, r = 1 + i % 3, rng.randint(1, 3), rng.randint(1, 2)
        out.append(ConnectionData.random(rng, n, k, r, deg=2))
    return tuple(out)


def report(label, ok, elapsed, limit=None, detail=""):
    within = limit is None or elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    line = f"[{status}] {label}: {elapsed:.2f} s{budget}"
    return status == "PASS", line + (f"  {detail}" if detail else "")


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, time.perf_counter() - t0, detail


# -- criteria -----------------------------------------------------------------


def c1_tractor_flat():
    fails = [n for n in (1, 2, 3, 4) if not all(tractor2_coupled(n).compositions_zero())]
    return not fails, f"n = 1..4, failing n: {fails or 'none'}"


def c2_flat_curvature():
    fails = [(k, n) for k in (1, 2, 3) for n in (1, 2, 3) if not curvature(ConnectionData.flat(n, k)).is_zero()]
    return not fails, f"9 (k, n) pairs, failing: {fails or 'none'}"


def c3_order_drop():
    bad = []
    for i, c in enumerate(population()):
        try:
            op = curvature(c)
        except Exception as exc:  # an order error means the top part survived
            bad.append((i, type(exc).__name__))
            continue
        if op.part(c.k).coeffs or op.order >= c.k:
            bad.append((i, op.order))
    return not bad, f"{len(population())} connections, failing: {bad or 'none'}"


def c4_round_trip():
    bad = []
    for i, c in enumerate(population()):
        rep = roundtrip_check(c)
        if not rep.ok:
            bad.append((i, rep.failures))
    rng = random.Random(SEED + 4)
    curved = [c for c in population() if c.k >= 2]
    jets = 0
    for j in range(50):
        c = curved[j % len(curved)]
        lhs = projection_op(c.n, c.k - 1, c.r, 1) @ jet_connection(c).op
        S = spencer_op(c.n, c.k - 1, c.r)
        u = random_section(rng, lhs.source, 3)
        if lhs.apply(u) != S.apply(u):
            bad.append(("spencer", j))
        jets += 1
    return not bad, f"{len(population())} round trips, {jets} jets, failing: {bad or 'none'}"


def c5_jet_curvature():
    bad = []
    checked = 0
    for i, c in enumerate(population()):
        if c.n < 2:
            continue
        jc = jet_curvature(c)
        kt = jc.kappa_theta
        fixed = (projector_op(kt.target) @ kt).equals(kt)
        agrees = (kt @ jet_op(c.n, c.k - 1, c.r)).equals(curvature(c))
        checked += 1
        if not (fixed and agrees and jc.is_homomorphism):
            bad.append(i)
    return not bad and checked > 0, f"{checked} connections with n >= 2, failing: {bad or 'none'}"


def c6_bgg_exact():
    rows = []
    bad = []
    for n, k in ((2, 2), (2, 3), (3, 2)):
        rep = exactness_check(build_bgg_flat(n, k), 6)
        rows.append(len(rep.rows))
        if not rep.ok:
            bad.append((n, k))
    return not bad, f"{sum(rows)} (spot, degree) slices, failing: {bad or 'none'}"


def c7a_flat_chase():
    ok = all(second_operator_chase(KillingTypeOperator.flat(n)).equals(saint_venant_flat(n)) for n in (2, 3))
    return ok, "n = 2, 3"


def c7b_curved_chase():
    rng = random.Random(SEED + 7)
    nonzero = 0
    for _ in range(10):
        kt = KillingTypeOperator.random(rng, 2, deg=1)
        if not (second_operator_chase(kt) @ kt.D).is_zero():
            nonzero += 1
    return nonzero == 0, f"chase o D nonzero for {nonzero}/10 random kt (see the obstruction rows below)"


def c7b_obstruction_identity():
    rng = random.Random(SEED + 7)
    bad = 0
    for _ in range(10):
        kt = KillingTypeOperator.random(rng, 2, deg=1)
        if not (second_operator_chase(kt) @ kt.D).equals(chase_obstruction(kt)):
            bad += 1
    return bad == 0, f"chase o D equals the tractor curvature composite for {10 - bad}/10 kt"


def c7b_flat_tractor_subclass():
    rng = random.Random(SEED + 71)
    bad = 0
    for _ in range(10):
        kt = KillingTypeOperator.flat(2).shifted(random_shift(rng, 2))
        if not (tractor5_curvature(kt).is_zero() and (second_operator_chase(kt) @ kt.D).is_zero()):
            bad += 1
    return bad == 0, f"chase o D = 0 for {10 - bad}/10 kt with flat tractor connection"


def c7c_curl_curl():
    cc = epsilon_conjugate() @ saint_venant_flat(3)
    rng = random.Random(SEED + 73)
    ok = True
    for _ in range(5):
        h = TensorField(cc.source, random_section(rng, cc.source, 3))
        ok &= cc.apply(h.values) == curl(curl(h, 0), 1).values
    return ok, "5 random symmetric fields, n = 3"


def c8_splitting():
    rng = random.Random(SEED + 8)
    bad = 0
    for i in range(12):
        kt = KillingTypeOperator.random(rng, 2 + i % 2, deg=1)
        if not splitting_independent(kt, random_shift(rng, kt.n)):
            bad += 1
    return bad == 0, f"12 random shifts, failing: {bad}"


def _rigid_motions():
    n = 3
    x = [Poly.monomial(tuple(int(i == j) for j in range(n))) for i in range(n)]
    out = []
    for i in range(n):
        out.append(tuple(Poly.const(n, int(i == j)) for j in range(n)))
    for b in range(n):
        out.append(tuple(sum((x[k].scale(epsilon(i, b, k)) for k in range(n)), Poly.zero(n)) for i in range(n)))
    return out


def c9_elasticity():
    cs = elasticity_complex()
    comps = all(cs.compositions_zero())
    strain = cs.ops[0]
    motions = _rigid_motions()
    killed = all(not any(strain.apply(u)) for u in motions)
    monos = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    vecs = [[u[i].terms.get(m, 0) for i in range(3) for m in monos] for u in motions]
    span = rank(vecs) == 6
    kernel = sum(c - r for c, r in (slice_dims(strain, d) for d in (0, 1)))
    rep = exactness_check(cs, 5, spots=[2])
    stress = rep.ok and set(rep.homology_at(2).values()) == {0}
    ok = comps and killed and span and kernel == 6 and stress
    return ok, f"kernel(deg <= 1) = {kernel}, rigid motions rank {6 if span else '< 6'}, stress homology zero: {stress}"


def c10_laplacian():
    rep = solution_equivalence_check(laplacian_problem(2), 8)
    got = [r["system"] for r in rep.rows]
    want = [1] + [2] * 8
    return rep.ok and got == want, f"per-degree dims {got}"


CRITERIA = [
    ("1", "tractor connection flat, n <= 4", c1_tractor_flat, 1.0),
    ("2", "flat model has zero curvature, k, n <= 3", c2_flat_curvature, 1.0),
    ("3", "curvature drops order on random connections", c3_order_drop, 30.0),
    ("4", "round trip and (Id x pi) o nabla = S", c4_round_trip, None),
    ("5", "jet curvature in Theta and kappa o j = curvature", c5_jet_curvature, None),
    ("6", "BGG exactness (2,2) (2,3) (3,2), degree <= 6", c6_bgg_exact, 120.0),
    ("7a", "flat chase is Saint Venant", c7a_flat_chase, None),
    ("7b", "chase o D = 0 for 10 random curved kt", c7b_curved_chase, None),
    ("7b-i", "chase o D equals the obstruction composite", c7b_obstruction_identity, None),
    ("7b-ii", "chase o D = 0 when the tractor curvature vanishes", c7b_flat_tractor_subclass, None),
    ("7c", "epsilon conjugate of Saint Venant is curl curl", c7c_curl_curl, None),
    ("8", "tractor connection independent of splitting", c8_splitting, None),
    ("9", "elasticity complex in n = 3", c9_elasticity, 60.0),
    ("10", "Laplacian prolongation dims, degree <= 8", c10_laplacian, 30.0),
]

# criterion 7b fails for curved kt: chase o D equals a nonzero curvature composite
EXPECTED_RED = {"7b"}


def run_criterion(key, label, fn, limit):
    ok, elapsed, detail = _timed(fn)
    return report(f"criterion {key}: {label}", ok, elapsed, limit, detail)


@pytest.mark.parametrize("key,label,fn,limit", [
    pytest.param(*row, id=row[0],
                 marks=[pytest.mark.xfail(strict=True, reason="chase o D is the nonzero obstruction for curved kt")]
                 if row[0] in EXPECTED_RED else [])
    for row in CRITERIA
])
def test_criterion(key, label, fn, limit, capsys):
    ok, line = run_criterion(key, label, fn, limit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    for row in CRITERIA:
        print(run_criterion(*row)[1])
