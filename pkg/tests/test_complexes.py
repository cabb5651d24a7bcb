import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoconn.bundles import EBundle
from hoconn.complexes import (KillingTypeOperator, broken_complex, build_bgg_flat, build_full_coupled_bgg, flat_bgg_op,
                              chase_obstruction, chase_parts, de_rham_complex, elasticity_complex,
                              epsilon_conjugate, exactness_check, killing_flat, random_shift, relabel,
                              saint_venant_flat, second_operator_chase, splitting_independent,
                              tractor2_bundle, tractor2_connection, tractor2_coupled, tractor5_bundle,
                              tractor5_connection, tractor5_curvature)
from hoconn.connection import ConnectionData, curvature
from hoconn.exactalg.poly import Poly, parse_poly
from hoconn.exactalg.slices import slice_dims
from hoconn.jets import random_poly, random_section
from hoconn.tensor import Sym, TensorField, curl, epsilon, projector_op

seeds = st.integers(0, 10 ** 6)
half = Fraction(1, 2)


def P(text, n):
    return parse_poly(text, n)


# -- tractor connection on Lambda^0 + Lambda^1 ------------------------------------


def test_tractor_example():
    n = 2
    nab = tractor2_connection(n)
    T = tractor2_bundle(n)
    out = nab.apply((P("x1 x2", n), P("x1", n), Poly.zero(n)))
    tgt = nab.target
    assert out[tgt.comp((0,), 0)] == P("x2 - x1", n)
    assert (out[tgt.comp((0,), 1)], out[tgt.comp((0,), 2)]) == (Poly.const(n, 1), Poly.zero(n))
    assert T.dim == 3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_tractor_flat(n):
    cs = tractor2_coupled(n)
    assert all(cs.compositions_zero())


@given(seeds)
@settings(max_examples=10)
def test_tractor_curvature_kills_random_sections(seed):
    rng = random.Random(seed)
    cs = tractor2_coupled(3)
    s = random_section(rng, cs.ops[0].source, 4)
    assert not any(cs.ops[1].apply(cs.ops[0].apply(s)))


def test_tractor_gradient_first_slot_vanishes():
    n = 3
    f = P("x1^2 x3 - x2 x3 + 4", n)
    out = tractor2_connection(n).apply((f,) + tuple(f.derive(a) for a in range(n)))
    tgt = tractor2_connection(n).target
    assert all(not out[tgt.comp((a,), 0)] for a in range(n))


# -- flat BGG ----------------------------------------------------------------


def test_k1_is_de_rham():
    bgg, dr = build_bgg_flat(2, 1), de_rham_complex(2)
    for a, b in zip(bgg.ops, dr.ops):
        assert relabel(a, source=b.source, target=b.target).equals(b)


def test_second_operator_kills_hessians_and_sees_x2():
    n = 2
    op = build_bgg_flat(n, 2).ops[1]
    src = op.source
    f = P("x1^3 x2 + x2^4 - x1 x2", n)
    hess = [Poly.zero(n)] * src.dim
    for t in src.index_tuples:
        hess[src.comp(t)] = f.derive(t[0]).derive(t[1])
    assert not any(op.apply(tuple(hess)))
    w = [Poly.zero(n)] * src.dim
    w[src.comp((0, 0))] = P("x2", n)
    out = op.apply(tuple(w))

    def omega(b, c):
        return P("x2", n) if (b, c) == (0, 0) else Poly.zero(n)
    for a, b, c in product(range(n), repeat=3):
        expect = (omega(b, c).derive(a) - omega(a, c).derive(b)).scale(half)
        assert out[op.target.comp((a, b, c))] == expect
    assert out[op.target.comp((1, 0, 0))] == Poly.const(n, half)


def test_de_rham_exact():
    rep = exactness_check(de_rham_complex(2), 6)
    assert rep.ok and all(r["homology"] == 0 for r in rep.rows)


@pytest.mark.parametrize("n,k,dmax", [(2, 2, 6), (2, 3, 5), (3, 2, 4)])
def test_bgg_exact(n, k, dmax):
    cs = build_bgg_flat(n, k)
    assert all(cs.compositions_zero())
    rep = exactness_check(cs, dmax)
    assert rep.ok


@pytest.mark.parametrize("n,p,k", [(2, 1, 2), (3, 1, 2), (2, 1, 3), (3, 2, 2)])
def test_projection_redundant_on_theta(n, p, k):
    a, b = flat_bgg_op(n, p, k), flat_bgg_op(n, p, k, project=False)
    rng = random.Random(n + p + k)
    s = projector_op(a.source).apply(random_section(rng, a.source, 3))
    assert a.apply(s) == b.apply(s)


def test_hessian_kernel_is_affine():
    d2 = build_bgg_flat(2, 2).ops[0]
    dims = [slice_dims(d2, d) for d in range(5)]
    kernel = [c - r for c, r in dims]
    assert kernel == [1, 2, 0, 0, 0] and sum(kernel) == 3


def test_broken_complex_shows_homology():
    cs = broken_complex(build_bgg_flat(2, 2), 1)
    rep = exactness_check(cs, 4)
    assert not rep.ok
    assert any(r["homology"] != 0 for r in rep.rows)


# -- Saint Venant ------------------------------------------------------------


def _sym_field(n, fn):
    b = saint_venant_flat(n).source
    vals = [Poly.zero(n)] * b.dim
    for t in b.index_tuples:
        vals[b.comp(t)] = fn(*t)
    return tuple(vals)


@given(seeds)
@settings(max_examples=10)
def test_saint_venant_kills_strains(seed):
    rng = random.Random(seed)
    n = 3
    phi = tuple(random_poly(rng, n, 3) for _ in range(n))
    h = killing_flat(n).apply(phi)
    assert not any(saint_venant_flat(n).apply(h))
    f = random_poly(rng, n, 4)
    assert not any(saint_venant_flat(n).apply(_sym_field(n, lambda a, b: f.derive(a).derive(b))))


def test_saint_venant_example():
    n = 2
    h = {(0, 0): P("x2^2", n), (1, 1): P("x1^2", n)}
    sv = saint_venant_flat(n)
    out = sv.apply(_sym_field(n, lambda a, b: h.get((a, b), Poly.zero(n))))
    assert out[sv.target.comp((0, 1, 0, 1))] == Poly.const(n, 4)


# -- Killing-type tractor connection and the chase ---------------------------


def _t5(kt, phi, mu):
    """Section of T from phi (per F component) and a dict mu[(b, c)] (antisymmetric)."""
    T = tractor5_bundle(kt.n, kt.r)
    G = T.parts[1]
    vals = list(phi) + [Poly.zero(kt.n)] * G.dim
    for (b, c), v in mu.items():
        vals[T.offsets[1] + G.comp((b, c))] = v
        vals[T.offsets[1] + G.comp((c, b))] = -v
    return tuple(vals)


def test_flat_tractor5_slots():
    n = 3
    kt = KillingTypeOperator.flat(n)
    nab = tractor5_connection(kt)
    T, tgt = tractor5_bundle(n), nab.target
    G = T.parts[1]
    phi = (P("x1 x2", n), P("x3^2", n), P("x1", n))
    out = nab.apply(_t5(kt, phi, {}))
    for a, b in product(range(n), repeat=2):
        assert out[tgt.comp((a,), b)] == phi[b].derive(a)
    m12 = P("x1 x3^2", n)
    out = nab.apply(_t5(kt, (Poly.zero(n),) * n, {(0, 1): m12}))

    def mu(b, c):
        return m12 if (b, c) == (0, 1) else -m12 if (b, c) == (1, 0) else Poly.zero(n)

    def Y(a, b, c):
        return (mu(b, c).derive(a) - mu(a, c).derive(b)).scale(half)
    for a, b, c in product(range(n), repeat=3):
        expect = Y(a, b, c) - Y(a, c, b) - Y(b, c, a)
        assert out[tgt.comp((a,), T.offsets[1] + G.comp((b, c)))] == expect


@pytest.mark.parametrize("n", [2, 3])
def test_flat_chase_is_saint_venant(n):
    assert second_operator_chase(KillingTypeOperator.flat(n)).equals(saint_venant_flat(n))


def test_epsilon_conjugate_is_curl_curl():
    cc = epsilon_conjugate() @ saint_venant_flat(3)
    rng = random.Random(2)
    for _ in range(3):
        h = TensorField(cc.source, random_section(rng, cc.source, 3))
        direct = curl(curl(h, 0), 1)
        assert cc.apply(h.values) == direct.values


@given(seeds)
@settings(max_examples=5)
def test_curved_chase_structure(seed):
    rng = random.Random(seed)
    kt = KillingTypeOperator.random(rng, 2, deg=1)
    parts = chase_parts(kt)
    assert parts.residual.is_zero()
    assert parts.output.lands_in_target()
    assert parts.output.part(2).equals(saint_venant_flat(2).part(2))


@given(seeds)
@settings(max_examples=4)
def test_chase_obstruction_identity(seed):
    """chase o D equals the curvature composite built from W = nabla^T o nabla^T."""
    rng = random.Random(seed)
    kt = KillingTypeOperator.random(rng, 2, deg=1)
    comp = second_operator_chase(kt) @ kt.D
    assert comp.equals(chase_obstruction(kt))


@given(seeds)
@settings(max_examples=4)
def test_chase_complex_when_tractor_flat(seed):
    rng = random.Random(seed)
    kt = KillingTypeOperator.flat(2).shifted(random_shift(rng, 2))
    assert tractor5_curvature(kt).is_zero()
    assert (second_operator_chase(kt) @ kt.D).is_zero()


@given(seeds)
@settings(max_examples=4)
def test_splitting_independence(seed):
    rng = random.Random(seed)
    kt = KillingTypeOperator.random(rng, 2, deg=1)
    assert splitting_independent(kt, random_shift(rng, 2))
    assert kt.shifted(random_shift(rng, 2)).D.equals(kt.D)


# -- elasticity --------------------------------------------------------------


def test_rigid_motion_has_zero_strain():
    n = 3
    a, b = (1, -2, 5), (3, 0, -1)
    x = [P(f"x{i + 1}", n) for i in range(n)]
    u = []
    for i in range(n):
        cross = sum((x[k].scale(epsilon(i, j, k) * b[j]) for j in range(n) for k in range(n)), Poly.zero(n))
        u.append(Poly.const(n, a[i]) + cross)
    assert not any(killing_flat(3).apply(tuple(u)))


def test_elasticity_complex():
    cs = elasticity_complex()
    assert all(cs.compositions_zero())
    strain = cs.ops[0]
    kernel = [c - r for c, r in (slice_dims(strain, d) for d in range(4))]
    assert kernel[:2] == [3, 3] and sum(kernel) == 6
    rep = exactness_check(cs, 5, spots=[2])
    assert rep.ok and set(rep.homology_at(2).values()) == {0}


def test_load_is_divergence():
    load = elasticity_complex().ops[2]
    S = load.source
    s = projector_op(S).apply(random_section(random.Random(3), S, 3))
    div = tuple(sum((s[S.comp((i, j))].derive(j) for j in range(3)), Poly.zero(3)) for i in range(3))
    assert load.apply(s) == div


# -- coupled BGG from a higher order connection ----------------------------------


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (2, 3)])
def test_full_coupled_flat_reproduces_flat_bgg(n, k):
    full, flat = build_full_coupled_bgg(ConnectionData.flat(n, k)), build_bgg_flat(n, k)
    for a, b in zip(full.ops, flat.ops):
        assert relabel(a, source=b.source, target=b.target).equals(b)


@given(seeds)
@settings(max_examples=5)
def test_full_coupled_first_composite_is_curvature(seed):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, 2, rng.randint(1, 2), rng.randint(1, 2), deg=1)
    cs = build_full_coupled_bgg(c)
    first = cs.ops[1] @ cs.ops[0]
    curv = curvature(c)
    assert relabel(first, source=curv.source, target=curv.target).equals(curv)


def test_k1_coupled_is_coupled_de_rham():
    A = [P("x2", 2), P("1", 2)]
    c = ConnectionData.from_canonical(2, 1, 1, {(0, (a,), ()): A[a] for a in range(2)})
    cs = build_full_coupled_bgg(c)
    s = P("x1^2", 2)
    out = cs.ops[0].apply((s,))
    assert out == (s.derive(0) + A[0] * s, s.derive(1) + A[1] * s)
