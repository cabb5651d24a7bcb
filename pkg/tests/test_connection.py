import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoconn.bundles import EBundle, JetBundle
from hoconn.complexes import relabel
from hoconn.connection import (ConnectionData, JetConnection, apply_higher, apply_higher_op, curvature,
                               induced_operator, jet_connection, jet_curvature, roundtrip_check,
                               splitting_h, splitting_op)
from hoconn.exactalg.poly import Poly, exponent_of, parse_poly
from hoconn.jets import (JetSection, inclusion_op, iota_op, jet_op, jet_prolong, projection_op,
                         random_poly, random_section, spencer_op)
from hoconn.operators import LinearDiffOp

seeds = st.integers(0, 10 ** 6)


def dpoly(s: Poly, idx):
    for a in idx:
        s = s.derive(a)
    return s


def gamma_entry(c: ConnectionData, lower, upper):
    m = c.gamma(len(upper), exponent_of(lower, c.n), exponent_of(upper, c.n))
    zero = Poly.zero(c.n)
    return m if m is not None else tuple(tuple(zero for _ in range(c.r)) for _ in range(c.r))


def higher_oracle(c: ConnectionData, s):
    """(nabla^(k) s)_T = d_T s + sum over ordered U, |U| < k, of Gamma_T^U d_U s."""
    n, k, r = c.n, c.k, c.r
    out = {}
    for T in product(range(n), repeat=k):
        vals = [dpoly(s[f], T) for f in range(r)]
        for j in range(k):
            for U in product(range(n), repeat=j):
                m = gamma_entry(c, T, U)
                for f in range(r):
                    for g in range(r):
                        vals[f] = vals[f] + m[f][g] * dpoly(s[g], U)
        out[T] = tuple(vals)
    return out


def induced_oracle(c: ConnectionData, w):
    """(nabla w)_{abC} = d_[a w_b]C + Alt_ab sum_F Gamma_{Ca}^F w_bF, ``w`` a dict on ordered tuples."""
    n, k, r = c.n, c.k, c.r
    half = Fraction(1, 2)
    out = {}
    for a, b in product(range(n), repeat=2):
        for C in product(range(n), repeat=k - 1):
            vals = []
            for f in range(r):
                v = (w[(b,) + C][f].derive(a) - w[(a,) + C][f].derive(b)).scale(half)
                for F in product(range(n), repeat=k - 1):
                    for x, y, sg in ((a, b, half), (b, a, -half)):
                        m = gamma_entry(c, C + (x,), F)
                        for g in range(r):
                            v = v + (m[f][g] * w[(y,) + F][g]).scale(sg)
                vals.append(v)
            out[(a, b) + C] = tuple(vals)
    return out


def as_dict(tf):
    return {t: tf[t] for t in product(range(tf.n), repeat=tf.rank)}


GAMMA_EXAMPLE = ConnectionData.from_canonical(2, 2, 1, {(1, (0, 0), (0,)): 1})


# -- nabla^(k) ------------------------------------------------------------------


def test_flat_is_plain_derivatives():
    s = parse_poly("x1^3 x2 - 2 x2^2", 2)
    t = apply_higher(ConnectionData.flat(2, 2), s)
    assert t[(0, 1)] == (dpoly(s, (0, 1)),) and t[(0, 0)] == (dpoly(s, (0, 0)),)


def test_first_order_connection():
    A = [[parse_poly("x2", 2), Poly.const(2, 1)], [Poly.zero(2), Poly.const(2, -3)]]
    c = ConnectionData.from_canonical(2, 1, 2, {(0, (0,), ()): A})
    s = (parse_poly("x1^2", 2), parse_poly("x2", 2))
    t = apply_higher(c, s)
    assert t[(0,)] == (parse_poly("2 x1 + x1^2 x2 + x2", 2), parse_poly("-3 x2", 2))
    assert t[(1,)] == (Poly.zero(2), Poly.const(2, 1))


def test_second_order_example():
    t = apply_higher(GAMMA_EXAMPLE, parse_poly("x1^2", 2))
    assert t[(0, 0)] == (parse_poly("2 + 2 x1", 2),)


@given(seeds, st.integers(1, 3), st.integers(2, 3), st.integers(1, 2))
@settings(max_examples=15)
def test_higher_matches_coordinate_formula(seed, k, n, r):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, n, k, r, deg=1)
    s = tuple(random_poly(rng, n, 3) for _ in range(r))
    assert as_dict(apply_higher(c, s)) == higher_oracle(c, s)


# -- induced operator and curvature -----------------------------------------------


def test_induced_first_order_is_coupled_exterior_derivative():
    A = [parse_poly("x2", 2), parse_poly("3", 2)]
    c = ConnectionData.from_canonical(2, 1, 1, {(0, (a,), ()): A[a] for a in range(2)})
    w = (parse_poly("x1 x2", 2), parse_poly("x1^2", 2))
    out = induced_operator(c).apply(w)
    tgt = induced_operator(c).target
    half = Fraction(1, 2)
    expect = (w[1].derive(0) - w[0].derive(1) + A[0] * w[1] - A[1] * w[0]).scale(half)
    assert out[tgt.comp((0, 1), 0)] == expect


def test_induced_flat_k2_is_integrability_operator():
    n = 2
    op = induced_operator(ConnectionData.flat(n, 2))
    f = parse_poly("x1^2 x2 + x2^3", n)
    # omega = hessian of f is killed
    from hoconn.jets import sym_form_bundle
    src = sym_form_bundle(n, 0, 2)
    w = [Poly.zero(n)] * src.dim
    for t in src.index_tuples:
        w[src.comp(t)] = dpoly(f, t)
    assert not any(op.apply(tuple(w)))


@given(seeds, st.integers(1, 3), st.integers(2, 3), st.integers(1, 2))
@settings(max_examples=15)
def test_curvature_matches_composition_oracle(seed, k, n, r):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, n, k, r, deg=1)
    s = tuple(random_poly(rng, n, 3) for _ in range(r))
    curv = curvature(c)
    got = curv.apply(s)
    expect = induced_oracle(c, higher_oracle(c, s))
    for t, vals in expect.items():
        for f in range(r):
            assert got[curv.target.comp(t, f)] == vals[f]


def test_flat_curvature_zero():
    for n in (1, 2, 3):
        for k in (1, 2, 3):
            assert curvature(ConnectionData.flat(n, k)).is_zero()


def _mat(rows):
    return [[Poly.const(2, v) if not isinstance(v, Poly) else v for v in row] for row in rows]


def test_constant_first_order_curvature_is_commutator():
    A0, A1 = _mat([[0, 1], [0, 0]]), _mat([[0, 0], [1, 0]])
    c = ConnectionData.from_canonical(2, 1, 2, {(0, (0,), ()): A0, (0, (1,), ()): A1})
    curv = curvature(c)
    assert curv.order == 0
    # A_[0 A_1] = (A0 A1 - A1 A0) / 2 = diag(1, -1) / 2
    s = (Poly.const(2, 1), Poly.zero(2))
    out = curv.apply(s)
    assert out[curv.target.comp((0, 1), 0)] == Poly.const(2, Fraction(1, 2))
    assert out[curv.target.comp((0, 1), 1)].is_zero()
    commuting = ConnectionData.from_canonical(2, 1, 2, {(0, (0,), ()): _mat([[2, 0], [0, 1]]),
                                                      (0, (1,), ()): _mat([[5, 0], [0, 7]])})
    assert curvature(commuting).is_zero()


def test_polynomial_first_order_curvature_is_dA_plus_AA():
    x1, x2 = parse_poly("x1", 2), parse_poly("x2", 2)
    A0, A1 = _mat([[x2, 1], [0, x1]]), _mat([[x1 * x2, 0], [x1, 2]])
    c = ConnectionData.from_canonical(2, 1, 2, {(0, (0,), ()): A0, (0, (1,), ()): A1})
    curv = curvature(c)
    half = Fraction(1, 2)
    for g in range(2):
        s = tuple(Poly.const(2, int(i == g)) for i in range(2))
        out = curv.apply(s)
        for f in range(2):
            dA = A1[f][g].derive(0) - A0[f][g].derive(1)
            AA = sum((A0[f][h] * A1[h][g] - A1[f][h] * A0[h][g] for h in range(2)), Poly.zero(2))
            assert out[curv.target.comp((0, 1), f)] == (dA + AA).scale(half)


def test_second_order_example_curvature():
    # constant Gamma_11^1 = 1: d_1 d_1 s + d_1 s = d_1 d_2 s = d_2 d_2 s = 0 has the
    # three solutions 1, x2, exp(-x1), the maximum for J^1, so the curvature vanishes
    curv = curvature(GAMMA_EXAMPLE)
    assert curv.is_zero()
    for s in (Poly.const(2, 1), parse_poly("x1", 2), parse_poly("x1^2", 2)):
        expect = induced_oracle(GAMMA_EXAMPLE, higher_oracle(GAMMA_EXAMPLE, (s,)))
        assert all(not v[0] for v in expect.values())
    w = apply_higher(GAMMA_EXAMPLE, parse_poly("x1^2", 2))
    assert not any(induced_operator(GAMMA_EXAMPLE).apply(w.values))


def test_second_order_curved_example():
    c = ConnectionData.from_canonical(2, 2, 1, {(1, (0, 0), (0,)): parse_poly("x2", 2)})
    curv = curvature(c)
    assert curv.order == 1
    for s in (Poly.const(2, 1), parse_poly("x1", 2), parse_poly("x1^2 x2", 2)):
        expect = induced_oracle(c, higher_oracle(c, (s,)))
        got = curv.apply((s,))
        assert all(got[curv.target.comp(t, 0)] == v[0] for t, v in expect.items())
    assert any(curv.apply((parse_poly("x1", 2),)))


@given(seeds)
@settings(max_examples=20)
def test_order_drop_random(seed):
    rng = random.Random(seed)
    k, n, r = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2)
    c = ConnectionData.random(rng, n, k, r, deg=2)
    op = curvature(c)   # raises OrderError if the order did not drop
    assert not op.part(k).coeffs


# -- splitting and jet connection ----------------------------------------------


def test_splitting_flat_top_slots_zero():
    c = ConnectionData.flat(2, 2)
    u = JetSection(JetBundle(2, 1, 1), random_section(random.Random(1), JetBundle(2, 1, 1), 3))
    h = splitting_h(c, u)
    assert all(not h[beta][0] for beta in h.bundle.multi_indices if sum(beta) == 2)


@given(seeds)
@settings(max_examples=15)
def test_projection_of_splitting_is_identity(seed):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, 2, 2, 2, deg=1)
    J = JetBundle(2, 1, 2)
    u = JetSection(J, random_section(rng, J, 3))
    assert JetSection(J, projection_op(2, 2, 2).apply(splitting_h(c, u).values)) == u


def test_k1_splitting_and_connection():
    A = [parse_poly("x2", 2), parse_poly("x1 - 1", 2)]
    c = ConnectionData.from_canonical(2, 1, 1, {(0, (a,), ()): A[a] for a in range(2)})
    s = parse_poly("x1^2 x2", 2)
    h = splitting_h(c, JetSection(JetBundle(2, 0, 1), (s,)))
    assert h[(1, 0)] == (-(A[0] * s),) and h[(0, 1)] == (-(A[1] * s),)
    jc = jet_connection(c)
    assert jc.op.apply((s,)) == apply_higher_op(c).apply((s,))


@given(seeds)
@settings(max_examples=10)
def test_property_one_on_random_jets(seed):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, 2, 3, 1, deg=1)
    jc = jet_connection(c)
    J = jc.op.source
    lhs = projection_op(2, 2, 1, 1) @ jc.op
    S = spencer_op(2, 2, 1)
    for _ in range(5):
        u = random_section(rng, J, 3)
        assert lhs.apply(u) == S.apply(u)


@given(seeds)
@settings(max_examples=10)
def test_jet_connection_on_holonomic_is_higher(seed):
    rng = random.Random(seed)
    c = ConnectionData.random(rng, 3, 2, 1, deg=1)
    s = random_poly(rng, 3, 4)
    lhs = jet_connection(c).op.apply(jet_prolong(s, 1).values)
    embed = inclusion_op(3, 1, 1) @ iota_op(3, 2)
    assert lhs == embed.apply(apply_higher(c, s).values)


# -- jet curvature ----------------------------------------------------------


def test_jet_curvature_flat_zero():
    assert jet_curvature(ConnectionData.flat(3, 2)).kappa.is_zero()


def test_jet_curvature_k1_is_curvature():
    A = [parse_poly("x2^2", 2), parse_poly("x1", 2)]
    c = ConnectionData.from_canonical(2, 1, 1, {(0, (a,), ()): A[a] for a in range(2)})
    jcurv = jet_curvature(c)
    assert relabel(jcurv.kappa_theta, source=EBundle(2, 1)).equals(curvature(c))


@pytest.mark.parametrize("top", ["1", "x2"])
def test_jet_curvature_example(top):
    c = ConnectionData.from_canonical(2, 2, 1, {(1, (0, 0), (0,)): parse_poly(top, 2)})
    jcurv = jet_curvature(c)
    assert jcurv.is_homomorphism and jcurv.only_top_slots and jcurv.lands_in_theta
    lhs = jcurv.kappa_theta @ jet_op(2, 1)
    curv = curvature(c)
    assert lhs.equals(curv)
    rng = random.Random(4)
    for _ in range(5):
        s = (random_poly(rng, 2, 4),)
        assert lhs.apply(s) == curv.apply(s)


# -- round trip -------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_flat_round_trip(k):
    assert roundtrip_check(ConnectionData.flat(2, k)).ok


def test_random_round_trip_rank_two():
    rng = random.Random(7)
    for _ in range(3):
        rep = roundtrip_check(ConnectionData.random(rng, 2, 2, 2, deg=2))
        assert rep.ok, rep.failures


def test_reverse_round_trip_flags_bad_connection():
    c = GAMMA_EXAMPLE
    jc = jet_connection(c)
    J, tgt = jc.op.source, jc.op.target
    # add a non-symmetric top-slot term: (nabla_1 u)_{(0,1)} += x2 u_()
    bump = LinearDiffOp.from_terms(J, tgt, [(tgt.comp((0,), J.slot((0, 1), 0)), J.slot((0, 0), 0),
                                              (0, 0), parse_poly("x2", 2))])
    rep = roundtrip_check(c, reverse=JetConnection(jc.op + bump))
    assert not rep.ok
    assert any("reverse" in f for f in rep.failures)


def test_non_symmetric_full_entries_are_noted():
    c = ConnectionData.from_full_entries(2, 2, 1, [(1, (0, 1), (0,), [[1]])])
    assert c.load_notes
    sym = ConnectionData.from_full_entries(2, 2, 1, [(1, (0, 1), (0,), [[1]]), (1, (1, 0), (0,), [[1]])])
    assert not sym.load_notes
    assert sym.gamma(1, (1, 1), (1, 0))[0][0] == Poly.const(2, 1)
