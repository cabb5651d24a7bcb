import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoconn.bundles import JetBundle
from hoconn.exactalg.poly import Poly, parse_poly
from hoconn.exterior import form_bundle
from hoconn.jets import (FormValuedJet, JetSection, check_diagram4, inclusion_op, iota_op, jet_op,
                         jet_project, jet_prolong, projection_op, random_poly, random_section, spencer,
                         spencer_op, spencer_wedge, sym_form_bundle)
from hoconn.operators import LinearDiffOp
from hoconn.tensor import dimension, Sym

seeds = st.integers(0, 10 ** 6)


def e(n, a):
    return tuple(int(i == a) for i in range(n))


def test_prolong_examples():
    x1sq = parse_poly("x1^2", 2)
    u = jet_prolong(x1sq, 1)
    assert u[(0, 0)] == (x1sq,) and u[(1, 0)] == (parse_poly("2 x1", 2),) and u[(0, 1)][0].is_zero()
    assert jet_prolong(x1sq, 0).values == (x1sq,)
    v = jet_prolong(parse_poly("x1 x2", 2), 2)
    assert v[(1, 1)] == (Poly.const(2, 1),) and v[(2, 0)][0].is_zero() and v[(0, 2)][0].is_zero()
    assert v.is_holonomic()


@given(seeds)
def test_projection_of_prolongation(seed):
    s = random_poly(random.Random(seed), 3, 4)
    assert jet_project(jet_prolong(s, 2)) == jet_prolong(s, 1)


def test_projection_keeps_lower_slots():
    u = JetSection.from_slots(2, 2, 1, {(0, 0): parse_poly("x2", 2), (1, 0): 5, (0, 2): 7})
    assert jet_project(u) == JetSection.from_slots(2, 1, 1, {(0, 0): parse_poly("x2", 2), (1, 0): 5})


def _spencer_oracle(u: JetSection):
    """(Su)_{a, beta} = d_a u_beta - u_{beta + e_a}, straight from the coordinate formula."""
    n, ell = u.n, u.order
    out = {}
    for a in range(n):
        for beta in JetBundle(n, ell - 1, u.r).multi_indices:
            up = tuple(b + (i == a) for i, b in enumerate(beta))
            out[(a, beta)] = tuple(x.derive(a) - y for x, y in zip(u[beta], u[up]))
    return out


def test_spencer_examples():
    assert spencer(jet_prolong(parse_poly("x1^2", 2), 1)).slot((0,), (0, 0)) == (Poly.zero(2),)
    u = JetSection.from_slots(2, 1, 1, {(1, 0): 1})
    assert spencer(u).slot((0,), (0, 0)) == (Poly.const(2, -1),)


@given(seeds, st.integers(1, 3), st.integers(1, 2))
def test_spencer_matches_coordinate_formula(seed, ell, r):
    rng = random.Random(seed)
    J = JetBundle(2, ell, r)
    u = JetSection(J, random_section(rng, J, 3))
    Su = spencer(u)
    for (a, beta), val in _spencer_oracle(u).items():
        assert Su.slot((a,), beta) == val


@given(seeds)
def test_spencer_symbol_is_minus_projection_shift(seed):
    rng = random.Random(seed)
    n, ell = 2, 2
    J = JetBundle(n, ell, 1)
    u = JetSection(J, random_section(rng, J, 3))
    # perturb only the top slots by constants
    vals = list(u.values)
    delta = {}
    for beta in J.multi_indices:
        if sum(beta) == ell:
            c = Fraction(rng.randint(-4, 4))
            delta[beta] = c
            vals[J.slot(beta, 0)] = vals[J.slot(beta, 0)] + Poly.const(n, c)
    diff_su = spencer(JetSection(J, tuple(vals)))
    su = spencer(u)
    for a in range(n):
        for beta in JetBundle(n, ell - 1, 1).multi_indices:
            up = tuple(b + (i == a) for i, b in enumerate(beta))
            change = diff_su.slot((a,), beta)[0] - su.slot((a,), beta)[0]
            assert change == Poly.const(n, -delta.get(up, 0))


@given(seeds)
def test_spencer_kills_holonomic_and_squares_to_zero(seed):
    rng = random.Random(seed)
    s = random_poly(rng, 3, 4)
    assert not any(spencer(jet_prolong(s, 2)).values)
    J = JetBundle(3, 2, 1)
    u = JetSection(J, random_section(rng, J, 3))
    assert not any(spencer_wedge(spencer(u)).values)


def test_spencer_wedge_constant_holonomic_is_zero():
    n = 2
    c = jet_prolong(Poly.const(n, 3), 1)
    b = form_bundle(n, 1, c.bundle)
    vals = [Poly.zero(n)] * b.dim
    for j in range(c.bundle.dim):   # w = dx^1 (x) c
        vals[b.comp((0,), j)] = c.values[j]
    assert not any(spencer_wedge(FormValuedJet(1, b, tuple(vals))).values)


@given(seeds)
def test_spencer_wedge_matches_expansion(seed):
    """p = 1, n = 2, l = 1: (Sw)_{ab,beta} = Alt_ab [d_a w_{b,beta} - w_{b,beta+e_a}]."""
    rng = random.Random(seed)
    n = 2
    J = JetBundle(n, 1, 1)
    b = form_bundle(n, 1, J)
    w = FormValuedJet(1, b, random_section(rng, b, 3))
    Sw = spencer_wedge(w)
    half = Fraction(1, 2)
    for a, c in product(range(n), repeat=2):
        beta = (0, 0)
        t1 = w.slot((c,), beta)[0].derive(a) - w.slot((c,), e(n, a))[0]
        t2 = w.slot((a,), beta)[0].derive(c) - w.slot((a,), e(n, c))[0]
        assert Sw.slot((a, c), beta)[0] == (t1 - t2).scale(half)


@pytest.mark.parametrize("k,n,r", [(1, 2, 1), (2, 2, 1), (2, 3, 1), (3, 2, 2)])
def test_diagram_commutes_and_rows_exact(k, n, r):
    rep = check_diagram4(k, n, r, samples=20 if (k, n) == (2, 2) else 6, deg=4, seed=k * 10 + n)
    assert rep.ok, rep.failures
    assert len(rep.checks) > 5


def test_row_fiber_count():
    assert dimension(Sym(2), 2) + JetBundle(2, 1, 1).dim == JetBundle(2, 2, 1).dim == 6


@pytest.mark.parametrize("k", [1, 2, 3])
def test_spencer_of_inclusion_is_minus_iota(k):
    n = 2
    lhs = spencer_op(n, k) @ inclusion_op(n, 0, k)
    rhs = inclusion_op(n, 1, k - 1) @ iota_op(n, k).scale(-1)
    assert lhs.equals(rhs)
    assert (projection_op(n, k) @ inclusion_op(n, 0, k)).is_zero()


def test_jet_op_projection_identity():
    n, ell = 2, 3
    assert (projection_op(n, ell) @ jet_op(n, ell)).equals(jet_op(n, ell - 1))
    assert (spencer_op(n, ell) @ jet_op(n, ell)).is_zero()
    ident = LinearDiffOp.identity(sym_form_bundle(n, 0, 2))
    assert ident.fiber_rank() == 3
