from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hoconn.bundles import EBundle
from hoconn.connection import ConnectionData, apply_higher_op
from hoconn.complexes import de_rham_complex
from hoconn.exactalg import PolyMatrix, linalg, poly_derive, rational_kernel
from hoconn.exactalg import _rank_py
from hoconn.exactalg.poly import Poly, PolyParseError, format_poly, parse_poly
from hoconn.exactalg.slices import degree_slice_matrix, slice_homology
from hoconn.operators import derivative

N = 3
exps = st.tuples(*[st.integers(0, 3)] * N)
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
polys = st.dictionaries(exps, coeffs, max_size=5).map(lambda d: Poly(N, d))
int_mats = st.integers(1, 7).flatmap(
    lambda m: st.integers(1, 7).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)))


def p(text, n=N):
    return parse_poly(text, n)


# -- polynomials --------------------------------------------------------------


def test_derivative_examples():
    assert poly_derive(p("x1^2 x2"), 1) == p("2 x1 x2")
    assert poly_derive(p("x1^3"), 2).is_zero()
    xy = p("x1 x2")
    assert poly_derive(poly_derive(xy, 1), 2) == poly_derive(poly_derive(xy, 2), 1) == Poly.const(N, 1)


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a and a * b == b * a
    assert (a - a).is_zero()


@given(polys, polys, st.integers(0, N - 1))
def test_leibniz_rule(a, b, i):
    assert (a * b).derive(i) == a.derive(i) * b + a * b.derive(i)


@given(polys)
def test_literal_roundtrip(a):
    assert parse_poly(format_poly(a), N) == a


def test_literal_syntax():
    q = p("3/2 x1^2 x2 - x3")
    assert q.terms == {(2, 1, 0): Fraction(3, 2), (0, 0, 1): Fraction(-1)}
    assert p(" 3/2x1^2x2-x3 ") == q
    assert format_poly(p("x3 + x1^2 + x1 x2")) == "x1^2 + x1 x2 + x3"


@pytest.mark.parametrize("bad", ["x4", "x1^", "2 +", "x1 ** 2", "1/0"])
def test_parse_errors_carry_a_column(bad):
    with pytest.raises((PolyParseError, ZeroDivisionError)) as e:
        parse_poly(bad, N)
    if isinstance(e.value, PolyParseError):
        assert 0 <= e.value.pos <= len(bad)


# -- linear algebra -----------------------------------------------------------


def test_kernel_examples():
    eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert linalg.kernel_basis(eye) == []
    assert len(linalg.kernel_basis([[0, 0, 0], [0, 0, 0]])) == 3
    (v,) = linalg.kernel_basis([[1, 1], [2, 2]])
    assert v[0] == -v[1] != 0
    assert len(rational_kernel(PolyMatrix.from_rows([[1, 1], [2, 2]]))) == 1


def _naive_rank(rows):
    """Independent oracle: Fraction Gauss-Jordan with first-nonzero pivots."""
    a = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    for col in range(len(a[0]) if a else 0):
        piv = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][col]:
                f = a[i][col] / a[rank][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


@given(int_mats)
def test_rank_backends_agree_with_oracle(rows):
    n = len(rows[0])
    expect = _naive_rank(rows)
    assert _rank_py.rank_int(rows, n) == expect
    assert linalg.rank_int(rows, n) == expect
    assert linalg.rank(rows, n) == expect


@pytest.mark.skipif(linalg.BACKEND != "compiled", reason="compiled kernel not built")
def test_compiled_kernel_overflow_falls_back():
    big = 2 ** 40
    rows = [[big, big + 1, 3], [big + 7, 5, big], [1, big, big - 3]]
    assert linalg.rank_int(rows, 3, "compiled") == _naive_rank(rows)


@given(int_mats)
def test_kernel_basis_is_kernel(rows):
    n = len(rows[0])
    ker = linalg.kernel_basis(rows, n)
    assert len(ker) == n - _naive_rank(rows)
    for v in ker:
        assert all(sum(Fraction(a) * b for a, b in zip(r, v)) == 0 for r in rows)


def test_solve_and_inverse():
    m = [[2, 1], [1, 1]]
    assert linalg.solve(m, [3, 2]) == [1, 1]
    inv = linalg.inverse(m)
    assert linalg.matmul(m, inv) == [[1, 0], [0, 1]]
    assert linalg.solve([[1, 1], [1, 1]], [1, 2]) is None


# -- degree slices ------------------------------------------------------------


def test_slice_matrix_examples():
    d1 = derivative(EBundle(1, 1), 0)
    m = degree_slice_matrix(d1, 2)
    assert (m.rows, m.cols) == (1, 1) and m.to_fractions() == [[2]]
    d0 = de_rham_complex(2).ops[0]
    assert degree_slice_matrix(d0, 1).rank() == 2
    hess = apply_higher_op(ConnectionData.flat(2, 2))
    m = degree_slice_matrix(hess, 2)
    assert m.cols == 3 and m.rank() == 3


@pytest.mark.parametrize("n", [2, 3])
def test_de_rham_slices_exact(n):
    ops = de_rham_complex(n).ops
    for i in range(1, len(ops)):
        for d in range(5):
            assert slice_homology(ops[i - 1], ops[i], d)[2] == 0
