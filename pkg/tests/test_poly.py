import math

import pytest
from hypothesis import given, strategies as st

from listrec.errors import DimensionMismatch
from listrec.gf import prime_field
from listrec.poly import (MultiPoly, Poly, binom_mod, eval_order, graded_lex, hasse_derive, restrict_line,
                          restrict_symbol, wronskian_det, wronskian_det_leibniz)

F2, F5, F7 = prime_field(2), prime_field(5), prime_field(7)
coeff_lists = st.lists(st.integers(0, 6), max_size=9)


def _hasse_by_expansion(coeffs, i, p):
    # coefficient of Z^i in sum c_n (X + Z)^n
    out = [0] * max(len(coeffs) - i, 0)
    for n, c in enumerate(coeffs):
        if n >= i:
            out[n - i] = (out[n - i] + c * math.comb(n, i)) % p
    return out


@given(st.integers(0, 60), st.integers(0, 60), st.sampled_from([2, 3, 5, 7, 13]))
def test_binom_mod_matches_comb(n, k, p):
    assert binom_mod(n, k, p) == math.comb(n, k) % p


@given(coeff_lists, st.integers(0, 9))
def test_hasse_matches_expansion(coeffs, i):
    P = Poly(F7, coeffs)
    assert hasse_derive(P, i) == Poly(F7, _hasse_by_expansion([c % 7 for c in coeffs], i, 7))


def test_hasse_examples():
    assert hasse_derive(Poly(F2, [0, 0, 0, 1]), 2) == Poly(F2, [0, 1])
    P = Poly(F5, [1, 4, 0, 2])
    assert hasse_derive(P, 0) == P
    Q = MultiPoly(F5, 2, {(1, 1): 1})
    assert hasse_derive(Q, (1, 0)) == MultiPoly(F5, 2, {(0, 1): 1})
    with pytest.raises(DimensionMismatch):
        hasse_derive(Q, (1, 0, 0))


def test_eval_order_examples():
    P = Poly(F5, [1, 0, 1])
    assert eval_order(P, 2, 3) == (0, 4, 1)
    assert eval_order(Poly(F5), 3, 4) == (0, 0, 0, 0)
    assert eval_order(P, 4, 1) == (P(4),)
    Q = MultiPoly(F5, 2, {(1, 1): 1})
    with pytest.raises(DimensionMismatch):
        eval_order(Q, (1, 2, 3), 2)


@given(coeff_lists, coeff_lists)
def test_poly_ring_properties(a, b):
    A, B = Poly(F7, a), Poly(F7, b)
    assert A + B == B + A
    assert A * B == B * A
    assert (A - B) + B == A
    if not B.is_zero():
        Qt, R = A.divmod(B)
        assert Qt * B + R == A
        assert R.is_zero() or R.degree < B.degree
    for x in range(7):
        assert (A * B)(x) == A(x) * B(x) % 7


def test_restrict_line_examples():
    Q = MultiPoly(F5, 2, {(1, 0): 1, (0, 1): 1})
    assert restrict_line(Q, (0, 0), (1, 1)) == Poly(F5, [0, 2])
    assert restrict_line(MultiPoly(F5, 2, {(0, 0): 3}), (1, 4), (2, 3)) == Poly(F5, [3])
    R = MultiPoly(F5, 2, {(2, 1): 1, (0, 1): 4})
    assert restrict_line(R, (2, 3), (0, 0)) == Poly(F5, [R((2, 3))])


@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(1, 4), max_size=6),
       st.tuples(st.integers(0, 4), st.integers(0, 4)), st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_restrict_line_pointwise(terms, x, b):
    Q = MultiPoly(F5, 2, terms)
    L = restrict_line(Q, x, b)
    for t in range(5):
        assert L(t) == Q(((x[0] + t * b[0]) % 5, (x[1] + t * b[1]) % 5))


def test_restrict_symbol_examples():
    assert graded_lex(2, 2) == ((0, 0), (1, 0), (0, 1))
    z = (1, 2, 3)
    assert restrict_symbol(z, (1, 0), F5) == (1, 2)
    assert restrict_symbol(z, (0, 0), F5) == (1, 0)
    assert restrict_symbol(z, (2, 1), F5) == (1, 2)


@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), st.integers(1, 6), max_size=6),
       st.tuples(st.integers(0, 6), st.integers(0, 6)), st.tuples(st.integers(0, 6), st.integers(0, 6)))
def test_restrict_symbol_commutes_with_restriction(terms, x, b):
    # derivatives of Q along the line at T=0 come from the multivariate symbol at x
    Q = MultiPoly(F7, 2, terms)
    s = 3
    assert restrict_symbol(eval_order(Q, x, s), b, F7) == eval_order(restrict_line(Q, x, b), 0, s)


def test_wronskian_examples():
    assert wronskian_det([Poly(F5, [1]), Poly(F5, [0, 1])]) == Poly(F5, [1])
    assert wronskian_det([Poly(F5, [0, 1]), Poly(F5, [0, 0, 1])]) == Poly(F5, [0, 0, 1])
    for ctx in (F5, F7):
        q = ctx.q
        assert wronskian_det([Poly(ctx, [1]), Poly(ctx, [0] * q + [1])]).is_zero()


@given(st.lists(coeff_lists, min_size=1, max_size=3))
def test_wronskian_routes_agree(polys):
    fs = [Poly(F7, c) for c in polys]
    assert wronskian_det(fs) == wronskian_det_leibniz(fs)
