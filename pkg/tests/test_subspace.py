import itertools
from fractions import Fraction

import numpy as np
import pytest

from listrec.codes import ListWord, frs_encode, frs_params, mult_encode, mult_params, plant_channel, random_poly
from listrec.errors import NotClosed, UnderDetermined
from listrec.gf import prime_field
from listrec.poly import Poly, hasse_derive
from listrec.subspace import (DERIVATIVE, FOLD, LinOperator, find_operator_frs, find_operator_mult,
                              is_xq_closed, module_basis, qdim, qdim_and_basis, solution_space, span_rank,
                              vanish_subspace)

F5, F7, F13 = prime_field(5), prime_field(7), prime_field(13)


def X(ctx, k):
    return Poly(ctx, [0] * k + [1])


def _op(ctx, A, B, d, s=3):
    return LinOperator(DERIVATIVE, len(B), A, tuple(B), d, d, mult_params(ctx, s, d))


def test_solution_space_constant_operators():
    sp = solution_space(_op(F5, Poly(F5), [Poly(F5, [1])], 12), 12)
    assert sp.v0 == Poly(F5) and sp.dim == 0
    sp = solution_space(_op(F5, Poly(F5, [4]), [Poly(F5, [1])], 12), 12)
    assert sp.v0 == Poly(F5, [1]) and sp.dim == 0


def test_kernel_of_first_derivative():
    sp = solution_space(_op(F5, Poly(F5), [Poly(F5), Poly(F5, [1])], 12), 12)
    assert sp.v0 == Poly(F5)
    assert set(sp.basis) == {X(F5, 0), X(F5, 5), X(F5, 10)}
    assert all(hasse_derive(f, 1).is_zero() for f in sp.basis)


def test_mult_operator_plant_and_check(rng):
    params = mult_params(F13, 4, 10)
    for _ in range(5):
        P = random_poly(F13, 10, rng)
        S = ListWord.from_codeword(mult_encode(P, params))
        op = find_operator_mult(S, 1, 0, params)
        assert (op.A + op.B[0] * P).is_zero()
        assert solution_space(op, params.d).contains(P)


def test_frs_operator_plant_and_check(rng):
    params = frs_params(F13, 4, 3, 5)
    for _ in range(5):
        P = random_poly(F13, 5, rng)
        S = ListWord.from_codeword(frs_encode(P, params))
        op = find_operator_frs(S, 1, 0, params)
        assert (op.A + op.B[0] * P).is_zero()
        assert solution_space(op, params.d).contains(P)


def test_frs_solution_dimension_bound(rng):
    ctx = prime_field(97)
    params = frs_params(ctx, 8, 12, 30)
    for r in (2, 3):
        for _ in range(4):
            P = random_poly(ctx, 30, rng)
            S = plant_channel(frs_encode(P, params), Fraction(1, 12), 1, rng)
            sp = solution_space(find_operator_frs(S, r, Fraction(1, 12), params), 30)
            assert sp.contains(P)
            assert sp.dim <= r - 1


def test_zero_codeword_space_contains_zero():
    params = mult_params(F13, 4, 10)
    S = ListWord.from_codeword(mult_encode(Poly(F13), params))
    assert solution_space(find_operator_mult(S, 2, 0, params), 10).contains(Poly(F13))


def test_empty_lists_vacuous():
    params = frs_params(F13, 4, 3, 5)
    S = ListWord(13, ((),) * 3)
    op = find_operator_frs(S, 2, 0, params)
    assert any(not b.is_zero() for b in op.B) or not op.A.is_zero()
    solution_space(op, 5)


def test_underdetermined_when_counts_fail():
    params = mult_params(F5, 2, 6)
    S = plant_channel(mult_encode(Poly(F5, [1]), params), 0, 20, np.random.default_rng(0))
    with pytest.raises(UnderDetermined):
        find_operator_mult(S, 1, 0, params)


def test_xq_example_exact_drop():
    V = [X(F7, 7 * i) for i in range(5)]
    for tau in range(0, 5):
        for pts in itertools.combinations(range(7), tau):
            assert len(vanish_subspace(V, list(pts), DERIVATIVE, 6)) == len(V) - tau


def test_vanish_subspace_no_points_keeps_dimension(rng):
    V = [random_poly(F13, 9, rng) for _ in range(4)]
    assert len(vanish_subspace(V, [], FOLD, 3)) == span_rank(V, 10)


def test_averaged_dimension_bound_fold(rng):
    # E_i dim(W ∩ H_i) <= t - delta with delta the relative distance of the code
    params = frs_params(F13, 3, 4, 6)
    delta = 1 - Fraction(params.d, params.s * params.n)
    for _ in range(20):
        t = int(rng.integers(1, 6))
        W = [random_poly(F13, 6, rng) for _ in range(t)]
        t = span_rank(W, 7)
        avg = Fraction(sum(len(vanish_subspace(W, [a], FOLD, 3)) for a in params.evalset), params.n)
        assert avg <= t - delta


def test_averaged_dimension_bound_derivative(rng):
    params = mult_params(F7, 3, 12)
    delta = 1 - Fraction(12, 21)
    for _ in range(20):
        W = [random_poly(F7, 12, rng) for _ in range(int(rng.integers(1, 5)))]
        t = span_rank(W, 13)
        avg = Fraction(sum(len(vanish_subspace(W, [a], DERIVATIVE, 3)) for a in range(7)), 7)
        assert avg <= t - delta


def test_qdim_examples():
    q = 5
    assert qdim_and_basis([X(F5, 0), X(F5, q)], q) == (1, [X(F5, 0)])
    assert qdim_and_basis([], q) == (0, [])
    t, basis = qdim_and_basis([X(F5, 0), X(F5, 1)], 1)
    assert t == 2 and set(basis) == {X(F5, 0), X(F5, 1)}
    with pytest.raises(NotClosed):
        qdim_and_basis([X(F5, 0)], q)


def test_is_xq_closed_examples():
    assert is_xq_closed([X(F5, 0), X(F5, 5)], 5)
    assert is_xq_closed([], 5)
    assert not is_xq_closed([X(F5, 0)], 5)


def test_module_basis_regenerates_closed_space(rng):
    f = random_poly(F5, 3, rng)
    g = random_poly(F5, 6, rng)
    W = [f, f.shift(5), f.shift(10), g, g.shift(5)]
    d = 12
    W = [w for w in W if w.degree <= d]
    assert is_xq_closed(W, d)
    t, gens = qdim_and_basis(W, d)
    assert t == qdim(W, d)
    assert span_rank(module_basis(gens, d), d + 1) == span_rank(W, d + 1)
