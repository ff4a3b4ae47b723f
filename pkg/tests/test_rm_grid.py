import itertools
from fractions import Fraction

import numpy as np
import pytest

from listrec.errors import AgreementTooLow, RegimeViolation
from listrec.gf import build_extension, prime_field
from listrec.poly import MultiPoly, Poly
from listrec.rm_grid import (GridInstance, field_roots, grid_agreement, min_agreement, sqrt_threshold,
                             sudan_list_recover, vector_rm_list_recover)

F5, F31 = prime_field(5), prime_field(31)


def _lines_within(points, q, alpha):
    need = min_agreement(len(points), alpha)
    out = set()
    for c0, c1 in itertools.product(range(q), repeat=2):
        if sum((c0 + c1 * x) % q in L for x, L in points) >= need:
            out.add(Poly(prime_field(q), [c0, c1]))
    return out


def test_sudan_zero_error(rng):
    f = Poly(F31, [3, 7, 1])
    pts = [(x, [f(x)]) for x in range(31)]
    assert f in sudan_list_recover(pts, 2, 0, F31)


def test_sudan_two_lines_against_all_lines():
    pts = [(x, [(1 + 2 * x) % 5, (3 + 4 * x) % 5]) for x in range(5)]
    got = set(sudan_list_recover(pts, 1, 0, F5, strict=False))
    assert {Poly(F5, [1, 2]), Poly(F5, [3, 4])} <= got
    assert got == _lines_within(pts, 5, 0)


def test_sudan_random_lists_against_brute_force():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        pts = [(x, sorted(set(int(v) for v in rng.integers(13, size=2)))) for x in range(13)]
        c = rng.integers(13, size=2)
        for x, L in pts[: 11]:
            L[0] = int((c[0] + c[1] * x) % 13)
        alpha = Fraction(int(rng.integers(0, 3)), 13)
        F13 = prime_field(13)
        assert set(sudan_list_recover(pts, 1, alpha, F13)) == _lines_within(pts, 13, alpha)


def test_sudan_adversarial_is_empty():
    # constant lists that no line of slope != 0 matches, at a target only a line could reach
    pts = [(x, [(x * x) % 31]) for x in range(31)]
    assert sudan_list_recover(pts, 1, Fraction(1, 31), F31) == []


def test_sudan_agreement_guard():
    pts = [(x, [0, 1, 2]) for x in range(5)]
    with pytest.raises(AgreementTooLow):
        sudan_list_recover(pts, 1, Fraction(2, 5), F5, strict=True)


def test_sqrt_threshold_frozen():
    assert sqrt_threshold(100, 1, 4) == 50
    assert sqrt_threshold(324, 2, 9) == 216
    assert min_agreement(25, Fraction(1, 5)) == 20


def test_field_roots_large_field():
    F = prime_field(10007)
    roots = [3, 17, 5000, 9999]
    f = Poly(F, [1])
    for r in roots:
        f = f * Poly(F, [(-r) % 10007, 1])
    f = f * Poly(F, [1, 0, 1])  # X^2 + 1 has no root mod 10007 (10007 = 3 mod 4)
    assert field_roots(F, f.coeffs) == roots


def test_field_roots_extension_exhaustive():
    K = build_extension(3, 2)
    for a in K.elements():
        got = field_roots(K, [K.neg(a), K.one])
        assert got == [a]


def test_m1_matches_sudan():
    rng = np.random.default_rng(3)
    U = tuple(range(31))
    c = rng.integers(31, size=2)
    lists = {(x,): [int((c[0] + c[1] * x) % 31), int(rng.integers(31))] for x in U}
    inst = GridInstance(F31, U, 1, 1, lists, 2, Fraction(1, 4), 4, strict=False)
    got = {P[0].terms.get((0,), 0) + 31 * P[0].terms.get((1,), 0) for P in vector_rm_list_recover(inst)}
    pts = [(x, lists[(x,)]) for x in U]
    want = {int(f.coeffs[0]) + 31 * (int(f.coeffs[1]) if len(f.coeffs) > 1 else 0)
            for f in sudan_list_recover(pts, 1, Fraction(1, 4), F31, strict=False)}
    assert got == want


def test_constant_tuple_recovered():
    U = tuple(range(5))
    lists = {p: [(2, 3), (int(p[0]), 1)] for p in itertools.product(U, repeat=2)}
    inst = GridInstance(F5, U, 2, 1, lists, 2, Fraction(0), 4, t=2, strict=False)
    got = vector_rm_list_recover(inst)
    target = (MultiPoly(F5, 2, {(0, 0): 2}), MultiPoly(F5, 2, {(0, 0): 3}))
    assert target in got


def _affine_brute(lists, U, alpha):
    grid = list(itertools.product(U, repeat=2))
    need = min_agreement(len(grid), alpha)
    out = set()
    for c in itertools.product(range(5), repeat=3):
        if sum((c[0] + c[1] * x + c[2] * y) % 5 in lists[(x, y)] for x, y in grid) >= need:
            out.add(c)
    return out


def test_rm_exhaustive_q5():
    U = tuple(range(5))
    for seed in range(8):
        rng = np.random.default_rng(seed)
        c = rng.integers(5, size=3)
        alpha = Fraction(int(rng.integers(0, 6)), 25)
        grid = list(itertools.product(U, repeat=2))
        bad = set(rng.choice(25, size=int(alpha * 25), replace=False).tolist())
        lists = {p: [int(rng.integers(5)) if i in bad else int((c[0] + c[1] * p[0] + c[2] * p[1]) % 5)]
                 for i, p in enumerate(grid)}
        got = vector_rm_list_recover(GridInstance(F5, U, 2, 1, lists, 1, alpha, 4, strict=False))
        keys = {(P.terms.get((0, 0), 0), P.terms.get((1, 0), 0), P.terms.get((0, 1), 0)) for (P,) in got}
        assert keys == _affine_brute(lists, U, alpha)
        for tup in got:
            assert grid_agreement(tup, U, 2, {p: [(v,) for v in L] for p, L in lists.items()}) >= \
                min_agreement(25, alpha)


def test_regime_checks():
    U = tuple(range(10))
    with pytest.raises(RegimeViolation):
        vector_rm_list_recover(GridInstance(F31, U, 2, 1, {}, 1, Fraction(0), 9))
    with pytest.raises(RegimeViolation):
        GridInstance(F31, tuple(range(18)), 2, 1, {}, 1, Fraction(1, 2), 9).check_regime()
    with pytest.raises(RegimeViolation):
        GridInstance(F31, tuple(range(18)), 2, 1, {}, 1, Fraction(0), 3).check_regime()
