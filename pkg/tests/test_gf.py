import itertools

import pytest
from hypothesis import given, strategies as st

from listrec.errors import DivisionByZero, InvalidModulus
from listrec.gf import build_extension, field_arith, find_primitive, is_irreducible, prime_field


def _order(g, q):
    x, k = g % q, 1
    while x != 1:
        x, k = x * g % q, k + 1
    return k


def test_prime_field_basic_ops():
    F5 = prime_field(5)
    assert field_arith(F5, "mul", 2, 3) == 1
    assert field_arith(F5, "sub", 1, 3) == 3
    assert field_arith(F5, "div", 1, 2) == 3
    with pytest.raises(DivisionByZero):
        field_arith(F5, "inv", 0)
    with pytest.raises(DivisionByZero):
        field_arith(F5, "div", 3, 0)


def test_fermat_by_repeated_multiplication():
    F7 = prime_field(7)
    acc = 1
    for _ in range(6):
        acc = acc * 3 % 7
    assert acc == 1
    assert field_arith(F7, "pow", 3, 6) == 1


@pytest.mark.parametrize("q,g", [(2, 1), (5, 2), (7, 3)])
def test_find_primitive_known(q, g):
    assert find_primitive(q) == g


@pytest.mark.parametrize("q", [3, 11, 13, 31, 257, 433])
def test_find_primitive_is_smallest_generator(q):
    g = find_primitive(q)
    assert _order(g, q) == q - 1
    assert all(_order(h, q) < q - 1 for h in range(2, g))


def test_non_prime_modulus_rejected():
    with pytest.raises(InvalidModulus):
        find_primitive(4)
    with pytest.raises(InvalidModulus):
        prime_field(9)


def test_gf4_hand_reduction():
    K = build_extension(2, 2)
    assert K.modpoly == (1, 1, 1)
    # (X + 1) * X = X^2 + X = 1 mod X^2 + X + 1
    prod = K.mul(K.phi((1, 1)), K.phi((0, 1)))
    assert K.phi_inv(prod) == (1, 0)


def _irreducible_brute(f, q):
    # f monic, low-first; reducible iff some monic factor of degree 1..deg/2 divides it
    t = len(f) - 1
    for k in range(1, t // 2 + 1):
        for low in itertools.product(range(q), repeat=k):
            g = list(low) + [1]
            r = list(f)
            for i in range(len(r) - 1, k - 1, -1):
                c = r[i]
                for j in range(k + 1):
                    r[i - k + j] = (r[i - k + j] - c * g[j]) % q
            if not any(r[:k]):
                return False
    return True


@pytest.mark.parametrize("q,t", [(2, 3), (3, 2), (3, 3), (5, 2)])
def test_irreducible_matches_brute_force(q, t):
    for low in itertools.product(range(q), repeat=t):
        f = list(low) + [1]
        assert is_irreducible(f, q) == _irreducible_brute(f, q)


EXT = [build_extension(3, 2), build_extension(5, 3), build_extension(2, 4)]


def _vec(K):
    return st.tuples(*[st.integers(0, K.q - 1)] * K.t)


@pytest.mark.parametrize("K", EXT, ids=lambda K: f"{K.q}^{K.t}")
def test_extension_field_axioms(K):
    @given(_vec(K), _vec(K), _vec(K))
    def check(u, v, w):
        a, b, c = K.phi(u), K.phi(v), K.phi(w)
        assert K.phi_inv(a) == tuple(u)
        assert K.phi_inv(K.add(a, b)) == tuple((x + y) % K.q for x, y in zip(u, v))
        assert K.mul(a, K.mul(b, c)) == K.mul(K.mul(a, b), c)
        assert K.mul(a, K.add(b, c)) == K.add(K.mul(a, b), K.mul(a, c))
        if not K.is_zero(a):
            assert K.mul(a, K.inv(a)) == K.one
            assert K.pow(a, K.order - 1) == K.one

    check()


def test_extension_index_roundtrip():
    K = build_extension(3, 2)
    assert sorted(K.to_index(a) for a in K.elements()) == list(range(9))
    assert all(K.from_index(K.to_index(a)) == a for a in K.elements())
