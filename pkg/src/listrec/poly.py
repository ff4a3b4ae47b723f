"""Univariate and multivariate polynomials, Hasse derivatives and restrictions."""
from __future__ import annotations

from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .gf import ExtFieldCtx, FieldCtx, PrimeFieldCtx

DEG_ZERO = -1  # degree reported for the zero polynomial

DerivVector = tuple


def binom_mod(n: int, k: int, p: int) -> int:
    """C(n, k) mod p for prime p via Lucas' theorem."""
    if k < 0 or k > n:
        return 0
    out = 1
    while n or k:
        ni, ki = n % p, k % p
        if ki > ni:
            return 0
        out = out * _small_binom(ni, ki, p) % p
        n //= p
        k //= p
    return out


@lru_cache(maxsize=None)
def _binom_row_table(p: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1]]
    for n in range(1, p):
        prev = rows[-1]
        rows.append([1] + [(prev[i - 1] + prev[i]) % p for i in range(1, n)] + [1])
    return tuple(tuple(r) for r in rows)


def _small_binom(n: int, k: int, p: int) -> int:
    if p <= 2048:
        return _binom_row_table(p)[n][k]
    num = den = 1
    for i in range(k):
        num = num * (n - i) % p
        den = den * (i + 1) % p
    return num * pow(den, p - 2, p) % p


@lru_cache(maxsize=64)
def binom_matrix(n_max: int, p: int) -> np.ndarray:
    """B[n, i] = C(n, i) mod p for 0 <= i, n <= n_max."""
    B = np.zeros((n_max + 1, n_max + 1), dtype=np.int64)
    for n in range(n_max + 1):
        for i in range(n + 1):
            B[n, i] = binom_mod(n, i, p)
    B.setflags(write=False)
    return B


class Poly:
    """Dense univariate polynomial; coeffs[k] is the coefficient of X^k."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs: Iterable = ()):
        cs = list(coeffs)
        zero = ctx.zero
        while cs and cs[-1] == zero:
            cs.pop()
        self.ctx = ctx
        self.coeffs = tuple(cs)

    @classmethod
    def from_ints(cls, ctx: FieldCtx, coeffs: Iterable[int]) -> "Poly":
        return cls(ctx, [ctx.check(int(c)) if isinstance(ctx, PrimeFieldCtx) else ctx.embed(int(c)) for c in coeffs])

    @classmethod
    def monomial(cls, ctx: FieldCtx, k: int, c=None) -> "Poly":
        c = ctx.one if c is None else c
        return cls(ctx, [ctx.zero] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.ctx.zero

    def to_array(self, length: int | None = None) -> np.ndarray:
        n = len(self.coeffs) if length is None else length
        out = np.zeros(n, dtype=np.int64)
        out[: len(self.coeffs)] = self.coeffs[:n]
        return out

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __lt__(self, other: "Poly") -> bool:
        return (len(self.coeffs), self.coeffs[::-1]) < (len(other.coeffs), other.coeffs[::-1])

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        add = self.ctx.add
        return Poly(self.ctx, [add(x, b[i]) if i < len(b) else x for i, x in enumerate(a)])

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, [self.ctx.neg(c) for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        mul = self.ctx.mul
        return Poly(self.ctx, [mul(c, x) for x in self.coeffs])

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(self.ctx)
        ctx = self.ctx
        if isinstance(ctx, PrimeFieldCtx):
            q = ctx.q
            out = [0] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        out[i + j] += x * y
            return Poly(ctx, [c % q for c in out])
        out = [ctx.zero] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if ctx.is_zero(x):
                continue
            for j, y in enumerate(b):
                out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
        return Poly(ctx, out)

    def shift(self, k: int) -> "Poly":
        """Multiply by X^k."""
        if not self.coeffs:
            return self
        return Poly(self.ctx, [self.ctx.zero] * k + list(self.coeffs))

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            from .errors import DivisionByZero

            raise DivisionByZero("polynomial division by zero")
        ctx = self.ctx
        r = list(self.coeffs)
        db = other.degree
        inv_lead = ctx.inv(other.coeffs[-1])
        quot = [ctx.zero] * max(0, len(r) - db)
        while len(r) - 1 >= db and r:
            c = ctx.mul(r[-1], inv_lead)
            k = len(r) - 1 - db
            quot[k] = c
            for i, bi in enumerate(other.coeffs):
                r[k + i] = ctx.sub(r[k + i], ctx.mul(c, bi))
            while r and r[-1] == ctx.zero:
                r.pop()
        return Poly(ctx, quot), Poly(ctx, r)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(self.ctx.inv(self.coeffs[-1]))

    def __call__(self, a):
        ctx = self.ctx
        if isinstance(ctx, PrimeFieldCtx):
            q = ctx.q
            acc = 0
            for c in reversed(self.coeffs):
                acc = (acc * a + c) % q
            return acc
        acc = ctx.zero
        for c in reversed(self.coeffs):
            acc = ctx.add(ctx.mul(acc, a), c)
        return acc

    def compose_affine(self, c0, c1) -> "Poly":
        """P(c0 + c1*T) as a polynomial in T."""
        ctx = self.ctx
        lin = Poly(ctx, [c0, c1])
        acc = Poly(ctx)
        for c in reversed(self.coeffs):
            acc = acc * lin + Poly(ctx, [c])
        return acc


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_powmod(base: Poly, e: int, mod: Poly) -> Poly:
    ctx = base.ctx
    result = Poly(ctx, [ctx.one])
    base = base % mod
    while e:
        if e & 1:
            result = (result * base) % mod
        base = (base * base) % mod
        e >>= 1
    return result


class MultiPoly:
    """Sparse m-variate polynomial: exponent tuple -> nonzero coefficient."""

    __slots__ = ("ctx", "m", "terms")

    def __init__(self, ctx: FieldCtx, m: int, terms: dict | None = None):
        self.ctx = ctx
        self.m = m
        zero = ctx.zero
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != m:
                raise DimensionMismatch(f"exponent {e} has length != {m}")
            if c != zero:
                clean[e] = c
        self.terms = clean

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=DEG_ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"MultiPoly({self.m}, {dict(sorted(self.terms.items()))})"

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.m == other.m and self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = self.ctx.add(out[e], c) if e in out else c
        return MultiPoly(self.ctx, self.m, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.ctx, self.m, {e: self.ctx.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c) -> "MultiPoly":
        return MultiPoly(self.ctx, self.m, {e: self.ctx.mul(c, v) for e, v in self.terms.items()})

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        ctx = self.ctx
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = ctx.mul(c1, c2)
                out[e] = ctx.add(out[e], v) if e in out else v
        return MultiPoly(ctx, self.m, out)

    def __call__(self, point: Sequence):
        if len(point) != self.m:
            raise DimensionMismatch(f"point has {len(point)} coordinates, expected {self.m}")
        ctx = self.ctx
        acc = ctx.zero
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = ctx.mul(v, ctx.pow(x, k))
            acc = ctx.add(acc, v)
        return acc

    def is_homogeneous(self, j: int) -> bool:
        return all(sum(e) == j for e in self.terms)

    def to_dense(self, deg: int) -> np.ndarray:
        """Coefficient tensor of shape (deg+1,)*m (prime fields only)."""
        T = np.zeros((deg + 1,) * self.m, dtype=np.int64)
        for e, c in self.terms.items():
            T[e] = c
        return T


@lru_cache(maxsize=None)
def graded_lex(m: int, s: int) -> tuple[tuple[int, ...], ...]:
    """U_{m,s} = {i in N^m : wt(i) < s}, by weight then lexicographically descending."""
    out = []
    for w in range(s):
        block = [e for e in _compositions(w, m)]
        block.sort(reverse=True)
        out.extend(block)
    return tuple(out)


def _compositions(w: int, m: int):
    if m == 1:
        yield (w,)
        return
    for first in range(w + 1):
        for rest in _compositions(w - first, m - 1):
            yield (first,) + rest


def hasse_derive(P, i):
    """Hasse derivative of order i (an int, or an exponent vector for MultiPoly)."""
    if isinstance(P, Poly):
        i = int(i)
        p = P.ctx.char
        mul_int = _int_scaler(P.ctx)
        return Poly(P.ctx, [mul_int(binom_mod(n, i, p), c) for n, c in enumerate(P.coeffs) if n >= i])
    i = tuple(int(x) for x in i)
    if len(i) != P.m:
        raise DimensionMismatch(f"order {i} has length != {P.m}")
    p = P.ctx.char
    mul_int = _int_scaler(P.ctx)
    out = {}
    for e, c in P.terms.items():
        if all(a >= b for a, b in zip(e, i)):
            k = 1
            for a, b in zip(e, i):
                k = k * binom_mod(a, b, p) % p
            if k:
                out[tuple(a - b for a, b in zip(e, i))] = mul_int(k, c)
    return MultiPoly(P.ctx, P.m, out)


def _int_scaler(ctx: FieldCtx):
    if isinstance(ctx, PrimeFieldCtx):
        q = ctx.q
        return lambda k, c: k * c % q
    return lambda k, c: ctx.scale(k, c)


def eval_order(P, a, s: int) -> DerivVector:
    """P^{(<s)}(a): Hasse derivatives of order < s evaluated at a."""
    if isinstance(P, Poly):
        return tuple(hasse_derive(P, i)(a) for i in range(s))
    if len(a) != P.m:
        raise DimensionMismatch(f"point has {len(a)} coordinates, expected {P.m}")
    return tuple(hasse_derive(P, i)(a) for i in graded_lex(P.m, s))


def restrict_line(Q: MultiPoly, x: Sequence[int], b: Sequence[int]) -> Poly:
    """Q(x + T*b) as a univariate polynomial in T."""
    if len(x) != Q.m or len(b) != Q.m:
        raise DimensionMismatch("point or direction has the wrong arity")
    ctx = Q.ctx
    lines = [Poly(ctx, [xk, bk]) for xk, bk in zip(x, b)]
    powers: list[list[Poly]] = [[Poly(ctx, [ctx.one])] for _ in range(Q.m)]
    acc = Poly(ctx)
    for e, c in Q.terms.items():
        term = Poly(ctx, [c])
        for k, ek in enumerate(e):
            pk = powers[k]
            while len(pk) <= ek:
                pk.append(pk[-1] * lines[k])
            term = term * pk[ek]
        acc = acc + term
    return acc


def restriction_matrix(b: Sequence[int], s: int, q: int) -> np.ndarray:
    """R with R @ z = restrict_symbol(z, b) for symbols z over U_{m,s} (prime field)."""
    m = len(b)
    idx = graded_lex(m, s)
    R = np.zeros((s, len(idx)), dtype=np.int64)
    for col, e in enumerate(idx):
        v = 1
        for bk, ek in zip(b, e):
            v = v * pow(int(bk), ek, q) % q
        R[sum(e), col] = v
    return R


def restrict_symbol(z: Sequence[int], b: Sequence[int], ctx: PrimeFieldCtx) -> DerivVector:
    """h^(j) = sum over wt(i) = j of z^(i) b^i, for j below the symbol's order."""
    m = len(b)
    s = symbol_order(len(z), m)
    R = restriction_matrix(b, s, ctx.q)
    return tuple(int(v) for v in (R @ np.asarray(z, dtype=np.int64)) % ctx.q)


@lru_cache(maxsize=None)
def symbol_order(length: int, m: int) -> int:
    s = 0
    while len(graded_lex(m, s)) < length:
        s += 1
    if len(graded_lex(m, s)) != length:
        raise DimensionMismatch(f"{length} is not |U_(m,s)| for m={m}")
    return s


def wronskian_det(fs: Sequence[Poly]) -> Poly:
    """Determinant of the Hasse-derivative Wronskian, entry (i, j) = f_j^(i).

    Fraction-free Bareiss elimination over F_q[X].
    """
    t = len(fs)
    ctx = fs[0].ctx
    M = [[hasse_derive(f, i) for f in fs] for i in range(t)]
    sign = 1
    prev = Poly(ctx, [ctx.one])
    for k in range(t - 1):
        if M[k][k].is_zero():
            swap = next((r for r in range(k + 1, t) if not M[r][k].is_zero()), None)
            if swap is None:
                return Poly(ctx)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, t):
            for j in range(k + 1, t):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = num // prev
            M[i][k] = Poly(ctx)
        prev = M[k][k]
    det = M[t - 1][t - 1]
    return det if sign == 1 else -det


def wronskian_det_leibniz(fs: Sequence[Poly]) -> Poly:
    """Permutation-sum determinant; an independent reference for tests."""
    t = len(fs)
    ctx = fs[0].ctx
    M = [[hasse_derive(f, i) for f in fs] for i in range(t)]
    acc = Poly(ctx)
    for perm in permutations(range(t)):
        inv = sum(1 for a in range(t) for b in range(a + 1, t) if perm[a] > perm[b])
        term = Poly(ctx, [ctx.one])
        for i in range(t):
            term = term * M[i][perm[i]]
        acc = acc + (term if inv % 2 == 0 else -term)
    return acc


# numpy helpers for prime fields -------------------------------------------

def power_table(points: Sequence[int], deg: int, q: int) -> np.ndarray:
    """V[a, k] = points[a]^k mod q."""
    pts = np.asarray(points, dtype=np.int64) % q
    V = np.ones((len(pts), deg + 1), dtype=np.int64)
    for k in range(1, deg + 1):
        V[:, k] = V[:, k - 1] * pts % q
    return V


def hasse_eval_tables(points: Sequence[int], deg: int, s: int, q: int) -> np.ndarray:
    """E[i, a, k] = C(k, i) * points[a]^(k-i) mod q (zero when k < i).

    E[i] @ coeffs gives the order-i Hasse derivative at every point.
    """
    V = power_table(points, deg, q)
    B = binom_matrix(max(deg, s), q)
    E = np.zeros((s, len(V), deg + 1), dtype=np.int64)
    for i in range(s):
        if i > deg:
            break
        E[i, :, i:] = V[:, : deg + 1 - i] * B[i : deg + 1, i][None, :] % q
    return E


def eval_order_many(coeffs: np.ndarray, points: Sequence[int], s: int, q: int) -> np.ndarray:
    """Rows P^{(<s)}(a) for every point a, from a coefficient array (prime field)."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    deg = max(len(coeffs) - 1, 0)
    if len(coeffs) == 0:
        return np.zeros((len(points), s), dtype=np.int64)
    E = hasse_eval_tables(points, deg, s, q)
    return np.einsum("iak,k->ai", E, coeffs) % q
