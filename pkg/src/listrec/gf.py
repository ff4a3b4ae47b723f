"""Prime fields F_q and extension fields GF(q^t).

Prime-field elements are ints in [0, q). Extension-field elements are tuples
of t base-field ints, read as the coefficients (low degree first) of a
polynomial reduced modulo ``modpoly``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DivisionByZero, InvalidElement, InvalidModulus, IrreducibleSearchFailed

TABLE_LIMIT = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


def find_primitive(q: int) -> int:
    """Smallest generator of the multiplicative group of F_q."""
    if not is_prime(q):
        raise InvalidModulus(f"{q} is not prime")
    if q == 2:
        return 1
    divs = prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // p, q) != 1 for p in divs):
            return g
    raise InvalidModulus(f"no primitive element found for {q}")  # unreachable


@dataclass(frozen=True)
class PrimeFieldCtx:
    q: int
    gamma: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise InvalidModulus(f"{self.q} is not prime")
        if not 1 <= self.gamma < self.q:
            raise InvalidElement(f"gamma={self.gamma} out of range")

    @property
    def order(self) -> int:
        return self.q

    @property
    def char(self) -> int:
        return self.q

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def check(self, a) -> int:
        if not isinstance(a, (int, np.integer)) or isinstance(a, bool) or not 0 <= a < self.q:
            raise InvalidElement(f"{a!r} is not an element of F_{self.q}")
        return int(a)

    def is_zero(self, a) -> bool:
        return a == 0

    def embed(self, c: int) -> int:
        return self.check(c)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise DivisionByZero("inverse of zero")
        return pow(a, self.q - 2, self.q)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.q

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.q)
        return pow(a, e, self.q)

    def elements(self) -> Iterator[int]:
        return iter(range(self.q))

    def random(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.q))

    def inv_table(self) -> np.ndarray:
        return _inv_table(self.q)


@lru_cache(maxsize=None)
def _inv_table(q: int) -> np.ndarray:
    tab = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        tab[a] = pow(a, q - 2, q)
    tab.setflags(write=False)
    return tab


@lru_cache(maxsize=None)
def prime_field(q: int) -> PrimeFieldCtx:
    return PrimeFieldCtx(q, find_primitive(q))


# dense polynomials over F_q as coefficient lists, low degree first; used only
# for the irreducibility search so this module stays free of poly imports

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], m: list[int], q: int) -> list[int]:
    a = _trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], q - 2, q)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % q
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % q
        _trim(a)
    return a


def _pmulmod(a: list[int], b: list[int], m: list[int], q: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % q
    return _pmod(out, m, q)


def _ppowmod(a: list[int], e: int, m: list[int], q: int) -> list[int]:
    result = [1]
    base = _pmod(a, m, q)
    while e:
        if e & 1:
            result = _pmulmod(result, base, m, q)
        base = _pmulmod(base, base, m, q)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], q: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, q)
    return a


def is_irreducible(f: Sequence[int], q: int) -> bool:
    """gcd(f, X^(q^k) - X) = 1 for every k <= deg(f)/2."""
    f = _trim(list(f))
    t = len(f) - 1
    if t < 1:
        return False
    if t == 1:
        return True
    xk = [0, 1]
    for _ in range(t // 2):
        xk = _ppowmod(xk, q, f, q)
        diff = list(xk) + [0] * max(0, 2 - len(xk))
        diff[1] = (diff[1] - 1) % q
        if len(_pgcd(f, diff, q)) > 1:
            return False
    return True


@dataclass(frozen=True)
class ExtFieldCtx:
    base: PrimeFieldCtx
    t: int
    modpoly: tuple[int, ...]
    _tables: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def order(self) -> int:
        return self.base.q ** self.t

    @property
    def char(self) -> int:
        return self.base.q

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.t

    @property
    def one(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.t - 1)

    def check(self, a) -> tuple[int, ...]:
        if not isinstance(a, tuple) or len(a) != self.t:
            raise InvalidElement(f"{a!r} is not a length-{self.t} coefficient tuple")
        for c in a:
            self.base.check(c)
        return a

    def is_zero(self, a) -> bool:
        return not any(a)

    def embed(self, c: int) -> tuple[int, ...]:
        return (self.base.check(c),) + (0,) * (self.t - 1)

    def phi(self, v: Sequence[int]) -> tuple[int, ...]:
        """F_q^t -> K, the coordinate-identity bijection."""
        return self.check(tuple(int(c) for c in v))

    def phi_inv(self, a: tuple[int, ...]) -> tuple[int, ...]:
        return self.check(a)

    def to_index(self, a: tuple[int, ...]) -> int:
        idx = 0
        for c in reversed(a):
            idx = idx * self.q + c
        return idx

    def from_index(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.t):
            idx, c = divmod(idx, self.q)
            out.append(c)
        return tuple(out)

    def add(self, a, b):
        q = self.q
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a, b):
        q = self.q
        return tuple((x - y) % q for x, y in zip(a, b))

    def neg(self, a):
        q = self.q
        return tuple((-x) % q for x in a)

    def scale(self, c: int, a):
        q = self.q
        return tuple((c * x) % q for x in a)

    def _mul_raw(self, a, b):
        q, t, m = self.q, self.t, self.modpoly
        prod = [0] * (2 * t - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        for k in range(2 * t - 2, t - 1, -1):
            c = prod[k] % q
            if c:
                base = k - t
                for i in range(t):
                    prod[base + i] -= c * m[i]
        return tuple(c % q for c in prod[:t])

    def _log_tables(self):
        tabs = self._tables.get("log")
        if tabs is None:
            tabs = _build_log_tables(self)
            self._tables["log"] = tabs
        return tabs

    def use_tables(self) -> bool:
        return self.order <= TABLE_LIMIT

    def mul(self, a, b):
        if self.use_tables():
            if not any(a) or not any(b):
                return self.zero
            exp, log = self._log_tables()
            return self.from_index(int(exp[(log[self.to_index(a)] + log[self.to_index(b)]) % (self.order - 1)]))
        return self._mul_raw(a, b)

    def pow(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a):
        if not any(a):
            raise DivisionByZero("inverse of zero")
        return self.pow(a, self.order - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def elements(self) -> Iterator[tuple[int, ...]]:
        return (self.from_index(i) for i in range(self.order))

    def random(self, rng: np.random.Generator):
        return tuple(int(c) for c in rng.integers(self.q, size=self.t))

    def mul_matrix(self, beta) -> np.ndarray:
        """t x t matrix M over F_q with coords(c * beta) = M @ coords(c)."""
        cols = [tuple(beta)]
        x = self.from_index(self.q % self.order) if self.t > 1 else None
        for _ in range(self.t - 1):
            cols.append(self._mul_raw(cols[-1], x))
        return np.array(cols, dtype=np.int64).T


def _build_log_tables(ctx: ExtFieldCtx):
    order = ctx.order
    divs = prime_factors(order - 1)
    for idx in range(1, order):
        g = ctx.from_index(idx)
        if all(_raw_pow(ctx, g, (order - 1) // p) != ctx.one for p in divs):
            break
    else:  # pragma: no cover
        raise IrreducibleSearchFailed("no generator found")
    exp = np.zeros(order - 1, dtype=np.int64)
    log = np.zeros(order, dtype=np.int64)
    cur = ctx.one
    for k in range(order - 1):
        i = ctx.to_index(cur)
        exp[k] = i
        log[i] = k
        cur = ctx._mul_raw(cur, g)
    return exp, log


def _raw_pow(ctx: ExtFieldCtx, a, e: int):
    result = ctx.one
    while e:
        if e & 1:
            result = ctx._mul_raw(result, a)
        a = ctx._mul_raw(a, a)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def build_extension(q: int, t: int) -> ExtFieldCtx:
    """GF(q^t) with the smallest irreducible modulus.

    Candidates X^t + c_{t-1}X^{t-1} + ... + c_0 are scanned in increasing
    order of the integer sum c_k q^k.
    """
    if t < 1:
        raise InvalidModulus("extension degree must be >= 1")
    base = prime_field(q)
    for idx in range(q ** t):
        low = []
        k = idx
        for _ in range(t):
            k, c = divmod(k, q)
            low.append(c)
        cand = low + [1]
        if is_irreducible(cand, q):
            return ExtFieldCtx(base, t, tuple(cand))
    raise IrreducibleSearchFailed(f"no irreducible of degree {t} over F_{q}")


FieldCtx = PrimeFieldCtx | ExtFieldCtx


def field_arith(ctx: FieldCtx, op: str, a, b=None):
    """Dispatch one of add, sub, mul, div, pow, inv after validating inputs."""
    ctx.check(a)
    if op == "inv":
        return ctx.inv(a)
    if op == "pow":
        return ctx.pow(a, int(b))
    ctx.check(b)
    if op == "add":
        return ctx.add(a, b)
    if op == "sub":
        return ctx.sub(a, b)
    if op == "mul":
        return ctx.mul(a, b)
    if op == "div":
        return ctx.div(a, b)
    raise ValueError(f"unknown op {op!r}")
