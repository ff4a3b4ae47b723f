"""FRS and multiplicity encoders, code parameters, channel simulation and wire format."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeTooHigh, DimensionMismatch, InvalidElement
from .gf import PrimeFieldCtx, prime_field
from .poly import MultiPoly, Poly, graded_lex, hasse_eval_tables, power_table

Symbol = tuple  # a tuple of field ints


def as_fraction(x) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats (via repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(str(x))


@dataclass(frozen=True)
class FrsParams:
    ctx: PrimeFieldCtx
    s: int
    n: int
    d: int
    evalset: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.ctx.q

    def points(self) -> np.ndarray:
        """pts[i, j] = gamma^j * a_i, the s field points bundled into symbol i."""
        q, g = self.ctx.q, self.ctx.gamma
        shifts = np.array([pow(g, j, q) for j in range(self.s)], dtype=np.int64)
        return np.asarray(self.evalset, dtype=np.int64)[:, None] * shifts[None, :] % q


def frs_params(ctx: PrimeFieldCtx, s: int, n: int, d: int, evalset: Sequence[int] | None = None) -> FrsParams:
    q, g = ctx.q, ctx.gamma
    if s < 1 or n < 1 or d < 0:
        raise ValueError("need s >= 1, n >= 1, d >= 0")
    limit = (q - 1) // s
    if n > limit:
        raise ValueError(f"n={n} exceeds (q-1)/s={limit}")
    allowed = {pow(g, s * i, q) for i in range(limit)}
    if evalset is None:
        evalset = [pow(g, s * i, q) for i in range(n)]
    evalset = tuple(int(a) for a in evalset)
    if len(evalset) != n or len(set(evalset)) != n or not set(evalset) <= allowed:
        raise ValueError("evalset must be n distinct elements gamma^(s*i)")
    return FrsParams(ctx, s, n, d, evalset)


@dataclass(frozen=True)
class MultParams:
    ctx: PrimeFieldCtx
    s: int
    m: int
    d: int
    evalset: tuple[int, ...] | None = None

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def n(self) -> int:
        return len(self.evalset) if self.m == 1 else self.ctx.q ** self.m

    @property
    def arity(self) -> int:
        return len(graded_lex(self.m, self.s))

    def domain(self) -> list:
        if self.m == 1:
            return list(self.evalset)
        return list(itertools.product(range(self.ctx.q), repeat=self.m))

    def whole_field(self) -> bool:
        return self.m >= 2 or sorted(self.evalset) == list(range(self.ctx.q))


def mult_params(ctx: PrimeFieldCtx, s: int, d: int, m: int = 1, evalset: Sequence[int] | None = None) -> MultParams:
    if s < 1 or m < 1 or d < 0:
        raise ValueError("need s >= 1, m >= 1, d >= 0")
    if m == 1:
        evalset = tuple(range(ctx.q)) if evalset is None else tuple(int(a) for a in evalset)
        if len(set(evalset)) != len(evalset) or not all(0 <= a < ctx.q for a in evalset):
            raise ValueError("evalset must be distinct field elements")
        return MultParams(ctx, s, 1, d, evalset)
    if evalset is not None:
        raise ValueError("multivariate codes use the whole of F_q^m")
    return MultParams(ctx, s, m, d, None)


@dataclass(frozen=True)
class Codeword:
    q: int
    symbols: tuple[Symbol, ...]

    @property
    def n(self) -> int:
        return len(self.symbols)

    def __post_init__(self):
        if len({len(sym) for sym in self.symbols}) > 1:
            raise DimensionMismatch("symbols of unequal arity")


@dataclass(frozen=True)
class ListWord:
    q: int
    lists: tuple[tuple[Symbol, ...], ...]

    @property
    def n(self) -> int:
        return len(self.lists)

    @property
    def ell(self) -> int:
        return max((len(x) for x in self.lists), default=0)

    @classmethod
    def build(cls, q: int, lists: Sequence[Sequence[Sequence[int]]]) -> "ListWord":
        return cls(q, tuple(tuple(sorted({tuple(int(v) for v in y) for y in L})) for L in lists))

    @classmethod
    def from_codeword(cls, c: Codeword) -> "ListWord":
        return cls(c.q, tuple((sym,) for sym in c.symbols))


def _coeff_array(P: Poly, d: int) -> np.ndarray:
    if P.degree > d:
        raise DegreeTooHigh(f"degree {P.degree} exceeds {d}")
    return P.to_array(d + 1)


def frs_encode_array(coeffs: np.ndarray, params: FrsParams) -> np.ndarray:
    """(n, s) array of symbols for the coefficient vector(s); accepts a stack (k, d+1)."""
    q = params.q
    pts = params.points().reshape(-1)
    V = power_table(pts, params.d, q)
    coeffs = np.asarray(coeffs, dtype=np.int64)
    vals = (coeffs @ V.T) % q
    return vals.reshape(coeffs.shape[:-1] + (params.n, params.s))


def frs_encode(P: Poly, params: FrsParams) -> Codeword:
    arr = frs_encode_array(_coeff_array(P, params.d), params)
    return Codeword(params.q, tuple(tuple(int(v) for v in row) for row in arr))


def mult_encode_array(coeffs: np.ndarray, params: MultParams) -> np.ndarray:
    """(n, arity) symbol array from dense coefficients.

    m = 1: coeffs has shape (..., d+1). m >= 2: coeffs is a (d+1,)*m tensor.
    """
    q, s, d = params.q, params.s, params.d
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if params.m == 1:
        E = hasse_eval_tables(params.evalset, d, s, q)
        return np.einsum("iak,...k->...ai", E, coeffs) % q
    E = hasse_eval_tables(range(q), d, s, q)
    out = np.zeros((q ** params.m, params.arity), dtype=np.int64)
    for col, idx in enumerate(graded_lex(params.m, s)):
        T = coeffs
        for axis, ik in enumerate(idx):
            # contract the leading exponent axis; the new point axis goes last
            T = np.tensordot(T, E[ik], axes=([0], [1])) % q
        out[:, col] = T.reshape(-1)
    return out


def mult_encode(P: Poly | MultiPoly, params: MultParams) -> Codeword:
    if params.m == 1:
        if not isinstance(P, Poly):
            raise DimensionMismatch("univariate code needs a Poly")
        arr = mult_encode_array(_coeff_array(P, params.d), params)
    else:
        if not isinstance(P, MultiPoly) or P.m != params.m:
            raise DimensionMismatch(f"expected a {params.m}-variate polynomial")
        if P.degree > params.d:
            raise DegreeTooHigh(f"degree {P.degree} exceeds {params.d}")
        arr = mult_encode_array(P.to_dense(params.d), params)
    return Codeword(params.q, tuple(tuple(int(v) for v in row) for row in arr))


@dataclass(frozen=True)
class CodeStats:
    rate: Fraction
    distance: Fraction
    rate_is_bound: bool = False
    degenerate: bool = False


def code_stats(params: FrsParams | MultParams) -> CodeStats:
    if isinstance(params, FrsParams) or params.m == 1:
        sn = params.s * params.n
        return CodeStats(Fraction(params.d + 1, sn), 1 - Fraction(params.d, sn))
    s, m, q, d = params.s, params.m, params.q, params.d
    bound = (1 - Fraction(m * m, s)) * Fraction(d, s * q) ** m
    return CodeStats(max(bound, Fraction(0)), 1 - Fraction(d, s * q), True, s <= m * m)


def agreement(c: Codeword, S: ListWord) -> int:
    if c.n != S.n:
        raise DimensionMismatch("length mismatch")
    return sum(1 for sym, L in zip(c.symbols, S.lists) if sym in L)


def dist(c: Codeword, S: ListWord) -> Fraction:
    return Fraction(c.n - agreement(c, S), c.n)


def plant_channel(c: Codeword, alpha, ell: int, rng: np.random.Generator,
                  decoy_pool: Sequence[Codeword] = ()) -> ListWord:
    """Corrupt exactly floor(alpha*n) positions and pad every list to size ell.

    Decoys are uniform over the alphabet minus entries already present; when
    decoy_pool is given, decoys are taken first from those codewords' symbols.
    """
    alpha = as_fraction(alpha)
    if not 0 <= alpha <= 1 or ell < 1:
        raise ValueError("need 0 <= alpha <= 1 and ell >= 1")
    n, q = c.n, c.q
    arity = len(c.symbols[0]) if n else 0
    if q ** arity < ell + 1:
        raise ValueError("alphabet too small for the requested list size")
    k = int(alpha * n)
    bad = set(int(i) for i in rng.choice(n, size=k, replace=False)) if k else set()
    lists = []
    for pos, sym in enumerate(c.symbols):
        present = set() if pos in bad else {sym}
        forbidden = {sym}
        for other in decoy_pool:
            if len(present) >= ell:
                break
            cand = other.symbols[pos]
            if cand not in present and cand not in forbidden:
                present.add(cand)
        while len(present) < ell:
            cand = tuple(int(v) for v in rng.integers(q, size=arity))
            if cand not in present and cand not in forbidden:
                present.add(cand)
        lists.append(tuple(sorted(present)))
    return ListWord(q, tuple(lists))


# wire format ---------------------------------------------------------------

def _header(q: int, s: int, m: int, n: int, d: int, kind: str) -> str:
    return f"kind={kind} q={q} s={s} m={m} n={n} d={d}"


def _parse_header(line: str) -> dict:
    fields = dict(tok.split("=", 1) for tok in line.split())
    return {k: (v if k == "kind" else int(v)) for k, v in fields.items()}


def _fmt(sym: Symbol) -> str:
    return ",".join(str(v) for v in sym)


def _params_tuple(params) -> tuple[int, int, int, int, int]:
    m = 1 if isinstance(params, FrsParams) else params.m
    return params.q, params.s, m, params.n, params.d


def dump_codeword(c: Codeword, params) -> str:
    lines = [_header(*_params_tuple(params), kind="codeword")]
    lines += [_fmt(sym) for sym in c.symbols]
    return "\n".join(lines) + "\n"


def dump_listword(S: ListWord, params) -> str:
    lines = [_header(*_params_tuple(params), kind="listword")]
    lines += ["|".join(_fmt(sym) for sym in L) for L in S.lists]
    return "\n".join(lines) + "\n"


def _parse_symbol(text: str, q: int) -> Symbol:
    sym = tuple(int(v) for v in text.split(","))
    if any(not 0 <= v < q for v in sym):
        raise InvalidElement(f"symbol {text!r} out of range for q={q}")
    return sym


def load_codeword(text: str) -> tuple[dict, Codeword]:
    lines = text.split("\n")
    head = _parse_header(lines[0])
    body = lines[1 : 1 + head["n"]]
    return head, Codeword(head["q"], tuple(_parse_symbol(x, head["q"]) for x in body))


def load_listword(text: str) -> tuple[dict, ListWord]:
    lines = text.split("\n")
    head = _parse_header(lines[0])
    body = lines[1 : 1 + head["n"]]
    body += [""] * (head["n"] - len(body))
    lists = tuple(tuple(_parse_symbol(x, head["q"]) for x in row.split("|")) if row else () for row in body)
    return head, ListWord(head["q"], lists)


def random_poly(ctx: PrimeFieldCtx, d: int, rng: np.random.Generator) -> Poly:
    return Poly(ctx, [int(v) for v in rng.integers(ctx.q, size=d + 1)])


def random_multipoly(ctx: PrimeFieldCtx, m: int, d: int, rng: np.random.Generator) -> MultiPoly:
    terms = {}
    for e in itertools.product(range(d + 1), repeat=m):
        if sum(e) <= d:
            terms[e] = int(rng.integers(ctx.q))
    return MultiPoly(ctx, m, terms)

