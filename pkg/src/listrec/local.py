"""Local list-recovery of multivariate multiplicity codes.

recover_candidates produces advice strings from one random base point a,
oracle_eval turns advice into a virtual codeword through line decoding, and
self_correct locally corrects that virtual word. local_list_recover ties the
three together and returns one decoder per advice string.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .codes import ListWord, MultParams, as_fraction, mult_params
from .errors import RegimeViolation, UnderDetermined
from .linalg import solve
from .poly import MultiPoly, Poly, binom_mod, eval_order_many, graded_lex, restriction_matrix
from .prune import (default_tau_whole_field, p0_mult, prune_rounds, repetitions_for,
                    smallest_feasible_order, within_radius)
from .rm_grid import GridInstance, vector_rm_list_recover
from .subspace import find_operator_mult, solution_space

Point = tuple[int, ...]
GRID_ALPHA = Fraction(1, 3)


def unique_radius(q: int, s: int, d: int, ell: int = 1) -> Fraction:
    """Largest k/q at which the order-1 interpolation system is still solvable."""
    best = Fraction(0)
    for k in range(q):
        a = Fraction(k, q)
        if smallest_feasible_order(q, s, d, ell, a) == 1:
            best = a
    return best


@dataclass
class LocalCfg:
    params: MultParams
    ell: int = 1
    alpha: Fraction = Fraction(1, 100)
    alpha_prime: Fraction | None = None
    s_star: int | None = None
    U_size: int | None = None
    L_est: int | None = None
    relaxed: bool = False
    K_param: int | None = None
    sc_lines: int | None = None
    sc_alpha: Fraction | None = None
    sc_tries: int = 30
    line_r: int = 1
    C_const: int = 576

    def __post_init__(self):
        p = self.params
        if p.m < 2:
            raise ValueError("local recovery needs m >= 2")
        self.alpha = as_fraction(self.alpha)
        self.alpha_prime = as_fraction(self.alpha_prime) if self.alpha_prime is not None else 2 * self.alpha
        if not self.alpha < self.alpha_prime:
            raise ValueError("need alpha < alpha_prime")
        if self.L_est is None:
            self.L_est = self.ell
        if self.s_star is None:
            self.s_star = math.ceil(160 * self.L_est * p.s / self.delta)
        if self.s_star < p.s:
            raise ValueError("s_star must be at least s")
        if self.U_size is None:
            self.U_size = 100 * self.s_star * self.L_est * p.m ** 2
        if self.K_param is None:
            self.K_param = math.ceil(9 * p.m ** 2 / 4)
        if self.sc_lines is None:
            self.sc_lines = 4 * (2 * p.s) ** p.m
        if self.sc_alpha is None:
            self.sc_alpha = unique_radius(p.q, p.s, p.d)
        self.sc_alpha = as_fraction(self.sc_alpha)

    @property
    def delta(self) -> Fraction:
        p = self.params
        return 1 - Fraction(p.d, p.s * p.q)

    @property
    def query_budget(self) -> int:
        """Virtual-word positions read by one decoder invocation."""
        return self.sc_lines * self.params.q

    def check_regime(self) -> None:
        if self.relaxed:
            return
        p, delta = self.params, self.delta
        if self.U_size > p.q:
            raise RegimeViolation(f"U_size={self.U_size} exceeds q={p.q}")
        gap = self.alpha_prime - self.alpha
        C, m, L = self.C_const, p.m, self.L_est
        bounds = [160 * self.ell * p.s / delta, 640 / (gap * delta), C * self.s_star * L * m * m,
                  20 * C * m / gap, 10 * m, Fraction(p.d + 6, p.s), 12 * (p.s + 1)]
        need = max(bounds)
        if p.q < need:
            raise RegimeViolation(f"q={p.q} below the required {float(need):.4g}")
        if self.alpha > delta / 160:
            raise RegimeViolation(f"alpha={self.alpha} exceeds delta/160")


class QueryCounter:
    def __init__(self):
        self.count = 0

    def add(self, k: int) -> None:
        self.count += k


class SymbolTable:
    """Read-only view of a ListWord over F_q^m with points indexed lexicographically."""

    def __init__(self, S: ListWord, params: MultParams):
        if S.n != params.q ** params.m:
            raise ValueError("ListWord length does not match q^m")
        self.q, self.m, self.s = params.q, params.m, params.s
        w = params.arity
        self.syms = [np.array(L, dtype=np.int64).reshape(len(L), w) for L in S.lists]
        self.weights = self.q ** np.arange(self.m - 1, -1, -1, dtype=np.int64)

    def index(self, pt) -> int:
        return int(np.dot(np.asarray(pt, dtype=np.int64) % self.q, self.weights))

    def line_indices(self, p, b) -> np.ndarray:
        T = np.arange(self.q, dtype=np.int64)[:, None]
        pts = (np.asarray(p, dtype=np.int64)[None, :] + T * np.asarray(b, dtype=np.int64)[None, :]) % self.q
        return pts @ self.weights

    def restricted_line(self, p, b) -> ListWord:
        """The univariate list word t -> {y|_b : y in S(p + t b)}."""
        R = restriction_matrix(b, self.s, self.q)
        lists = [(self.syms[i] @ R.T) % self.q for i in self.line_indices(p, b)]
        return ListWord.build(self.q, lists)


def _line_params(params: MultParams) -> MultParams:
    return mult_params(params.ctx, params.s, params.d)


def _decode_line(S1: ListWord, p1: MultParams, alpha, r: int, rng: np.random.Generator,
                 strict: bool) -> list[Poly]:
    """Univariate whole-field list recovery of one line at radius alpha."""
    try:
        op = find_operator_mult(S1, r, alpha, p1)
    except UnderDetermined:
        if strict:
            raise
        return []
    space = solution_space(op, p1.d)
    if space.is_empty:
        return []
    if space.dim == 0:
        return within_radius([space.v0], S1, p1, alpha)
    tau = default_tau_whole_field(p1.s, r)
    reps = repetitions_for(p0_mult(alpha, tau, r, p1.s), max(S1.ell, 1), tau)
    found, _ = prune_rounds(S1, space, p1, tau, reps, rng)
    return within_radius(found, S1, p1, alpha)


def _derivs(P: Poly, t: int, order: int, q: int) -> np.ndarray:
    return eval_order_many(P.to_array(), [t], order, q)[0]


def _shift(P: MultiPoly, c: Sequence[int]) -> MultiPoly:
    """P(Y + c) for a prime-field MultiPoly."""
    q = P.ctx.q
    out: dict = {}
    for e, coef in P.terms.items():
        partial = {(): coef}
        for ei, ci in zip(e, c):
            nxt = {}
            for head, v in partial.items():
                for k in range(ei + 1):
                    w = v * binom_mod(ei, k, q) * pow(int(ci), ei - k, q) % q
                    if w:
                        nxt[head + (k,)] = (nxt.get(head + (k,), 0) + w) % q
            partial = nxt
        for mono, v in partial.items():
            out[mono] = (out.get(mono, 0) + v) % q
    return MultiPoly(P.ctx, P.m, out)


def recover_candidates(S: ListWord, a: Sequence[int], stilde: int, cfg: LocalCfg,
                       rng: np.random.Generator, counter: QueryCounter | None = None,
                       table: SymbolTable | None = None) -> list[tuple[int, ...]]:
    """Candidate order-stilde symbols at a, one for each codeword near S."""
    if stilde < 1:
        raise ValueError("stilde must be at least 1")
    params = cfg.params
    q, m = params.q, params.m
    if cfg.U_size > q:
        raise RegimeViolation(f"U_size={cfg.U_size} exceeds q={q}")
    table = table or SymbolTable(S, params)
    counter = counter or QueryCounter()
    p1 = _line_params(params)
    strict = not cfg.relaxed
    a = np.asarray(a, dtype=np.int64) % q
    b = rng.integers(q, size=m)
    U = tuple(range(cfg.U_size))
    f: dict[Point, tuple] = {}
    for u in itertools.product(U, repeat=m):
        bu = (b + np.asarray(u)) % q
        if not bu.any():
            f[u] = ()
            continue
        counter.add(q)
        polys = _decode_line(table.restricted_line(a, bu), p1, cfg.alpha_prime, cfg.line_r, rng, strict)
        f[u] = tuple(sorted({tuple(int(v) for v in _derivs(P, 0, stilde, q)) for P in polys}))
    if not any(f.values()):
        return []
    ell = max(cfg.L_est, max(len(v) for v in f.values()))
    inst = GridInstance(params.ctx, U, m, stilde - 1, f, ell, GRID_ALPHA, cfg.K_param, t=stilde,
                        strict=strict)
    neg_b = [(-int(v)) % q for v in b]
    Z = set()
    for comps in vector_rm_list_recover(inst):
        shifted = [_shift(P, neg_b) for P in comps]
        if not all(P.is_homogeneous(j) for j, P in enumerate(shifted)):
            continue
        Z.add(tuple(int(shifted[sum(i)].terms.get(i, 0)) for i in graded_lex(m, stilde)))
    return sorted(Z)


def oracle_eval(S: ListWord, a: Sequence[int], z: Sequence[int], x: Sequence[int], cfg: LocalCfg,
                rng: np.random.Generator | None = None, table: SymbolTable | None = None,
                counter: QueryCounter | None = None) -> tuple[int, ...] | None:
    """Advice-driven guess for the order-s symbol at x, or None for bottom."""
    params = cfg.params
    q, s = params.q, params.s
    table = table or SymbolTable(S, params)
    a = np.asarray(a, dtype=np.int64) % q
    x = np.asarray(x, dtype=np.int64) % q
    if (a == x).all():
        return None
    rng = rng if rng is not None else np.random.default_rng(0)
    bstar = (a - x) % q
    if counter is not None:
        counter.add(q)
    polys = _decode_line(table.restricted_line(x, bstar), _line_params(params), cfg.alpha_prime,
                         cfg.line_r, rng, not cfg.relaxed)
    target = restriction_matrix(bstar, cfg.s_star, q) @ np.asarray(z, dtype=np.int64) % q
    keep = [P for P in polys if (_derivs(P, 1, cfg.s_star, q) == target).all()]
    if len(keep) != 1:
        return None
    want = _derivs(keep[0], 0, s, q)
    R = restriction_matrix(bstar, s, q)
    ys = [y for y in table.syms[table.index(x)] if ((R @ y) % q == want).all()]
    return tuple(int(v) for v in ys[0]) if len(ys) == 1 else None


def _canonical(v: np.ndarray, q: int) -> tuple[int, np.ndarray]:
    """(c, dir) with v = c * dir and the first nonzero entry of dir equal to 1."""
    i0 = int(np.flatnonzero(v)[0])
    c = int(v[i0])
    return c, v * pow(c, -1, q) % q


def _solve_unique(E: np.ndarray, h: np.ndarray, q: int) -> np.ndarray | None:
    res = solve(E, h, q)
    if res is None or len(res[1]):
        return None
    return res[0]


def _consensus(E: np.ndarray, h: np.ndarray, q: int, rng: np.random.Generator, tries: int) -> np.ndarray:
    """Solution of E y = h agreeing with the most equations, from random square subsystems."""
    n_eq, k = E.shape
    if n_eq == 0:
        return np.zeros(k, dtype=np.int64)
    if k == 1:
        # every equation with a nonzero coefficient pins y down; take the most common value
        nz = E[:, 0] != 0
        if not nz.any():
            return np.zeros(1, dtype=np.int64)
        inv = np.array([0] + [pow(v, -1, q) for v in range(1, q)], dtype=np.int64)
        vals = h[nz] * inv[E[nz, 0]] % q
        return np.array([np.bincount(vals, minlength=q).argmax()], dtype=np.int64)
    best, best_support = None, -1
    seen = set()
    for _ in range(tries):
        rows = rng.choice(n_eq, size=min(k, n_eq), replace=False)
        y = _solve_unique(E[rows], h[rows], q)
        if y is None:
            continue
        key = tuple(int(v) for v in y)
        if key in seen:
            continue
        seen.add(key)
        support = int(((E @ y - h) % q == 0).sum())
        if support > best_support:
            best, best_support = y, support
    if best is None:
        res = solve(E[: min(k, n_eq)], h[: min(k, n_eq)], q)
        best = res[0] if res is not None else np.zeros(k, dtype=np.int64)
    return best % q


def _correct_line(word: Callable, base: np.ndarray, direction: np.ndarray, cfg: LocalCfg,
                  rng: np.random.Generator) -> np.ndarray | None:
    """Order-s derivative table (q, s) of the nearest codeword on the line, or None."""
    params = cfg.params
    q, s = params.q, params.s
    R = restriction_matrix(direction, s, q)
    lists = []
    for t in range(q):
        y = word(tuple(int(v) for v in (base + t * direction) % q))
        lists.append([] if y is None else [(R @ np.asarray(y, dtype=np.int64)) % q])
    S1 = ListWord.build(q, lists)
    p1 = _line_params(params)
    found = _decode_line(S1, p1, cfg.sc_alpha, 1, rng, False)
    if not found:
        return None
    tables = [eval_order_many(P.to_array(), range(q), s, q) for P in found]
    scores = [sum(tuple(int(v) for v in row) in L for row, L in zip(H, S1.lists)) for H in tables]
    return tables[int(np.argmax(scores))]


def self_correct(word: Callable[[Point], Sequence[int] | None], x: Sequence[int], cfg: LocalCfg,
                 rng: np.random.Generator, counter: QueryCounter | None = None,
                 cache: dict | None = None) -> tuple[int, ...]:
    """Locally correct the order-s symbol at x from a word close to a codeword.

    Each sampled direction b gives the restriction h_b of the nearest line
    codeword, and h_b^(j) = sum over wt(i) = j of Q^(i)(x) b^i; each order j
    is solved by the solution consistent with the most directions.
    """
    params = cfg.params
    q, m, s = params.q, params.m, params.s
    x = np.asarray(x, dtype=np.int64) % q
    cache = {} if cache is None else cache
    counter = counter or QueryCounter()
    blocks = [np.array([i for i in graded_lex(m, s) if sum(i) == j], dtype=np.int64) for j in range(s)]
    B = rng.integers(q, size=(cfg.sc_lines, m))
    for k in np.flatnonzero(~B.any(axis=1)):
        while not B[k].any():
            B[k] = rng.integers(q, size=m)
    i0 = (B != 0).argmax(axis=1)
    c = B[np.arange(len(B)), i0]
    inv = np.array([pow(int(v), -1, q) for v in range(1, q)], dtype=np.int64)
    dirs = B * inv[c - 1][:, None] % q
    t0 = x[i0]
    bases = (x[None, :] - t0[:, None] * dirs) % q
    tables = []
    for base, direction in zip(bases, dirs):
        key = (tuple(int(v) for v in base), tuple(int(v) for v in direction))
        counter.add(q)
        if key not in cache:
            cache[key] = _correct_line(word, base, direction, cfg, rng)
        tables.append(cache[key])
    live = np.array([H is not None for H in tables], dtype=bool)
    h = np.array([H[t] for H, t in zip(tables, t0) if H is not None], dtype=np.int64).reshape(-1, s)
    Bl, cl = B[live], c[live]
    P = np.ones((len(Bl), m, s), dtype=np.int64)
    for e in range(1, s):
        P[:, :, e] = P[:, :, e - 1] * Bl % q
    rows, rhs = [], []
    cj = np.ones(len(Bl), dtype=np.int64)
    for j in range(s):
        E = np.ones((len(Bl), len(blocks[j])), dtype=np.int64)
        for k in range(m):
            E = E * P[:, k, blocks[j][:, k]] % q
        rows.append(E)
        rhs.append(h[:, j] * cj % q)
        cj = cj * cl % q
    out: list[int] = []
    for j in range(s):
        out.extend(int(v) for v in _consensus(rows[j], rhs[j], q, rng, cfg.sc_tries))
    return tuple(out)


@dataclass
class LocalDecoder:
    """Randomized local decoder for one advice string (a, z)."""

    a: Point
    z: tuple[int, ...]
    cfg: LocalCfg
    table: SymbolTable = field(repr=False)
    rng: np.random.Generator = field(repr=False)
    queries: int = 0
    reads: int = 0
    last_queries: int = 0

    def __post_init__(self):
        self._lines: dict = {}
        self._values: dict = {}
        self._sc_cache: dict = {}
        self._line_rng = np.random.default_rng(0)

    def _line_poly(self, direction: tuple[int, ...]) -> np.ndarray | None:
        """Derivative table of the unique line codeword through a consistent with z."""
        if direction not in self._lines:
            params = self.cfg.params
            q = params.q
            d = np.asarray(direction, dtype=np.int64)
            polys = _decode_line(self.table.restricted_line(self.a, d), _line_params(params),
                                 self.cfg.alpha_prime, self.cfg.line_r, self._line_rng,
                                 not self.cfg.relaxed)
            target = restriction_matrix(d, self.cfg.s_star, q) @ np.asarray(self.z, dtype=np.int64) % q
            keep = [P for P in polys if (_derivs(P, 0, self.cfg.s_star, q) == target).all()]
            self._lines[direction] = (eval_order_many(keep[0].to_array(), range(q), params.s, q)
                                      if len(keep) == 1 else None)
        return self._lines[direction]

    def oracle(self, x: Sequence[int]) -> tuple[int, ...] | None:
        """Same value as oracle_eval(S, a, z, x), with line decodings shared across x."""
        q = self.cfg.params.q
        key = tuple(int(v) % q for v in x)
        self.reads += q
        if key not in self._values:
            self._values[key] = self._evaluate(np.asarray(key, dtype=np.int64))
        return self._values[key]

    def _evaluate(self, x: np.ndarray) -> tuple[int, ...] | None:
        q, s = self.cfg.params.q, self.cfg.params.s
        diff = (x - np.asarray(self.a)) % q
        if not diff.any():
            return None
        t0, direction = _canonical(diff, q)
        H = self._line_poly(tuple(int(v) for v in direction))
        if H is None:
            return None
        c = (-t0) % q
        want = np.array([int(H[t0, j]) * pow(c, j, q) % q for j in range(s)], dtype=np.int64)
        R = restriction_matrix((np.asarray(self.a) - x) % q, s, q)
        ys = [y for y in self.table.syms[self.table.index(x)] if ((R @ y) % q == want).all()]
        return tuple(int(v) for v in ys[0]) if len(ys) == 1 else None

    def __call__(self, x: Sequence[int], rng: np.random.Generator | None = None) -> tuple[int, ...]:
        counter = QueryCounter()
        out = self_correct(self.oracle, x, self.cfg, rng if rng is not None else self.rng,
                           counter, self._sc_cache)
        if counter.count > self.cfg.query_budget:
            raise RuntimeError("query budget exceeded")
        self.last_queries = counter.count
        self.queries += counter.count
        return out


def local_list_recover(S: ListWord, cfg: LocalCfg, rng: np.random.Generator,
                       counter: QueryCounter | None = None) -> list[LocalDecoder]:
    """One local decoder per advice string recovered at a random base point."""
    cfg.check_regime()
    params = cfg.params
    table = SymbolTable(S, params)
    a = tuple(int(v) for v in rng.integers(params.q, size=params.m))
    Z = recover_candidates(S, a, cfg.s_star, cfg, rng, counter, table)
    streams = rng.spawn(len(Z)) if Z else []
    return [LocalDecoder(a, z, cfg, table, g) for z, g in zip(Z, streams)]


__all__ = [
    "LocalCfg", "LocalDecoder", "QueryCounter", "SymbolTable", "local_list_recover",
    "oracle_eval", "recover_candidates", "self_correct", "unique_radius",
]
