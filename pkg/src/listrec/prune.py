"""Randomized pruning of an affine candidate space, and the full list-recovery pipelines."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .codes import (FrsParams, ListWord, MultParams, as_fraction, frs_encode_array,
                    mult_encode_array)
from .errors import ClosureViolation, RegimeViolation, UnderDetermined
from .linalg import rref
from .poly import Poly
from .subspace import (AffinePolySpace, find_operator_frs, find_operator_mult, is_xq_closed,
                       qdim, solution_space)

CHUNK = 4096
FALLBACK_REPETITIONS = 200


@dataclass(frozen=True)
class PruneConfig:
    tau: int
    repetitions: int
    seed: int | None = None

    def __post_init__(self):
        if self.tau < 1 or self.repetitions < 1:
            raise ValueError("tau and repetitions must be at least 1")


@dataclass
class Recovery:
    """Pipeline output plus the intermediate objects the tests inspect."""

    candidates: list[Poly]
    space: AffinePolySpace
    alpha: Fraction
    r: int
    tau: int
    repetitions: int
    p0: float
    per_round: list[list[Poly]] = field(default_factory=list)


# symbol tables -------------------------------------------------------------

def _encoder(params) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(params, FrsParams):
        return lambda C: frs_encode_array(C, params)
    return lambda C: mult_encode_array(C, params)


class _SpaceSymbols:
    """Symbols of v0 and of each basis vector at every position, computed once."""

    def __init__(self, space: AffinePolySpace, params):
        self.space = space
        self.q = params.q
        d = space.d
        enc = _encoder(params)
        self.v0 = enc(space.v0.to_array(d + 1))  # (n, s)
        self.k = space.dim
        if self.k:
            B = np.array([b.to_array(d + 1) for b in space.basis], dtype=np.int64)
            self.B = enc(B)  # (k, n, s)
            self.Bc = B
        else:
            self.B = np.zeros((0,) + self.v0.shape, dtype=np.int64)
            self.Bc = np.zeros((0, d + 1), dtype=np.int64)
        self.v0c = space.v0.to_array(d + 1)


def _list_arrays(S: ListWord, s: int) -> list[np.ndarray]:
    return [np.array(L, dtype=np.int64).reshape(-1, s) for L in S.lists]


def _prune(S: ListWord, table: _SpaceSymbols, tau: int, rng: np.random.Generator,
           lists: list[np.ndarray] | None = None) -> list[Poly]:
    """One round: sample tau positions, keep every choice with exactly one solution."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    q, k = table.q, table.k
    n, s = table.v0.shape
    ctx = table.space.v0.ctx
    pos = rng.integers(n, size=tau)
    if lists is None:
        lists = _list_arrays(S, s)
    chosen = [lists[b] for b in pos]
    if any(len(L) == 0 for L in chosen):
        return []
    base = table.v0[pos].reshape(-1)  # (tau*s,)
    if k == 0:
        ok = all(any((y == table.v0[b]).all() for y in L) for b, L in zip(pos, chosen))
        return [table.space.v0] if ok else []
    M = table.B[:, pos, :].reshape(k, -1).T  # (tau*s, k)
    rows = M.shape[0]
    R, piv = rref(np.hstack([M, np.eye(rows, dtype=np.int64)]), q)
    if sum(1 for c in piv if c < k) < k:
        return []  # some nonzero element of V vanishes on every sampled coordinate
    T = R[:, k:]
    T_top, T_rest = T[:k], T[k:]
    out: dict[tuple, Poly] = {}
    choices = itertools.product(*[range(len(L)) for L in chosen])
    while True:
        batch = list(itertools.islice(choices, CHUNK))
        if not batch:
            break
        idx = np.array(batch, dtype=np.int64)  # (b, tau)
        Y = np.stack([chosen[j][idx[:, j]] for j in range(tau)], axis=1).reshape(len(batch), -1)
        rhs = (Y - base[None, :]) % q  # (b, tau*s)
        good = ~((T_rest @ rhs.T) % q).any(axis=0) if len(T_rest) else np.ones(len(batch), bool)
        if not good.any():
            continue
        c = (T_top @ rhs[good].T) % q  # (k, g)
        coeffs = (table.v0c[None, :] + c.T @ table.Bc) % q
        for row in coeffs:
            key = tuple(int(v) for v in row)
            if key not in out:
                out[key] = Poly(ctx, list(key))
    return sorted(out.values())


def prune_frs(S: ListWord, space: AffinePolySpace, tau: int, rng: np.random.Generator,
              params: FrsParams | None = None) -> list[Poly]:
    """Sample tau positions with replacement and keep uniquely determined space elements."""
    if space.is_empty:
        return []
    params = params or space.params
    return _prune(S, _SpaceSymbols(space, params), tau, rng)


def check_closed_space(space: AffinePolySpace, params: MultParams) -> int:
    """Return qdim(V) after checking the closure hypotheses multiplicity pruning needs."""
    V, d = list(space.basis), space.d
    if not is_xq_closed(V, d):
        raise ClosureViolation("V is not (X^q, d)-closed")
    t = qdim(V, d)
    if d > (params.s - t) * params.q:
        raise ClosureViolation(f"d={d} exceeds (s - qdim) q = {(params.s - t) * params.q}")
    return t


def prune_mult(S: ListWord, space: AffinePolySpace, tau: int, rng: np.random.Generator,
               params: MultParams | None = None) -> list[Poly]:
    """Multiplicity-code pruning; requires a closed V with d <= (s - qdim V) q."""
    if space.is_empty:
        return []
    params = params or space.params
    check_closed_space(space, params)
    return _prune(S, _SpaceSymbols(space, params), tau, rng)


# parameter helpers -----------------------------------------------------------

def default_tau_frs(eps, ell: int) -> int:
    eps = float(as_fraction(eps))
    return max(1, math.ceil((2 / eps) * math.log(4 * ell / eps)))


def default_tau_whole_field(s: int, r: int) -> int:
    return max(1, math.ceil(6 * s * math.log(2 * r * s)))


def p0_frs(alpha, tau: int, r: int, s: int, n: int, d: int) -> float:
    """Lower bound on the chance one pruning round outputs a fixed in-radius codeword."""
    a = float(as_fraction(alpha))
    if s <= r:
        return (1 - a) ** tau - r
    return (1 - a) ** tau - r * (d / ((s - r) * n)) ** tau


def p0_mult(alpha, tau: int, r: int, s: int) -> float:
    a = float(as_fraction(alpha))
    return (1 - a) ** tau - r * s * (1 - 1 / s) ** tau


def repetitions_for(p0: float, ell: int, tau: int, strict: bool = False,
                    fallback: int = FALLBACK_REPETITIONS) -> int:
    """ceil(ln(100 * Lest) / p0) with Lest = ell^tau / p0, the pruning list-size bound."""
    if p0 <= 0:
        if strict:
            raise RegimeViolation(f"pruning success bound p0={p0:.3g} is not positive")
        return fallback
    lest = ell ** tau / p0
    return max(1, math.ceil(math.log(100 * lest) / p0))


def smallest_feasible_order(n: int, s: int, d: int, ell: int, alpha) -> int | None:
    """Least r in [1, s] for which the interpolation system has more unknowns than constraints."""
    agree = n - int(as_fraction(alpha) * n)
    for r in range(1, s + 1):
        D = (s - r + 1) * agree - 1
        if (D + 1) + r * max(D - d + 1, 0) > n * (s - r + 1) * ell:
            return r
    return None


def within_radius(polys, S: ListWord, params, alpha) -> list[Poly]:
    """Keep polynomials whose encoding disagrees with S on at most floor(alpha n) positions."""
    polys = list(polys)
    if not polys:
        return []
    d = params.d
    C = np.array([P.to_array(d + 1) for P in polys if P.degree <= d], dtype=np.int64)
    keep = [P for P in polys if P.degree <= d]
    if not keep:
        return []
    syms = _encoder(params)(C)  # (k, n, s)
    budget = int(as_fraction(alpha) * S.n)
    out = []
    for P, sym in zip(keep, syms):
        miss = 0
        for row, L in zip(sym, S.lists):
            if tuple(int(v) for v in row) not in L:
                miss += 1
                if miss > budget:
                    break
        if miss <= budget:
            out.append(P)
    return out


def prune_rounds(S: ListWord, space: AffinePolySpace, params, tau: int, reps: int,
                 rng: np.random.Generator, check=None) -> tuple[list[Poly], list[list[Poly]]]:
    """Union of reps independent pruning rounds, plus the per-round outputs."""
    if space.is_empty:
        return [], [[] for _ in range(reps)]
    if check is not None:
        check()
    table = _SpaceSymbols(space, params)
    lists = _list_arrays(S, table.v0.shape[1])
    found: dict[Poly, None] = {}
    per_round = []
    for child in rng.spawn(reps):
        got = _prune(S, table, tau, child, lists)
        per_round.append(got)
        for P in got:
            found.setdefault(P, None)
    return list(found), per_round


def frs_pipeline(S: ListWord, params: FrsParams, eps=None, ell: int | None = None,
                 rng: np.random.Generator | None = None, *, alpha=None, r: int | None = None,
                 tau: int | None = None, repetitions: int | None = None,
                 strict: bool = False) -> Recovery:
    """Interpolate once, prune for several independent rounds, filter by distance."""
    s, n, d = params.s, params.n, params.d
    ell = ell if ell is not None else max(S.ell, 1)
    rate = Fraction(d, s * n)
    if alpha is None:
        if eps is None:
            raise ValueError("give eps or alpha")
        alpha = 1 - rate - as_fraction(eps)
    alpha = as_fraction(alpha)
    if eps is None:
        eps = 1 - rate - alpha
    eps = as_fraction(eps)
    if alpha < 0:
        raise ValueError(f"radius {alpha} is negative")
    if strict and (eps <= 0 or s < 16 * ell / eps ** 2):
        raise RegimeViolation(f"s={s} is below 16 ell / eps^2")
    if r is None:
        r = min(s, math.ceil(4 * ell / eps)) if eps > 0 else s
    if tau is None:
        tau = default_tau_frs(eps, ell) if eps > 0 else 1
    p0 = p0_frs(alpha, tau, r, s, n, d)
    if repetitions is None:
        repetitions = repetitions_for(p0, ell, tau, strict)
    rng = rng if rng is not None else np.random.default_rng()
    op = find_operator_frs(S, r, alpha, params)
    space = solution_space(op, d)
    found, rounds = prune_rounds(S, space, params, tau, repetitions, rng, None)
    return Recovery(within_radius(found, S, params, alpha), space, alpha, r, tau, repetitions, p0, rounds)


def list_recover_frs(S: ListWord, params: FrsParams, eps=None, ell: int | None = None,
                     rng: np.random.Generator | None = None, **kw) -> list[Poly]:
    return frs_pipeline(S, params, eps, ell, rng, **kw).candidates


def default_alpha_whole_field(q: int, s: int) -> Fraction:
    """Largest k/q strictly below 1/(2s)."""
    k = (q - 1) // (2 * s) if q % (2 * s) else q // (2 * s) - 1
    return Fraction(max(k, 0), q)


def mult_pipeline(S: ListWord, params: MultParams, delta_or_eps=None, ell: int | None = None,
                  rng: np.random.Generator | None = None, mode: str = "whole-field", *,
                  alpha=None, r: int | None = None, tau: int | None = None,
                  repetitions: int | None = None, strict: bool = False) -> Recovery:
    if params.m != 1:
        raise ValueError("univariate multiplicity codes only")
    q, s, n, d = params.q, params.s, params.n, params.d
    ell = ell if ell is not None else max(S.ell, 1)
    if mode == "small-d":
        rate = Fraction(d, s * n)
        if alpha is None:
            if delta_or_eps is None:
                raise ValueError("give eps or alpha")
            alpha = 1 - rate - as_fraction(delta_or_eps)
        alpha = as_fraction(alpha)
        eps = as_fraction(delta_or_eps) if delta_or_eps is not None else 1 - rate - alpha
        if strict:
            char = params.ctx.q
            if d >= char or n * s >= char or eps <= 0 or 16 * ell > eps ** 2 * s:
                raise RegimeViolation("small-d regime needs d < char, n < char/s, 16 ell/eps^2 <= s")
        if r is None:
            r = min(s, math.ceil(4 * ell / eps)) if eps > 0 else s
        if tau is None:
            tau = default_tau_frs(eps, ell) if eps > 0 else 1
        p0 = p0_frs(alpha, tau, r, s, n, d)
    elif mode == "whole-field":
        alpha = as_fraction(alpha) if alpha is not None else default_alpha_whole_field(q, s)
        delta = as_fraction(delta_or_eps) if delta_or_eps is not None else 1 - Fraction(d, s * q)
        if strict:
            if not params.whole_field():
                raise RegimeViolation("whole-field mode needs the full evaluation set")
            if not (s < q and d < (1 - delta) * s * q and ell < delta ** 2 * s / 16
                    and alpha < Fraction(1, 2 * s)):
                raise RegimeViolation("parameters outside the whole-field regime")
        if r is None:
            r = min(s, math.ceil(4 * ell / delta)) if delta > 0 else s
        if tau is None:
            tau = default_tau_whole_field(s, r)
        p0 = p0_mult(alpha, tau, r, s)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if repetitions is None:
        repetitions = repetitions_for(p0, ell, tau, strict)
    rng = rng if rng is not None else np.random.default_rng()
    op = find_operator_mult(S, r, alpha, params)
    space = solution_space(op, d)

    def check():
        t = check_closed_space(space, params)
        if strict and mode == "whole-field" and (t > r or d > (s - r) * q):
            raise RegimeViolation(f"qdim {t} or degree {d} outside the pruning regime for r={r}")

    found, rounds = prune_rounds(S, space, params, tau, repetitions, rng, check)
    return Recovery(within_radius(found, S, params, alpha), space, alpha, r, tau, repetitions, p0, rounds)


def list_recover_mult(S: ListWord, params: MultParams, delta_or_eps=None, ell: int | None = None,
                      rng: np.random.Generator | None = None, mode: str = "whole-field",
                      **kw) -> list[Poly]:
    return mult_pipeline(S, params, delta_or_eps, ell, rng, mode, **kw).candidates


__all__ = [
    "PruneConfig", "Recovery", "prune_frs", "prune_mult", "list_recover_frs", "list_recover_mult",
    "frs_pipeline", "mult_pipeline", "default_tau_frs", "default_tau_whole_field", "p0_frs",
    "p0_mult", "repetitions_for", "smallest_feasible_order", "within_radius",
    "default_alpha_whole_field", "check_closed_space", "prune_rounds", "UnderDetermined",
]
