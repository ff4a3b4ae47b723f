"""Sudan list recovery for Reed-Solomon codes and Reed-Muller list recovery on a grid.

Vector-valued lists over F_q are handled by viewing F_q^t as GF(q^t); the
interpolation step is solved over F_q by writing each unknown of the big
field in coordinates, which is valid because every evaluation point lies
in F_q.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codes import as_fraction
from .errors import AgreementTooLow, RegimeViolation
from .gf import ExtFieldCtx, FieldCtx, PrimeFieldCtx, build_extension, prime_field
from .linalg import first_null_vector
from .poly import MultiPoly, Poly, binom_mod, graded_lex, poly_gcd, poly_powmod

EXHAUSTIVE_LIMIT = 1 << 16


# small helpers over a prime or extension field --------------------------------

def _t(ctx: FieldCtx) -> int:
    return ctx.t if isinstance(ctx, ExtFieldCtx) else 1


def coords(ctx: FieldCtx, a) -> tuple[int, ...]:
    return tuple(a) if isinstance(ctx, ExtFieldCtx) else (int(a),)


def from_coords(ctx: FieldCtx, v: Sequence[int]):
    return tuple(int(c) for c in v) if isinstance(ctx, ExtFieldCtx) else int(v[0])


def _scale(ctx: FieldCtx, c: int, a):
    """Product of a base-field integer and a field element."""
    if isinstance(ctx, ExtFieldCtx):
        return ctx.scale(c % ctx.q, a)
    return c * a % ctx.q


def _mul_matrix(ctx: FieldCtx, a) -> np.ndarray:
    if isinstance(ctx, ExtFieldCtx):
        return ctx.mul_matrix(a)
    return np.array([[int(a)]], dtype=np.int64)


def _eval_base(ctx: FieldCtx, coeffs: Sequence, x: int):
    """Evaluate sum_k coeffs[k] x^k at a base-field point x."""
    q = ctx.q
    acc = ctx.zero
    xp = 1
    for c in coeffs:
        acc = ctx.add(acc, _scale(ctx, xp, c))
        xp = xp * x % q
    return acc


def _eval_terms(ctx: FieldCtx, terms: Mapping, point: Sequence[int]):
    q = ctx.q
    acc = ctx.zero
    for e, c in terms.items():
        w = 1
        for x, k in zip(point, e):
            w = w * pow(int(x), k, q) % q
        acc = ctx.add(acc, _scale(ctx, w, c))
    return acc


def min_agreement(n_positions: int, alpha) -> int:
    """Smallest agreement count with distance at most alpha."""
    return n_positions - int(as_fraction(alpha) * n_positions)


def sqrt_threshold(n_positions: int, c: int, K: int) -> int:
    """Smallest A with A / n >= c / sqrt(K), i.e. A^2 K >= c^2 n^2."""
    target = c * c * n_positions * n_positions
    A = math.isqrt(target // K) if K else 0
    while A * A * K < target:
        A += 1
    while A > 0 and (A - 1) * (A - 1) * K >= target:
        A -= 1
    return A


# univariate root finding ----------------------------------------------------

def _ext_index_tables(ctx: ExtFieldCtx):
    tabs = ctx._tables.get("vec")
    if tabs is None:
        exp, log = ctx._log_tables()
        digits = np.array([ctx.from_index(i) for i in range(ctx.order)], dtype=np.int64)
        qpow = ctx.q ** np.arange(ctx.t, dtype=np.int64)
        tabs = (exp, log, digits, qpow)
        ctx._tables["vec"] = tabs
    return tabs


def _roots_exhaustive(ctx: FieldCtx, coeffs: Sequence) -> list:
    if isinstance(ctx, PrimeFieldCtx):
        q = ctx.q
        xs = np.arange(q, dtype=np.int64)
        acc = np.zeros(q, dtype=np.int64)
        for c in reversed(coeffs):
            acc = (acc * xs + int(c)) % q
        return [int(x) for x in np.nonzero(acc == 0)[0]]
    exp, log, digits, qpow = _ext_index_tables(ctx)
    q, order = ctx.q, ctx.order
    xs = np.arange(order, dtype=np.int64)
    acc = np.zeros(order, dtype=np.int64)
    for c in reversed(coeffs):
        nz = (acc != 0) & (xs != 0)
        prod = np.zeros(order, dtype=np.int64)
        prod[nz] = exp[(log[acc[nz]] + log[xs[nz]]) % (order - 1)]
        acc = ((digits[prod] + np.array(c, dtype=np.int64)) % q) @ qpow
    return [ctx.from_index(int(i)) for i in np.nonzero(acc == 0)[0]]


def _split_linear(f: Poly, rng: np.random.Generator) -> list:
    """Roots of a squarefree product of distinct linear factors (Cantor-Zassenhaus)."""
    ctx = f.ctx
    if f.degree <= 0:
        return []
    if f.degree == 1:
        c0, c1 = f.coeffs
        return [ctx.neg(ctx.div(c0, c1))]
    order = ctx.order
    one = Poly(ctx, [ctx.one])
    while True:
        delta = ctx.random(rng)
        lin = Poly(ctx, [delta, ctx.one])
        if ctx.char == 2:
            k = order.bit_length() - 1
            acc, cur = Poly(ctx), lin % f
            for _ in range(k):
                acc = acc + cur
                cur = (cur * cur) % f
            g = poly_gcd(f, acc)
        else:
            g = poly_gcd(f, poly_powmod(lin, (order - 1) // 2, f) - one)
        if 0 < g.degree < f.degree:
            return _split_linear(g, rng) + _split_linear(f // g, rng)


def field_roots(ctx: FieldCtx, coeffs: Sequence) -> list:
    """All roots in the field of sum_k coeffs[k] X^k (nonzero polynomial), sorted."""
    f = Poly(ctx, coeffs)
    if f.is_zero():
        raise ValueError("the zero polynomial has every element as a root")
    if f.degree == 0:
        return []
    if ctx.order <= EXHAUSTIVE_LIMIT:
        return sorted(_roots_exhaustive(ctx, f.coeffs))
    X = Poly(ctx, [ctx.zero, ctx.one])
    g = poly_gcd(f, poly_powmod(X, ctx.order, f) - X)
    return sorted(_split_linear(g, np.random.default_rng(0)))


# bivariate interpolation and Y-roots ----------------------------------------

def _x_order(ctx, polys: list[list]) -> int:
    best = None
    for P in polys:
        for k, c in enumerate(P):
            if c != ctx.zero:
                best = k if best is None else min(best, k)
                break
    return 0 if best is None else best


def _substitute(ctx, Q: list[list], a) -> list[list]:
    """Q(X, a + X Y) divided by the largest power of X dividing it."""
    J = len(Q) - 1
    p = ctx.char
    apow = [ctx.one]
    for _ in range(J):
        apow.append(ctx.mul(apow[-1], a))
    out = []
    for k in range(J + 1):
        width = max(len(Q[j]) for j in range(k, J + 1)) if k <= J else 0
        acc = [ctx.zero] * width
        for j in range(k, J + 1):
            c = binom_mod(j, k, p)
            if not c:
                continue
            w = _scale(ctx, c, apow[j - k])
            if w == ctx.zero:
                continue
            for i, v in enumerate(Q[j]):
                if v != ctx.zero:
                    acc[i] = ctx.add(acc[i], ctx.mul(w, v))
        out.append([ctx.zero] * k + acc)
    e = _x_order(ctx, out)
    out = [P[e:] for P in out]
    while out and all(v == ctx.zero for v in out[-1]):
        out.pop()
    return out


def roth_ruckenstein(ctx: FieldCtx, Q: list[list], deg: int) -> list[tuple]:
    """Coefficient tuples (length deg+1) of all f with deg f <= deg and Q(X, f(X)) = 0.

    Q is given as Q[j] = coefficient list (in X) of Y^j. Extra candidates may
    appear; callers re-check them.
    """
    e = _x_order(ctx, Q)
    Q = [P[e:] for P in Q]
    found: set[tuple] = set()

    def walk(Qc: list[list], prefix: list):
        if len(prefix) == deg + 1:
            found.add(tuple(prefix))
            return
        if not Qc:
            found.add(tuple(prefix + [ctx.zero] * (deg + 1 - len(prefix))))
            return
        low = [P[0] if P else ctx.zero for P in Qc]
        if all(v == ctx.zero for v in low[1:]):
            return
        for a in field_roots(ctx, low):
            walk(_substitute(ctx, Qc, a), prefix + [a])

    walk(Q, [])
    return sorted(found)


def _interpolate(ctx: FieldCtx, pairs: list[tuple[int, object]], deg: int, A: int) -> list[list] | None:
    """Nonzero Q = sum_j Q_j(X) Y^j with deg Q_j <= A-1-j*deg vanishing on all pairs."""
    t = _t(ctx)
    q = ctx.q
    J = (A - 1) // deg
    widths = [A - j * deg for j in range(J + 1)]
    ncols = t * sum(widths)
    rows = np.zeros((t * len(pairs), ncols), dtype=np.int64)
    for r, (x, y) in enumerate(pairs):
        xp = np.ones(A, dtype=np.int64)
        for k in range(1, A):
            xp[k] = xp[k - 1] * x % q
        yj = ctx.one
        col = 0
        for j in range(J + 1):
            Mj = _mul_matrix(ctx, yj)
            blk = np.einsum("a,rc->rac", xp[: widths[j]], Mj).reshape(t, -1) % q
            rows[r * t : (r + 1) * t, col : col + blk.shape[1]] = blk
            col += blk.shape[1]
            yj = ctx.mul(yj, y)
    vec = first_null_vector(rows, q)
    if vec is None or not vec.any():
        return None
    Q = []
    col = 0
    for j in range(J + 1):
        Q.append([from_coords(ctx, vec[col + t * a : col + t * (a + 1)]) for a in range(widths[j])])
        col += t * widths[j]
    return Q


def _sudan(ctx: FieldCtx, points: Sequence[tuple[int, Iterable]], deg: int, A: int,
           check: str | None) -> list[tuple]:
    """Coefficient tuples of all degree-<=deg f with f(x) in the list at >= A positions.

    check: "sqrt" enforces A >= 2 sqrt(n deg); "solvable" only requires a nonzero
    interpolant; None returns [] when there is none.
    """
    pts = [(int(x), tuple(L)) for x, L in points]
    if A < 1:
        raise AgreementTooLow("agreement target must be at least one position")
    n = sum(len(L) for _, L in pts)
    if check == "sqrt" and A * A < 4 * n * max(deg, 1):
        raise AgreementTooLow(f"agreement {A} below 2 sqrt({n} * {deg})")
    if deg == 0:
        counts: dict = {}
        for _, L in pts:
            for y in set(L):
                counts[y] = counts.get(y, 0) + 1
        return sorted((y,) for y, c in counts.items() if c >= A)
    pairs = [(x, y) for x, L in pts for y in L]
    if not pairs:
        return []
    Q = _interpolate(ctx, pairs, deg, A)
    if Q is None:
        if check is not None:
            raise AgreementTooLow("interpolation has only the trivial solution")
        return []
    out = []
    for f in roth_ruckenstein(ctx, Q, deg):
        agree = sum(1 for x, L in pts if _eval_base(ctx, f, x) in L)
        if agree >= A:
            out.append(f)
    return sorted(out)


def sudan_list_recover(points: Sequence[tuple[int, Iterable]], stilde: int, alpha,
                       ctx: FieldCtx | None = None, strict: bool = True) -> list[Poly]:
    """All polynomials of degree <= stilde whose value lies in the list at all but an alpha fraction.

    points: (x, list of y) with distinct base-field x. ctx defaults to the prime
    field inferred from the caller; pass it explicitly for extension fields.
    """
    if ctx is None:
        raise ValueError("ctx is required")
    A = min_agreement(len(points), alpha)
    return [Poly(ctx, f) for f in _sudan(ctx, points, stilde, A, "sqrt" if strict else None)]


# Reed-Muller on a grid --------------------------------------------------------

@dataclass(frozen=True)
class GridInstance:
    """Lists on U^m. field is the base prime field; values are t-vectors over it."""

    field: PrimeFieldCtx
    U: tuple[int, ...]
    m: int
    stilde: int
    lists: Mapping[tuple[int, ...], Sequence]
    ell: int
    alpha: Fraction
    K_param: int
    t: int = 1
    strict: bool = True

    def check_regime(self) -> None:
        K, m = self.K_param, self.m
        if len(self.U) < 2 * self.ell * self.stilde * K:
            raise RegimeViolation(f"|U|={len(self.U)} below 2 ell s K = {2 * self.ell * self.stilde * K}")
        if K < m * m:
            raise RegimeViolation(f"K={K} below m^2={m * m}")
        a = as_fraction(self.alpha)
        if a > 1 or (1 - a) ** 2 * K < m * m:
            raise RegimeViolation(f"alpha={a} exceeds 1 - m/sqrt(K)")


def _monomials(nvars: int, deg: int) -> tuple[tuple[int, ...], ...]:
    if nvars == 0:
        return ((),)
    return graded_lex(nvars, deg + 1)


def _rm_scalar(ctx: FieldCtx, U: Sequence[int], m: int, deg: int, lists: Mapping,
               A: int, K: int, strict: bool) -> list[dict]:
    """Polynomials over ctx (as exponent -> coefficient dicts) agreeing with >= A lists."""
    check = "solvable" if strict else None
    if m == 1:
        pts = [(u, lists.get((u,), ())) for u in U]
        return [{(k,): c for k, c in enumerate(f) if c != ctx.zero} for f in _sudan(ctx, pts, deg, A, check)]
    sub_points = list(itertools.product(U, repeat=m - 1))
    A_slice = sqrt_threshold(len(sub_points), m - 1, K)
    mons = _monomials(m - 1, deg)
    T = len(mons)
    t = _t(ctx)
    big = build_extension(ctx.q, t * T)
    g_lists = []
    for u in U:
        sl = {y: lists.get(y + (u,), ()) for y in sub_points}
        found = _rm_scalar(ctx, U, m - 1, deg, sl, max(A_slice, 1), K, strict)
        vecs = []
        for P in found:
            cs = []
            for e in mons:
                cs.extend(coords(ctx, P.get(e, ctx.zero)))
            vecs.append(from_coords(big, cs))
        g_lists.append((u, tuple(sorted(set(vecs)))))
    A_comb = max(sqrt_threshold(len(U), 1, K), 1)
    combined = _sudan(big, g_lists, deg, A_comb, check)
    out: dict[tuple, dict] = {}
    for f in combined:
        terms: dict = {}
        ok = True
        for k, c in enumerate(f):
            cs = coords(big, c)
            for i, e in enumerate(mons):
                a = from_coords(ctx, cs[i * t : (i + 1) * t])
                if a != ctx.zero:
                    if sum(e) + k > deg:
                        ok = False
                        break
                    terms[e + (k,)] = a
            if not ok:
                break
        if not ok:
            continue
        agree = sum(1 for pt in itertools.product(U, repeat=m) if _eval_terms(ctx, terms, pt) in lists.get(pt, ()))
        if agree >= A:
            out[tuple(sorted(terms.items()))] = terms
    return [out[k] for k in sorted(out)]


def rm_list_recover(ctx: FieldCtx, U: Sequence[int], m: int, stilde: int, lists: Mapping,
                    alpha, K: int, strict: bool = True) -> list[MultiPoly]:
    """Scalar version over ctx (prime or extension) with base-field grid U."""
    A = min_agreement(len(U) ** m, alpha)
    return [MultiPoly(ctx, m, terms) for terms in _rm_scalar(ctx, U, m, stilde, lists, A, K, strict)]


def vector_rm_list_recover(inst: GridInstance) -> list[tuple[MultiPoly, ...]]:
    """All t-tuples of degree-<=stilde m-variate polynomials within radius alpha of the lists."""
    if inst.strict:
        inst.check_regime()
    F, t = inst.field, inst.t
    ctx = F if t == 1 else build_extension(F.q, t)
    lists = {}
    for pt, L in inst.lists.items():
        vals = []
        for v in L:
            v = (v,) if isinstance(v, (int, np.integer)) else tuple(v)
            if len(v) != t:
                raise ValueError(f"value {v} does not have {t} coordinates")
            vals.append(from_coords(ctx, v))
        lists[tuple(int(c) for c in pt)] = tuple(vals)
    A = min_agreement(len(inst.U) ** inst.m, inst.alpha)
    found = _rm_scalar(ctx, tuple(inst.U), inst.m, inst.stilde, lists, A, inst.K_param, inst.strict)
    out = []
    for terms in found:
        comps = [dict() for _ in range(t)]
        for e, c in terms.items():
            for i, v in enumerate(coords(ctx, c)):
                if v:
                    comps[i][e] = v
        out.append(tuple(MultiPoly(F, inst.m, d) for d in comps))
    return out


def grid_agreement(polys: Sequence[MultiPoly], U: Sequence[int], m: int, lists: Mapping) -> int:
    """Number of grid points whose list contains the value tuple of polys."""
    count = 0
    for pt in itertools.product(U, repeat=m):
        val = tuple(int(P(pt)) for P in polys)
        L = {(v,) if isinstance(v, (int, np.integer)) else tuple(v) for v in lists.get(pt, ())}
        count += val in L
    return count


__all__ = [
    "GridInstance", "sudan_list_recover", "vector_rm_list_recover", "rm_list_recover",
    "field_roots", "roth_ruckenstein", "min_agreement", "sqrt_threshold", "grid_agreement",
    "prime_field",
]
