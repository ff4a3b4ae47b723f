"""The interpolation step: operators whose low-degree solutions contain the list.

Derivative mode handles univariate multiplicity codes, fold mode handles
folded Reed-Solomon codes. The (X^q, d)-closed helpers live here as well.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import FrsParams, ListWord, MultParams, as_fraction
from .errors import NotClosed, UnderDetermined
from .gf import PrimeFieldCtx
from .linalg import echelon, first_null_vector, nullspace, rank, rref, solve
from .poly import Poly, binom_matrix, hasse_eval_tables, power_table

DERIVATIVE = "derivative"
FOLD = "fold"


@dataclass(frozen=True)
class LinOperator:
    mode: str
    r: int
    A: Poly
    B: tuple[Poly, ...]
    D: int
    d: int
    params: FrsParams | MultParams

    @property
    def ctx(self) -> PrimeFieldCtx:
        return self.params.ctx


@dataclass(frozen=True)
class AffinePolySpace:
    """v0 + span(basis); v0 is None when the defining system has no solution."""

    v0: Poly | None
    basis: tuple[Poly, ...]
    d: int
    operator: LinOperator | None = None

    @property
    def is_empty(self) -> bool:
        return self.v0 is None

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def params(self):
        return self.operator.params if self.operator is not None else None

    def contains(self, f: Poly) -> bool:
        if self.v0 is None or f.degree > self.d:
            return False
        q = f.ctx.q
        target = (f.to_array(self.d + 1) - self.v0.to_array(self.d + 1)) % q
        if not self.basis:
            return not target.any()
        Bm = np.array([b.to_array(self.d + 1) for b in self.basis]).T
        return solve(Bm, target, q) is not None


def interpolation_degree(s: int, r: int, alpha, n: int) -> int:
    """Largest D with D < (s-r+1) times the minimum agreement count n - floor(alpha n)."""
    agree = n - int(as_fraction(alpha) * n)
    return (s - r + 1) * agree - 1


def _check_counts(D: int, d: int, r: int, n: int, s: int, ell: int) -> None:
    unknowns = (D + 1) + r * max(D - d + 1, 0)
    constraints = n * (s - r + 1) * ell
    if unknowns <= constraints:
        raise UnderDetermined(
            f"{unknowns} unknowns do not exceed {constraints} constraints (r={r}, D={D}, d={d})"
        )


def _pairs(S: ListWord, arity: int) -> tuple[np.ndarray, np.ndarray]:
    idx, ys = [], []
    for i, L in enumerate(S.lists):
        for y in L:
            idx.append(i)
            ys.append(y)
    if not ys:
        return np.zeros(0, dtype=np.int64), np.zeros((0, arity), dtype=np.int64)
    return np.array(idx, dtype=np.int64), np.array(ys, dtype=np.int64)


def _split_solution(vec: np.ndarray, D: int, Dd: int, r: int, ctx) -> tuple[Poly, tuple[Poly, ...]]:
    A = Poly(ctx, [int(v) for v in vec[: D + 1]])
    B = []
    off = D + 1
    width = max(Dd + 1, 0)
    for _ in range(r):
        B.append(Poly(ctx, [int(v) for v in vec[off : off + width]]))
        off += width
    return A, tuple(B)


def find_operator_mult(S: ListWord, r: int, alpha, params: MultParams) -> LinOperator:
    """Nonzero (A, B_0..B_{r-1}) with A + sum_i B_i f^{(i)} vanishing to order s-r+1 on agreements.

    Constraint for each x, y in S(x), 0 <= lam <= s-r:
        A^{(lam)}(x) + sum_{i<r} sum_{j<=lam} C(i+j, i) y^{(i+j)} B_i^{(lam-j)}(x) = 0.
    """
    if params.m != 1:
        raise ValueError("find_operator_mult needs a univariate multiplicity code")
    q, s, d, n = params.q, params.s, params.d, params.n
    if not 1 <= r <= s:
        raise ValueError(f"need 1 <= r <= s, got r={r}")
    D = interpolation_degree(s, r, alpha, n)
    Dd = D - d
    _check_counts(D, d, r, n, s, S.ell)
    xi, Y = _pairs(S, params.arity)
    width = max(Dd + 1, 0)
    ncols = D + 1 + r * width
    lam_count = s - r + 1
    E = hasse_eval_tables(params.evalset, D, lam_count, q)
    Bin = binom_matrix(s, q)
    blocks = []
    for lam in range(lam_count):
        rows = np.zeros((len(xi), ncols), dtype=np.int64)
        rows[:, : D + 1] = E[lam][xi]
        for i in range(r):
            acc = np.zeros((len(xi), width), dtype=np.int64)
            for j in range(lam + 1):
                c = Bin[i + j, i]
                if c:
                    acc += (c * Y[:, i + j])[:, None] * E[lam - j][xi, :width] % q
            rows[:, D + 1 + i * width : D + 1 + (i + 1) * width] = acc % q
        blocks.append(rows)
    M = np.vstack(blocks) if len(xi) else np.zeros((0, ncols), dtype=np.int64)
    vec = first_null_vector(M, q)
    if vec is None:
        raise UnderDetermined("homogeneous system has only the trivial solution")
    A, B = _split_solution(vec, D, Dd, r, params.ctx)
    return LinOperator(DERIVATIVE, r, A, B, D, d, params)


def find_operator_frs(S: ListWord, r: int, alpha, params: FrsParams) -> LinOperator:
    """Nonzero (A, B_0..B_{r-1}) with A(X) + sum_i B_i(X) f(gamma^i X) vanishing on agreements.

    Constraint for each position a, y in S(a), 0 <= lam <= s-r:
        A(gamma^lam a) + sum_i B_i(gamma^lam a) y_{lam+i} = 0.
    """
    q, s, d, n = params.q, params.s, params.d, params.n
    if not 1 <= r <= s:
        raise ValueError(f"need 1 <= r <= s, got r={r}")
    D = interpolation_degree(s, r, alpha, n)
    Dd = D - d
    _check_counts(D, d, r, n, s, S.ell)
    xi, Y = _pairs(S, s)
    width = max(Dd + 1, 0)
    ncols = D + 1 + r * width
    pts = params.points()
    blocks = []
    for lam in range(s - r + 1):
        V = power_table(pts[:, lam], D, q)[xi]
        rows = np.zeros((len(xi), ncols), dtype=np.int64)
        rows[:, : D + 1] = V
        for i in range(r):
            rows[:, D + 1 + i * width : D + 1 + (i + 1) * width] = Y[:, lam + i][:, None] * V[:, :width] % q
        blocks.append(rows)
    M = np.vstack(blocks) if len(xi) else np.zeros((0, ncols), dtype=np.int64)
    vec = first_null_vector(M, q)
    if vec is None:
        raise UnderDetermined("homogeneous system has only the trivial solution")
    A, B = _split_solution(vec, D, Dd, r, params.ctx)
    return LinOperator(FOLD, r, A, B, D, d, params)


def operator_matrix(op: LinOperator, d: int) -> np.ndarray:
    """Matrix sending f's coefficients to those of sum_i B_i * (f^{(i)} or f(gamma^i X))."""
    q = op.ctx.q
    degB = max((b.degree for b in op.B), default=-1)
    nrows = max(op.D, d + max(degB, 0), op.A.degree) + 1
    M = np.zeros((nrows, d + 1), dtype=np.int64)
    if op.mode == DERIVATIVE:
        Bin = binom_matrix(max(d, op.r), q)
        for i, Bi in enumerate(op.B):
            b = Bi.to_array()
            if not len(b):
                continue
            for k in range(i, d + 1):
                c = Bin[k, i]
                if c:
                    M[k - i : k - i + len(b), k] += c * b
    else:
        g = op.ctx.gamma
        for i, Bi in enumerate(op.B):
            b = Bi.to_array()
            if not len(b):
                continue
            gi = pow(g, i, q)
            c = 1
            for k in range(d + 1):
                M[k : k + len(b), k] += c * b
                c = c * gi % q
    return M % q


def solution_space(op: LinOperator, d: int) -> AffinePolySpace:
    """{f : deg f <= d, A + sum_i B_i f^{(i)} = 0} (or the fold-mode identity) as v0 + V."""
    q = op.ctx.q
    M = operator_matrix(op, d)
    rhs = np.zeros(M.shape[0], dtype=np.int64)
    a = op.A.to_array()
    rhs[: len(a)] = (-a) % q
    sol = solve(M, rhs, q)
    if sol is None:
        return AffinePolySpace(None, (), d, op)
    x, N = sol
    ctx = op.ctx
    v0 = Poly(ctx, [int(v) for v in x])
    basis = tuple(Poly(ctx, [int(v) for v in row]) for row in N)
    return AffinePolySpace(v0, basis, d, op)


def _coeff_matrix(polys: Sequence[Poly], width: int) -> np.ndarray:
    if not polys:
        return np.zeros((0, width), dtype=np.int64)
    return np.array([p.to_array(width) for p in polys], dtype=np.int64)


def constraint_matrix(polys: Sequence[Poly], points: Sequence[int], mode: str, s: int) -> np.ndarray:
    """Rows: the s coordinate constraints per point; columns: one per polynomial."""
    ctx = polys[0].ctx
    q = ctx.q
    deg = max(max(p.degree for p in polys), 0)
    C = _coeff_matrix(polys, deg + 1)
    if mode == FOLD:
        g = ctx.gamma
        pts = [a * pow(g, j, q) % q for a in points for j in range(s)]
        V = power_table(pts, deg, q)
        return (V @ C.T) % q
    if mode == DERIVATIVE:
        E = hasse_eval_tables(list(points), deg, s, q)
        # E[i, a, k]: reorder rows as (point, order)
        rows = np.einsum("iak,pk->aip", E, C) % q
        return rows.reshape(len(points) * s, len(polys))
    raise ValueError(f"unknown mode {mode!r}")


def vanish_subspace(basis: Sequence[Poly], points: Sequence[int], mode: str, s: int) -> list[Poly]:
    """Basis of the elements of span(basis) vanishing at every point in the given mode.

    fold: P(gamma^j a) = 0 for j < s. derivative: P^{(<s)}(b) = 0.
    """
    basis = list(basis)
    if not basis:
        return []
    if not len(points):
        return basis
    ctx = basis[0].ctx
    q = ctx.q
    M = constraint_matrix(basis, points, mode, s)
    N = nullspace(M, q, ncols=len(basis))
    deg = max(max(p.degree for p in basis), 0)
    C = _coeff_matrix(basis, deg + 1)
    combos = (N @ C) % q
    return [Poly(ctx, [int(v) for v in row]) for row in combos]


def span_rank(polys: Sequence[Poly], width: int) -> int:
    if not polys:
        return 0
    return rank(_coeff_matrix(polys, width), polys[0].ctx.q)


def is_xq_closed(W: Sequence[Poly], d: int) -> bool:
    """True iff X^q f lies in span(W) for every basis element f with deg f <= d - q."""
    W = [f for f in W if not f.is_zero()]
    if not W:
        return True
    q = W[0].ctx.q
    width = d + 1
    base = span_rank(W, width)
    for f in W:
        if f.degree <= d - q:
            g = f.shift(q)
            if span_rank(W + [g], width) != base:
                return False
    return True


def degree_echelon(W: Sequence[Poly], d: int) -> list[Poly]:
    """Reduced basis with pairwise distinct degrees, monic, sorted by increasing degree."""
    W = [f for f in W if not f.is_zero()]
    if not W:
        return []
    ctx = W[0].ctx
    q = ctx.q
    C = _coeff_matrix(W, d + 1)[:, ::-1]  # highest degree first
    R, piv = rref(C, q)
    out = [Poly(ctx, [int(v) for v in R[i, ::-1]]) for i in range(len(piv))]
    return sorted(out, key=lambda f: f.degree)


def qdim_and_basis(W: Sequence[Poly], d: int) -> tuple[int, list[Poly]]:
    """qdim of a closed W and generators f_i with distinct degrees mod q.

    f_1 is the lowest-degree element; each later f_i is the lowest-degree
    element outside the span of {X^{cq} f_j : j < i}.
    """
    if not is_xq_closed(W, d):
        raise NotClosed("subspace is not (X^q, d)-closed")
    ech = degree_echelon(W, d)
    if not ech:
        return 0, []
    q = ech[0].ctx.q
    seen: set[int] = set()
    gens = []
    for f in ech:
        res = f.degree % q
        if res not in seen:
            seen.add(res)
            gens.append(f)
    return len(gens), gens


def qdim(W: Sequence[Poly], d: int) -> int:
    """|{deg f mod q : f in W nonzero}|, read off a degree-echelon basis."""
    ech = degree_echelon(W, d)
    if not ech:
        return 0
    q = ech[0].ctx.q
    return len({f.degree % q for f in ech})


def module_basis(gens: Sequence[Poly], d: int) -> list[Poly]:
    """{X^{cq} f_i : deg <= d}, which spans W when gens come from qdim_and_basis."""
    out = []
    for f in gens:
        q = f.ctx.q
        c = 0
        while f.degree + c * q <= d:
            out.append(f.shift(c * q))
            c += 1
    return out
