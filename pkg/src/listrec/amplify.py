"""Concatenation with an expander fold, sampler checks, and brute-force inner decoding."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .codes import Codeword, FrsParams, ListWord, MultParams, as_fraction, code_stats, frs_encode_array, \
    mult_encode_array
from .errors import DimensionMismatch, TableTooLarge
from .poly import Poly

TABLE_GUARD = 2 ** 24


@dataclass(frozen=True)
class BipartiteGraph:
    """D-regular bipartite multigraph on N + N vertices.

    left[i, r] is the r-th right neighbor of left vertex i. The edge (i, r)
    is the slot[i, r]-th edge of its right endpoint, numbering each right
    vertex's edges in order of (r, i).
    """

    N: int
    D: int
    left: np.ndarray = field(repr=False)
    slot: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_left(cls, left) -> "BipartiteGraph":
        left = np.asarray(left, dtype=np.int64)
        N, D = left.shape
        if left.size and (left.min() < 0 or left.max() >= N):
            raise ValueError("neighbor index out of range")
        slot = np.zeros_like(left)
        seen = np.zeros(N, dtype=np.int64)
        for r in range(D):
            for i in range(N):
                j = left[i, r]
                slot[i, r] = seen[j]
                seen[j] += 1
        if (seen != D).any():
            raise ValueError("right degrees are not all equal to D")
        return cls(N, D, left, slot)

    def right_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(li, lr) with (li[j, l], lr[j, l]) the left end of the l-th edge at right vertex j."""
        li = np.zeros((self.N, self.D), dtype=np.int64)
        lr = np.zeros((self.N, self.D), dtype=np.int64)
        I, R = np.indices(self.left.shape)
        li[self.left, self.slot] = I
        lr[self.left, self.slot] = R
        return li, lr

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in self.left[i]]


def sample_expander(N: int, D: int, rng: np.random.Generator, complete: bool = False) -> BipartiteGraph:
    """Union of D independent uniform perfect matchings, or the complete multigraph (D = N)."""
    if not 1 <= D <= N:
        raise ValueError("need 1 <= D <= N")
    if complete:
        if D != N:
            raise ValueError("the complete multigraph needs D = N")
        left = np.tile(np.arange(N, dtype=np.int64), (N, 1))
    else:
        left = np.stack([rng.permutation(N) for _ in range(D)], axis=1)
    return BipartiteGraph.from_left(left)


def dump_graph(G: BipartiteGraph) -> str:
    lines = [f"{G.N} {G.D}"] + [" ".join(str(int(j)) for j in row) for row in G.left]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> BipartiteGraph:
    lines = text.strip().split("\n")
    N, D = (int(v) for v in lines[0].split())
    rows = [[int(v) for v in line.split()] for line in lines[1 : 1 + N]]
    if len(rows) != N or any(len(r) != D for r in rows):
        raise DimensionMismatch("graph body does not match its header")
    return BipartiteGraph.from_left(rows)


@dataclass(frozen=True)
class SamplerReport:
    max_bad_fraction: float
    threshold: float
    set_size: int
    trials: int
    xi: float

    @property
    def passed(self) -> bool:
        return self.max_bad_fraction <= self.xi


def check_sampler(G: BipartiteGraph, R, eps, xi, trials: int, rng: np.random.Generator) -> SamplerReport:
    """Worst fraction of left vertices with fewer than (R + 3 eps) D neighbors in a random Y."""
    R, eps, xi = float(as_fraction(R)), float(as_fraction(eps)), float(as_fraction(xi))
    size = min(G.N, math.ceil((R + 4 * eps) * G.N))
    thresh = (R + 3 * eps) * G.D
    worst = 0.0
    for _ in range(trials):
        inY = np.zeros(G.N, dtype=bool)
        inY[rng.choice(G.N, size=size, replace=False)] = True
        hits = inY[G.left].sum(axis=1)
        worst = max(worst, float((hits < thresh).mean()))
    return SamplerReport(worst, thresh, size, trials, xi)


def ael_transform(blocks, G: BipartiteGraph, direction: str = "fold") -> np.ndarray:
    """fold: c[left[i, r], slot[i, r]] = y[i, r]; unfold is the inverse permutation."""
    blocks = np.asarray(blocks)
    if blocks.shape[:2] != (G.N, G.D):
        raise DimensionMismatch(f"expected {G.N} blocks of length {G.D}, got {blocks.shape[:2]}")
    out = np.empty_like(blocks)
    if direction == "fold":
        out[G.left, G.slot] = blocks
    elif direction == "unfold":
        out[...] = blocks[G.left, G.slot]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


# inner codes -----------------------------------------------------------------

@dataclass(frozen=True)
class InnerCodeTable:
    """Every codeword of a small polynomial code; row k encodes the message with digits of k base q."""

    q: int
    k: int  # message length
    codewords: np.ndarray = field(repr=False)  # (M, n0, arity)

    @property
    def size(self) -> int:
        return len(self.codewords)

    @property
    def n0(self) -> int:
        return self.codewords.shape[1]

    @property
    def arity(self) -> int:
        return self.codewords.shape[2]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n0 * self.arity)

    def index(self, message: Sequence[int]) -> int:
        if len(message) != self.k:
            raise DimensionMismatch(f"message length {len(message)} != {self.k}")
        return sum(int(v) % self.q * self.q ** t for t, v in enumerate(message))

    def message(self, index: int) -> tuple[int, ...]:
        return tuple((int(index) // self.q ** t) % self.q for t in range(self.k))

    def encode(self, message: Sequence[int]) -> np.ndarray:
        return self.codewords[self.index(message)]

    def symbol_codes(self) -> np.ndarray:
        """(M, n0) integer codes of the symbols, computed once."""
        if "_codes" not in self.__dict__:
            object.__setattr__(self, "_codes", _symbol_codes(self.codewords, self.q))
        return self.__dict__["_codes"]

    def codeword(self, index: int) -> Codeword:
        return Codeword(self.q, tuple(tuple(int(v) for v in row) for row in self.codewords[index]))

    @classmethod
    def from_params(cls, params: FrsParams | MultParams) -> "InnerCodeTable":
        q, k = params.q, params.d + 1
        n0 = params.n
        arity = params.s if isinstance(params, FrsParams) else params.arity
        if q ** k * n0 > TABLE_GUARD:
            raise TableTooLarge(f"{q}^{k} codewords of length {n0} exceed the table guard")
        idx = np.arange(q ** k, dtype=np.int64)
        coeffs = np.stack([(idx // q ** t) % q for t in range(k)], axis=1)
        if isinstance(params, FrsParams):
            words = frs_encode_array(coeffs, params)
        else:
            if params.m != 1:
                raise ValueError("inner tables use univariate codes")
            words = mult_encode_array(coeffs, params)
        return cls(q, k, words.astype(np.int32))


def _symbol_codes(arr: np.ndarray, q: int) -> np.ndarray:
    """Integer code sum_k sym[k] q^k for the symbols along the last axis."""
    arr = np.asarray(arr, dtype=np.int64)
    w = q ** np.arange(arr.shape[-1], dtype=np.int64)
    return arr @ w


@njit(cache=True)
def _agree_kernel(codes, member):
    M, n0 = codes.shape
    out = np.zeros(M, dtype=np.int64)
    for k in range(M):
        acc = 0
        for pos in range(n0):
            acc += member[pos, codes[k, pos]]
        out[k] = acc
    return out


def agreement_counts(table: InnerCodeTable, lists: Sequence[Sequence[Sequence[int]]]) -> np.ndarray:
    """Number of positions where each table row lies in the given lists."""
    if len(lists) != table.n0:
        raise DimensionMismatch(f"{len(lists)} lists for a code of length {table.n0}")
    if table.size * table.n0 > TABLE_GUARD:
        raise TableTooLarge("table exceeds the brute-force guard")
    codes = table.symbol_codes()
    alphabet = table.q ** table.arity
    if alphabet <= TABLE_GUARD // table.n0:
        member = np.zeros((table.n0, alphabet), dtype=np.uint8)
        for pos, L in enumerate(lists):
            if len(L):
                member[pos, _symbol_codes(np.asarray(L, dtype=np.int64).reshape(len(L), -1), table.q)] = 1
        return _agree_kernel(codes, member)
    agree = np.zeros(table.size, dtype=np.int64)
    for pos, L in enumerate(lists):
        if len(L):
            wanted = _symbol_codes(np.asarray(L, dtype=np.int64).reshape(len(L), -1), table.q)
            agree += np.isin(codes[:, pos], wanted)
    return agree


def brute_force_indices(table: InnerCodeTable, S: ListWord, alpha) -> np.ndarray:
    n = table.n0
    need = n - int(as_fraction(alpha) * n)
    return np.flatnonzero(agreement_counts(table, S.lists) >= need)


def brute_force_list_recover(table: InnerCodeTable, S: ListWord, alpha) -> list[Codeword]:
    """Exactly the codewords at distance at most alpha from S."""
    return [table.codeword(i) for i in brute_force_indices(table, S, alpha)]


# the composed code -------------------------------------------------------------

@dataclass
class AelCode:
    """Outer FRS code, inner table code and a graph that folds the concatenation."""

    outer: FrsParams
    inner: InnerCodeTable
    graph: BipartiteGraph

    def __post_init__(self):
        if self.inner.k != self.outer.s or self.inner.q != self.outer.q or self.inner.arity != 1:
            raise DimensionMismatch("inner messages must be outer symbols over the same field")
        D = self.graph.D
        self.n0p = -(-self.inner.n0 // D) * D  # zero-padded inner length
        if self.outer.n * self.n0p != self.graph.N * D:
            raise DimensionMismatch(f"n1 * n0 = {self.outer.n * self.n0p} but N * D = {self.graph.N * D}")

    @property
    def rate(self) -> Fraction:
        """Message symbols over Sigma_0 divided by the output length in Sigma_0 symbols."""
        return Fraction(self.outer.d + 1, self.graph.N * self.graph.D)

    @property
    def product_rate(self) -> Fraction:
        return code_stats(self.outer).rate * self.inner.rate * Fraction(self.inner.n0, self.n0p)

    def concatenate(self, P: Poly) -> np.ndarray:
        """The concatenated codeword as N blocks of length D."""
        outer = frs_encode_array(P.to_array(self.outer.d + 1), self.outer)  # (n1, s1)
        idx = _symbol_codes(outer, self.outer.q)
        inner = self.inner.codewords[idx][:, :, 0].astype(np.int64)  # (n1, n0)
        padded = np.zeros((self.outer.n, self.n0p), dtype=np.int64)
        padded[:, : self.inner.n0] = inner
        return padded.reshape(self.graph.N, self.graph.D)

    def encode(self, P: Poly) -> np.ndarray:
        return ael_transform(self.concatenate(P), self.graph, "fold")

    def to_listword(self, blocks: np.ndarray) -> ListWord:
        return ListWord(self.outer.q, tuple((tuple(int(v) for v in row),) for row in blocks))


def ael_list_recover(S: ListWord, G: BipartiteGraph, inner: InnerCodeTable,
                     outer_decoder: Callable[[ListWord], list], inner_alpha, *,
                     code: AelCode | None = None, alpha=None) -> list:
    """Unfold the lists, brute-force every inner block, then run the outer decoder.

    With code and alpha given, candidates whose folded re-encoding is farther
    than alpha from S are dropped.
    """
    if S.n != G.N:
        raise DimensionMismatch(f"{S.n} lists for a graph with N={G.N}")
    if inner.size * inner.n0 > TABLE_GUARD:
        raise TableTooLarge("inner table exceeds the brute-force guard")
    N, D = G.N, G.D
    li, lr = G.right_edges()
    # T[i][r]: symbols the r-th entry of left block i can take
    T = [[set() for _ in range(D)] for _ in range(N)]
    for j, L in enumerate(S.lists):
        for beta in L:
            if len(beta) != D:
                raise DimensionMismatch(f"block symbol of length {len(beta)} != D={D}")
            for l, v in enumerate(beta):
                T[li[j, l]][lr[j, l]].add(int(v))
    flat = [sorted(T[i][r]) for i in range(N) for r in range(D)]
    n0 = inner.n0
    n0p = -(-n0 // D) * D
    n1 = N * D // n0p
    inner_lists = []
    for t in range(n1):
        lists = [[(v,) for v in flat[t * n0p + k]] for k in range(n0)]
        idx = brute_force_indices(inner, ListWord(inner.q, tuple(tuple(L) for L in lists)), inner_alpha)
        inner_lists.append(tuple(inner.message(i) for i in idx))
    found = outer_decoder(ListWord(inner.q, tuple(inner_lists)))
    if code is None or alpha is None:
        return list(found)
    budget = int(as_fraction(alpha) * N)
    keep = []
    for P in found:
        blocks = code.encode(P)
        miss = sum(tuple(int(v) for v in row) not in L for row, L in zip(blocks, S.lists))
        if miss <= budget:
            keep.append(P)
    return keep


__all__ = [
    "AelCode", "BipartiteGraph", "InnerCodeTable", "SamplerReport", "TABLE_GUARD",
    "ael_list_recover", "ael_transform", "agreement_counts", "brute_force_indices",
    "brute_force_list_recover", "check_sampler", "dump_graph", "load_graph", "sample_expander",
]
