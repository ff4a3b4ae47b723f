import itertools
from fractions import Fraction

import numpy as np
import pytest

from listrec.acceptance import AEL_SAMPLER, ael_fixture, ael_once
from listrec.amplify import (AelCode, BipartiteGraph, InnerCodeTable, ael_transform, brute_force_indices,
                             brute_force_list_recover, check_sampler, dump_graph, load_graph, sample_expander)
from listrec.codes import ListWord, frs_encode, frs_params, random_poly
from listrec.errors import DimensionMismatch, TableTooLarge
from listrec.gf import prime_field
from listrec.poly import Poly
from listrec.prune import list_recover_frs, smallest_feasible_order

F5 = prime_field(5)


def test_degrees_over_seeds():
    for seed in range(10):
        G = sample_expander(64, 8, np.random.default_rng(seed))
        assert G.left.shape == (64, 8)
        assert (np.bincount(G.left.ravel(), minlength=64) == 8).all()
        li, lr = G.right_edges()
        assert (G.left[li, lr] == np.arange(64)[:, None]).all()


def test_single_matching_is_permutation():
    G = sample_expander(32, 1, np.random.default_rng(0))
    assert sorted(G.left[:, 0].tolist()) == list(range(32))


def test_complete_multigraph_and_sampler():
    G = sample_expander(16, 16, np.random.default_rng(0), complete=True)
    assert all(set(G.neighbors(i)) == set(range(16)) for i in range(16))
    rep = check_sampler(G, Fraction(1, 2), Fraction(1, 20), Fraction(1, 10), 50, np.random.default_rng(1))
    assert rep.max_bad_fraction == 0 and rep.passed


def test_matching_is_a_bad_sampler():
    R, eps = Fraction(1, 2), Fraction(1, 20)
    G = sample_expander(100, 1, np.random.default_rng(0))
    rep = check_sampler(G, R, eps, Fraction(1, 10), 20, np.random.default_rng(1))
    # D = 1: a vertex is bad exactly when its one neighbor misses Y
    assert rep.max_bad_fraction == pytest.approx(1 - rep.set_size / 100)
    assert rep.max_bad_fraction == pytest.approx(float(1 - (R + 4 * eps)))
    assert not rep.passed


def _sampler_passes(R, eps, xi):
    return sum(check_sampler(sample_expander(256, 64, np.random.default_rng(s)), R, eps, xi, 200,
                             np.random.default_rng(100 + s)).passed for s in range(10))


@pytest.mark.xfail(strict=True, reason="(0.5, 0.05, 0.1) measures a 0.21-0.23 bad fraction at N=256, D=64")
def test_sampler_stated_point():
    assert _sampler_passes(Fraction(1, 2), Fraction(1, 20), Fraction(1, 10)) >= 9


def test_sampler_certification_point():
    assert _sampler_passes(*AEL_SAMPLER) >= 9


def test_graph_roundtrip_and_determinism():
    G1 = sample_expander(32, 4, np.random.default_rng(5))
    G2 = sample_expander(32, 4, np.random.default_rng(5))
    assert dump_graph(G1) == dump_graph(G2)
    G3 = load_graph(dump_graph(G1))
    assert (G3.left == G1.left).all() and (G3.slot == G1.slot).all()
    with pytest.raises(DimensionMismatch):
        load_graph("4 2\n0 1\n")
    with pytest.raises(ValueError):
        BipartiteGraph.from_left([[0, 0], [0, 0]])


def test_identity_multigraph_fold_is_identity():
    G = BipartiteGraph.from_left(np.tile(np.arange(8)[:, None], (1, 3)))
    x = np.random.default_rng(0).integers(7, size=(8, 3))
    assert (ael_transform(x, G, "fold") == x).all()


def test_fold_unfold_bijection():
    rng = np.random.default_rng(11)
    for _ in range(100):
        G = sample_expander(32, 4, rng)
        x = rng.integers(1000, size=(32, 4))
        y = ael_transform(x, G, "fold")
        assert (ael_transform(y, G, "unfold") == x).all()
        assert sorted(y.ravel()) == sorted(x.ravel())
    with pytest.raises(DimensionMismatch):
        ael_transform(np.zeros((3, 3)), G)


def test_fold_rule():
    rng = np.random.default_rng(2)
    G = sample_expander(16, 4, rng)
    x = rng.integers(100, size=(16, 4))
    y = ael_transform(x, G)
    for i, r in itertools.product(range(16), range(4)):
        assert y[G.left[i, r], G.slot[i, r]] == x[i, r]


def test_inner_brute_force_repetition_code():
    table = InnerCodeTable(2, 1, np.array([[[0], [0]], [[1], [1]]], dtype=np.int32))
    S = ListWord(2, (((0,),), ((0,), (1,))))
    assert [c.symbols for c in brute_force_list_recover(table, S, 0)] == [((0,), (0,))]
    assert len(brute_force_list_recover(table, S, 1)) == 2


def test_inner_table_layout():
    params = frs_params(F5, 2, 2, 1)
    table = InnerCodeTable.from_params(params)
    assert table.size == 25 and table.rate == Fraction(1, 2)
    for k in range(25):
        P = Poly(F5, list(table.message(k)))
        assert table.codeword(k) == frs_encode(P, params)
        assert table.index(table.message(k)) == k
    S = ListWord.from_codeword(table.codeword(7))
    assert brute_force_indices(table, S, 0).tolist() == [7]
    assert len(brute_force_list_recover(table, S, 1)) == 25


def test_brute_force_matches_frs_pipeline_exhaustively():
    params = frs_params(F5, 2, 2, 1)
    table = InnerCodeTable.from_params(params)
    r = smallest_feasible_order(2, 2, 1, 1, 0)
    for k in range(table.size):
        P = Poly(F5, list(table.message(k)))
        S = ListWord.from_codeword(frs_encode(P, params))
        got = list_recover_frs(S, params, alpha=0, ell=1, rng=np.random.default_rng(k), r=r, tau=2)
        want = [Poly(F5, list(table.message(i))) for i in brute_force_indices(table, S, 0)]
        assert sorted(got) == sorted(want)


def test_table_guard():
    with pytest.raises(TableTooLarge):
        InnerCodeTable.from_params(frs_params(prime_field(257), 4, 64, 3))


def test_composed_rate_by_symbol_count():
    fx = ael_fixture()
    code = AelCode(fx.outer, fx.inner, sample_expander(256, 64, np.random.default_rng(0)))
    msg_symbols = fx.outer.d + 1
    out_symbols = code.graph.N * code.graph.D
    assert code.rate == Fraction(msg_symbols, out_symbols) == code.product_rate
    P = random_poly(fx.outer.ctx, fx.outer.d, np.random.default_rng(1))
    assert code.encode(P).shape == (256, 64)


def test_ael_zero_error():
    fx = ael_fixture()
    ok, size, _ = ael_once(fx, np.random.default_rng(0))
    assert ok and size == 1


def test_ael_corrupted_blocks():
    R, eps, _ = AEL_SAMPLER
    bad = int((1 - R - 4 * eps) * 256)
    fx = ael_fixture()
    ok = sum(ael_once(fx, np.random.default_rng(seed), bad)[0] for seed in range(10))
    assert ok >= 9
