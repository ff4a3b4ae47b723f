from fractions import Fraction

import numpy as np
import pytest

from listrec.codes import ListWord, mult_encode, mult_params, random_multipoly
from listrec.errors import RegimeViolation
from listrec.gf import prime_field
from listrec.local import (LocalCfg, LocalDecoder, QueryCounter, SymbolTable, local_list_recover, oracle_eval,
                           recover_candidates, self_correct, unique_radius)
from listrec.poly import eval_order, graded_lex
from listrec.linalg import nullspace
from listrec.poly import restriction_matrix

F13 = prime_field(13)
PARAMS = mult_params(F13, 3, 26, m=2)


def small_cfg(**kw):
    base = dict(alpha=Fraction(1, 100), alpha_prime=Fraction(15, 100), s_star=3, U_size=8, K_param=4,
                relaxed=True)
    base.update(kw)
    return LocalCfg(PARAMS, **base)


def planted(seed):
    rng = np.random.default_rng(seed)
    Q = random_multipoly(F13, 2, 26, rng)
    return rng, Q, mult_encode(Q, PARAMS)


def _point(rng):
    return tuple(int(v) for v in rng.integers(13, size=2))


def _unique_radius_oracle(q, s, d):
    # largest k/q at which an order-1 interpolant exists for one list entry per point
    best = Fraction(0)
    for k in range(q):
        agree = q - k
        D = s * agree - 1
        if (D + 1) + max(D - d + 1, 0) > q * s:
            best = Fraction(k, q)
    return best


@pytest.mark.parametrize("q,s,d", [(31, 3, 62), (13, 3, 26), (17, 2, 22)])
def test_unique_radius(q, s, d):
    assert unique_radius(q, s, d) == _unique_radius_oracle(q, s, d)


def test_unique_radius_frozen():
    assert unique_radius(31, 3, 62) == Fraction(5, 31)


def test_cfg_defaults():
    cfg = LocalCfg(mult_params(prime_field(31), 3, 62, m=2))
    assert cfg.delta == Fraction(1, 3)
    assert cfg.alpha_prime == 2 * cfg.alpha
    assert cfg.s_star == 1440 and cfg.K_param == 9
    assert cfg.U_size == 100 * 1440 * 4
    assert cfg.query_budget == 4 * 6 ** 2 * 31


def test_strict_regime_rejects_desk_parameters():
    with pytest.raises(RegimeViolation):
        LocalCfg(PARAMS).check_regime()
    small_cfg().check_regime()


def test_recover_candidates_zero_error():
    cfg = small_cfg()
    hits = 0
    for seed in range(100):
        rng, Q, c = planted(seed)
        a = _point(rng)
        Z = recover_candidates(ListWord.from_codeword(c), a, cfg.s_star, cfg, rng)
        assert len(Z) <= 2 * cfg.K_param * cfg.L_est
        hits += tuple(eval_order(Q, a, cfg.s_star)) in Z
    assert hits >= 90


def test_recover_candidates_empty_lists():
    cfg = small_cfg()
    S = ListWord(13, ((),) * PARAMS.n)
    assert recover_candidates(S, (1, 2), 3, cfg, np.random.default_rng(0)) == []


def test_recover_candidates_query_count():
    cfg = small_cfg()
    rng, Q, c = planted(0)
    counter = QueryCounter()
    recover_candidates(ListWord.from_codeword(c), (0, 0), 3, cfg, rng, counter)
    assert counter.count <= cfg.U_size ** 2 * 13


def test_oracle_eval_correct_advice():
    cfg = small_cfg()
    hits = 0
    for seed in range(100):
        rng, Q, c = planted(seed)
        a, x = _point(rng), _point(rng)
        while x == a:
            x = _point(rng)
        z = eval_order(Q, a, cfg.s_star)
        hits += oracle_eval(ListWord.from_codeword(c), a, z, x, cfg, rng) == eval_order(Q, x, 3)
    assert hits >= 90


def test_oracle_eval_inconsistent_advice_is_bottom():
    cfg = small_cfg()
    rng, Q, c = planted(1)
    a, x = (1, 2), (5, 7)
    z = list(eval_order(Q, a, cfg.s_star))
    z[0] = (z[0] + 1) % 13
    assert oracle_eval(ListWord.from_codeword(c), a, z, x, cfg, rng) is None


def test_oracle_eval_ambiguous_list_is_bottom():
    cfg = small_cfg()
    rng, Q, c = planted(2)
    a, x = (1, 2), (5, 7)
    table = SymbolTable(ListWord.from_codeword(c), PARAMS)
    i = table.index(x)
    y = np.array(c.symbols[i])
    # a second entry with the same restriction to the line through a and x
    R = restriction_matrix(((a[0] - x[0]) % 13, (a[1] - x[1]) % 13), 3, 13)
    y2 = tuple(int(v) for v in (y + nullspace(R, 13)[0]) % 13)
    lists = [(sym,) for sym in c.symbols]
    lists[i] = tuple(sorted({tuple(y), y2}))
    S = ListWord(13, tuple(lists))
    assert oracle_eval(S, a, eval_order(Q, a, 3), x, cfg, rng) is None


def test_decoder_oracle_matches_oracle_eval():
    cfg = small_cfg()
    rng, Q, c = planted(3)
    S = ListWord.from_codeword(c)
    a = (4, 9)
    z = eval_order(Q, a, 3)
    dec = LocalDecoder(a, z, cfg, SymbolTable(S, PARAMS), np.random.default_rng(0))
    for _ in range(25):
        x = _point(rng)
        assert dec.oracle(x) == oracle_eval(S, a, z, x, cfg)


def test_self_correct_zero_corruption():
    cfg = small_cfg()
    rng, Q, c = planted(4)
    table = SymbolTable(ListWord.from_codeword(c), PARAMS)
    word = lambda p: c.symbols[table.index(p)]
    for _ in range(20):
        x = _point(rng)
        counter = QueryCounter()
        assert self_correct(word, x, cfg, rng, counter) == c.symbols[table.index(x)]
        assert counter.count <= cfg.query_budget


def test_self_correct_total_on_garbage():
    cfg = small_cfg()
    rng = np.random.default_rng(5)
    arity = len(graded_lex(2, 3))
    out = self_correct(lambda p: tuple(int(v) for v in rng.integers(13, size=arity)), (3, 3), cfg, rng)
    assert len(out) == arity


def test_local_list_recover_end_to_end():
    cfg = small_cfg()
    rng, Q, c = planted(6)
    decoders = local_list_recover(ListWord.from_codeword(c), cfg, rng)
    assert 1 <= len(decoders) <= 2 * cfg.K_param * cfg.L_est
    good = 0
    for _ in range(10):
        x = _point(rng)
        outs = [decoders[0](x, rng) for _ in range(5)]
        good += sum(o == eval_order(Q, x, 3) for o in outs) >= 4
        assert all(d.last_queries <= cfg.query_budget for d in decoders)
    assert good >= 8


def test_local_list_recover_empty_word():
    cfg = small_cfg()
    S = ListWord(13, ((),) * PARAMS.n)
    assert local_list_recover(S, cfg, np.random.default_rng(0)) == []


def test_local_list_recover_deterministic():
    cfg = small_cfg()
    _, Q, c = planted(7)
    S = ListWord.from_codeword(c)
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(99)
        decs = local_list_recover(S, cfg, rng)
        runs.append([(d.a, d.z, d((2, 5))) for d in decs])
    assert runs[0] == runs[1]
