"""One test per acceptance criterion; each prints its pass/fail line (run with -s to see them)."""
from listrec import acceptance


def _check(number):
    res = acceptance.CRITERIA[number]()
    print(res.line())
    assert res.passed, res.line()


def test_criterion_01_frs_pipeline_recovery():
    _check(1)

def test_criterion_02_subspace_containment():
    _check(2)

def test_criterion_03_subspace_design_inequality():
    _check(3)

def test_criterion_04_closed_subspaces():
    _check(4)

def test_criterion_05_xq_example():
    _check(5)

def test_criterion_06_wronskian():
    _check(6)

def test_criterion_07_brute_force_equivalence():
    _check(7)

def test_criterion_08_rm_grid():
    _check(8)

def test_criterion_09_local_list_recovery():
    _check(9)

def test_criterion_10_self_correction():
    _check(10)

def test_criterion_11_ael_end_to_end():
    _check(11)

def test_criterion_12_determinism():
    _check(12)
