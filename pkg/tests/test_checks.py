import pytest

from permtensor.checks import (
    BELL_EXPECTED,
    SUITES,
    SuiteResult,
    bell_suite,
    closure_suite,
    equivariance_suite,
    gradient_suite,
    run_suite,
    separation_suite,
)


def test_suite_result_bookkeeping():
    res = SuiteResult("demo")
    res.record(True)
    res.record(False, "broken case")
    res.record(True, "ignored on success")
    assert (res.passed, res.failed) == (2, 1)
    assert res.failures == ["broken case"]
    assert not res.ok


def test_bell_suite():
    res = bell_suite()
    assert res.ok and res.passed == len(BELL_EXPECTED)


def test_equivariance_suite_small():
    res = equivariance_suite(seed=1, models=6, perms=3)
    assert res.ok and res.passed == 6


def test_gradient_suite_small():
    res = gradient_suite(seed=1, pairs=4)
    assert res.ok and res.passed == 4


def test_closure_suite_small():
    res = closure_suite(seed=1, instances=6)
    assert res.ok and res.passed == 6


def test_separation_suite_small():
    res, witnesses = separation_suite(seed=1, pairs=8, isomorphic_pairs=2, lemma_instances=10)
    assert res.ok and res.passed == 3
    assert res.extra["separated"] >= 0.95 * res.extra["pairs"]
    assert res.extra["lemma_violations"] == 0
    assert len(witnesses) == 8 + 2
    assert all(w.separated for w in witnesses[:8])
    assert not any(w.separated for w in witnesses[8:])


def test_run_suite_dispatch():
    assert set(SUITES) == {"bell", "equivariance", "gradients", "closure", "separation"}
    res, witnesses = run_suite("bell", seed=0)
    assert res.name == "bell" and witnesses == []
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("everything", seed=0)
