import numpy as np

from etalecorr.cstar import identity_bimodule, matrix_algebra
from etalecorr.verify import SUITES, Case, SuiteResult, check_unitary, conjugacy_classes, run_suite


def test_thirteen_suites():
    assert len(SUITES) == 13


def test_suite_needs_enough_instances():
    r = SuiteResult("x", "t", [Case("a", True)], minimum=2)
    assert not r.passed
    r = SuiteResult("x", "t", [Case("a", True), Case("b", True)], minimum=2)
    assert r.passed
    r.cases.append(Case("c", False))
    assert not r.passed and len(r.failures) == 1


def test_report_has_no_timing():
    d = run_suite("pair-collapse").to_dict()
    assert d["passed"] and d["instances"] == 5
    assert "time" not in str(d)


def test_same_seed_same_record():
    assert run_suite("cutoff", seed=4).to_dict() == run_suite("cutoff", seed=4).to_dict()


def test_conjugacy_brute_force():
    assert conjugacy_classes([[0, 1], [1, 0]]) == 2


def test_check_unitary_detects_scaling():
    E = identity_bimodule(matrix_algebra(2))
    assert check_unitary(np.eye(4), E, E, 1e-8).ok
    assert not check_unitary(2 * np.eye(4), E, E, 1e-8).ok
