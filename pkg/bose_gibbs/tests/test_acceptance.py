"""
Tests for the acceptance runner.
"""

import pytest

from bose_gibbs import acceptance, distributions
from bose_gibbs.common.errors import AccuracyError, ConvergenceError, DomainError
from bose_gibbs.config import RunConfig

SMALL = RunConfig(ensemble_count=2, ensemble_dims=(2, 3), log_file=None)


def test_result_shape():
    r = acceptance._result("x", True, True, False, 0.5, note="n")
    assert r == {"name": "x", "passed": False, "hard": True, "hard_passed": True,
                 "worst": 0.5, "details": {"note": "n"}}


def test_unknown_criterion_is_rejected():
    with pytest.raises(DomainError):
        acceptance.run_acceptance(SMALL, quick=True, only=["no_such_check"])


@pytest.mark.timeout(600)
def test_quick_criteria_with_determinism():
    """Cheap criteria pass and a rerun reproduces them byte for byte."""
    report = acceptance.run_acceptance(
        SMALL, quick=True, only=["inequality_testbed", "finite_differences", "determinism"]
    )
    names = [c["name"] for c in report["criteria"]]
    assert names == ["inequality_testbed", "finite_differences", acceptance.DETERMINISM]
    assert report["hard_failures"] == []
    assert report["criteria"][-1]["details"]["mismatched"] == []


@pytest.mark.timeout(600)
def test_pooled_run_matches_serial():
    """Criterion seeds do not depend on the worker count."""
    pooled = acceptance.run_acceptance(
        SMALL.replace(workers=2), quick=True, only=["inequality_testbed"]
    )
    assert pooled["criteria"][-1]["name"] == acceptance.DETERMINISM
    assert pooled["criteria"][-1]["hard_passed"]


@pytest.mark.parametrize("exc, kind", [
    (AccuracyError, acceptance.ACCURACY),
    (ConvergenceError, acceptance.ACCURACY),
    (DomainError, acceptance.USAGE),
])
def test_raising_criterion_is_an_error_not_a_violation(monkeypatch, exc, kind):
    """A criterion that raises is listed under errors, never as a hard failure."""
    def broken(config, quick, seed):
        raise exc("tail bound 1e-3 exceeds 1e-12")

    monkeypatch.setitem(acceptance.CRITERIA, "root_residuals", broken)
    report = acceptance.run_acceptance(SMALL, quick=True, only=["root_residuals"],
                                       determinism=False)
    assert report["hard_failures"] == []
    assert not report["passed"]
    assert report["errors"] == [{"name": "root_residuals", "kind": kind,
                                 "type": exc.__name__,
                                 "message": "tail bound 1e-3 exceeds 1e-12"}]
    assert report["criteria"][0]["hard_passed"]


def test_regime_summary_gates_on_ks_trend():
    """A KS distance that grows along N beyond the sampling noise fails the regime."""
    kind = distributions.NORMAL

    def rows(*ks):
        return [{"N": 10.0 ** (2 * i + 4), "ks": k, "law": kind} for i, k in enumerate(ks)]

    assert acceptance._regime_summary(kind, rows(0.009, 0.004), 10 ** 6)["passed"]
    rising = acceptance._regime_summary(kind, rows(0.001, 0.008), 10 ** 6)
    assert not rising["decreasing"]
    assert not rising["passed"]
    jitter = acceptance._regime_summary(kind, rows(0.004, 0.0045), 10 ** 5)
    assert jitter["decreasing"] and jitter["passed"]
    wrong_law = rows(0.009, 0.004)
    wrong_law[0]["law"] = distributions.GEOMETRIC
    assert not acceptance._regime_summary(kind, wrong_law, 10 ** 6)["passed"]
