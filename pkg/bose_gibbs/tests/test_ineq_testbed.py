"""
Tests for the finite-dimensional trace-inequality testbed.
"""

import math

import numpy as np
import pytest

from bose_gibbs import ineq_testbed as tb
from bose_gibbs.common.errors import DomainError
from bose_gibbs.utils.artifacts import stable_dumps

A2 = np.diag([0.0, 1.0]).astype(complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _pair(d, seed):
    rng = np.random.default_rng(seed)
    return tb.random_hermitian(d, rng), tb.random_hermitian(d, rng)


def test_two_level_duhamel():
    """diag(0, 1) with σ_x: duhamel = 2(1 - e⁻¹)/(1 + e⁻¹)."""
    expected = 2.0 * (1.0 - math.exp(-1.0)) / (1.0 + math.exp(-1.0))
    assert tb.duhamel(A2, SIGMA_X) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.9242, abs=1e-4)


def test_two_level_falk_bruch():
    """The Falk–Bruch upper bound is ¼ of the double commutator, 0.2311."""
    report = tb.check_falk_bruch(A2, SIGMA_X)
    assert report["passed"]
    assert report["tr_b2"] == pytest.approx(1.0)
    assert report["rhs"] == pytest.approx(0.2311, abs=1e-4)
    assert report["eigen_form_error"] < 1e-12


@pytest.mark.parametrize("d, seed", [(2, 0), (4, 1), (8, 2)])
def test_duhamel_eigen_form_matches_quadrature(d, seed):
    """The log-mean eigen form equals the s-integral of matrix exponentials."""
    A, B = _pair(d, seed)
    closed = tb.duhamel(A, B, t=0.3)
    assert closed == pytest.approx(tb.duhamel_quadrature(A, B, t=0.3), rel=1e-10)


def test_large_spectrum_does_not_overflow():
    """Log-shifted weights keep huge spreads finite."""
    A, B = _pair(4, 3)
    report = tb.check_falk_bruch(60.0 * A, B)
    assert math.isfinite(report["duhamel"])
    assert report["passed"]


@pytest.mark.parametrize("d, seed", [(2, 10), (3, 11), (6, 12)])
def test_random_pair_checks_pass(d, seed):
    """Every constant-free inequality holds on random Hermitian pairs."""
    A, B = _pair(d, seed)
    assert tb.check_key_estimate(A, B)["passed"]
    assert tb.check_stahl(A, B)["passed"]
    assert tb.check_derivatives(A, B)["passed"]
    assert tb.check_second_order_bound(A, B)["passed"]
    assert tb.check_higher_order_bound(A, B)["passed"]
    assert tb.check_scale_covariance(A, B)["passed"]


def test_commuting_triple():
    """X commutes with A and B, dominates ±B, and the higher-order check passes."""
    rng = np.random.default_rng(5)
    A, B, X = tb.random_commuting_triple(6, rng, nonnegative=True)
    tb.HermitianPair(A, B, X).validate()
    assert np.linalg.eigvalsh(B)[0] >= -1e-12
    report = tb.check_higher_order_bound(A, B, X, alpha=1.0)
    assert report["passed"]
    assert any(name.startswith("nonneg_") for name in report["ratios"])


def test_hermitian_pair_validation():
    """Non-Hermitian input, wrong sizes and non-commuting X are rejected."""
    A, B = _pair(3, 6)
    with pytest.raises(DomainError):
        tb.HermitianPair(A + np.triu(np.ones((3, 3)), 1), B).validate()
    with pytest.raises(DomainError):
        tb.HermitianPair(np.eye(13), np.eye(13)).validate()
    with pytest.raises(DomainError):
        tb.HermitianPair(A, B, np.diag([2.0, 3.0, 4.0]) * 10).validate()


def test_trace_comparison():
    """The θ = 2 comparison holds; θ <= 1 and non-positive states are rejected."""
    rng = np.random.default_rng(8)
    G, G2 = tb.random_density(5, rng), tb.random_density(5, rng)
    B = tb.random_hermitian(5, rng)
    assert tb.check_trace_comparison(G, G2, B)["passed"]
    assert tb.check_trace_comparison(G, G2, B, theta=3.0)["ratio"] > 0
    with pytest.raises(DomainError):
        tb.check_trace_comparison(G, G2, B, theta=1.0)
    with pytest.raises(DomainError):
        tb.check_trace_comparison(-G, G2, B)


def test_stahl_grid_must_be_interior():
    """Grid points at ±1 are outside the convexity statement."""
    A, B = _pair(2, 9)
    with pytest.raises(DomainError):
        tb.check_stahl(A, B, grid=[-1.0, 0.0, 1.0])


@pytest.mark.timeout(300)
def test_ensemble_is_clean_and_reproducible():
    """A small seeded ensemble has no violations and repeats exactly."""
    first = tb.run_ensemble((2, 3), count=3, seed=1, oracle_count=1)
    second = tb.run_ensemble((2, 3), count=3, seed=1, oracle_count=1)
    assert first["passed"], first["counterexamples"]
    assert first["violations"] == 0
    assert stable_dumps(first) == stable_dumps(second)
    assert set(tb.HARD_CHECKS) <= set(first["checks"])


@pytest.mark.timeout(300)
def test_ensemble_independent_of_workers():
    """The process pool gathers results back into submission order."""
    serial = tb.run_ensemble((2,), count=4, seed=3, oracle_count=0)
    pooled = tb.run_ensemble((2,), count=4, seed=3, workers=2, oracle_count=0)
    assert stable_dumps(serial) == stable_dumps(pooled)


def test_ensemble_rejects_bad_dims():
    """Dimensions outside [2, 12] and empty ensembles are errors."""
    with pytest.raises(DomainError):
        tb.run_ensemble((1, 2), count=1, seed=0)
    with pytest.raises(DomainError):
        tb.run_ensemble((2,), count=0, seed=0)
