"""
Tests for the limit laws, randomized Poisson laws and the sampling front end.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from bose_gibbs import bogoliubov, condensate, ideal_gas, lattice
from bose_gibbs import distributions as dist
from bose_gibbs.common.errors import DomainError
from bose_gibbs.lattice import VhatTable


def _theory(sigma, beta=1.0, h=1e-3):
    return condensate.continuous_theory(beta, h, condensate.mu_of(beta, h, sigma))


@pytest.mark.parametrize("sigma", [-3.0, 0.0, 2.0])
def test_truncated_law_is_standardised(sigma):
    """f_{σ,A,B} has mean 0 and variance 1."""
    law = dist.truncated_law(sigma)
    draws = law.sample(200_000, np.random.default_rng(11))
    assert draws.mean() == pytest.approx(0.0, abs=0.01)
    assert draws.var() == pytest.approx(1.0, abs=0.02)
    assert law.charfun(0.0) == pytest.approx(1.0)


def test_truncated_law_density_and_cdf():
    """The density vanishes below the edge and the CDF runs from 0 to 1."""
    law = dist.truncated_law(-1.0)
    edge = (1.0 - law.A) / law.B
    assert law.pdf(edge - 0.1) == 0.0
    assert law.cdf(edge - 0.1) == 0.0
    assert law.cdf(40.0) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(edge + 1e-12, 8.0, 4001)
    total = integrate.trapezoid(law.pdf(xs), xs)
    assert total == pytest.approx(1.0, abs=1e-4)
    cdf = law.cdf(xs)
    assert np.all(np.diff(cdf) >= 0)


def test_truncated_law_charfun_matches_samples():
    """Quadrature φ(t) agrees with the empirical characteristic function."""
    law = dist.truncated_law(0.5)
    draws = law.sample(200_000, np.random.default_rng(5))
    for t in (0.5, 1.5):
        empirical = np.mean(np.exp(1j * t * draws))
        assert abs(law.charfun(t) - empirical) < 0.01


def test_geometric_law():
    """q(n) = r^n (1 - r) on n = 0, 1, 2, …"""
    law = dist.geometric_law(0.5)
    assert law.pmf(0) == pytest.approx(0.5)
    assert law.pmf(2) == pytest.approx(0.125)
    assert law.mean() == pytest.approx(1.0)
    assert law.var() == pytest.approx(2.0)
    with pytest.raises(DomainError):
        law.pdf(1.0)
    with pytest.raises(DomainError):
        dist.geometric_law(1.0)
    draws = law.sample(100_000, np.random.default_rng(2))
    assert dist.ks_distance(draws, law) < 0.01


@pytest.mark.parametrize(
    "N0, kind",
    [
        (1.0, dist.GEOMETRIC),
        (1e4, dist.EXPONENTIAL),
        (1e8 ** (5 / 6), dist.TRUNCATED),
        (5e7, dist.NORMAL),
    ],
)
def test_limit_law_dispatch(N0, kind):
    """The regime of N0 against N^{5/6} picks the law."""
    law = dist.limit_law(1.0, 1e8, N0)
    assert law.kind == kind
    if kind == dist.TRUNCATED:
        assert law.t == pytest.approx(1.0)
    if kind == dist.GEOMETRIC:
        assert law.rate == pytest.approx(0.5)


def test_limit_law_rejects_bad_input():
    """N0 must be positive."""
    with pytest.raises(DomainError):
        dist.limit_law(1.0, 1e6, 0.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_charfun_far_from_edge_is_gaussian(t):
    """For large σ the centred condensate is standard normal."""
    phi = dist.charfun_truncated_gaussian(_theory(50.0), t)
    assert phi == pytest.approx(math.exp(-0.5 * t * t), abs=1e-8)


def test_point_mass_mixing_is_poisson():
    """A deterministic rate gives a plain Poisson law."""
    rp = dist.RandomizedPoisson(dist.PointMass(3.0))
    n = np.arange(6)
    assert rp.pmf(n) == pytest.approx(stats.poisson.pmf(n, 3.0), rel=1e-12)
    assert rp.variance() == pytest.approx(3.0)
    expected = np.exp(3.0 * np.expm1(1j)) * np.exp(-3j)
    assert rp.charfun(1.0, center=3.0, scale=1.0) == pytest.approx(expected)
    with pytest.raises(DomainError):
        rp.charfun(1.0)


def test_randomized_poisson_moments():
    """E Y = E X and Var Y = E X + Var X from the pmf."""
    theory = _theory(1.0)
    rp = dist.RandomizedPoisson(theory)
    n = np.arange(0, 600)
    p = rp.pmf(n)
    assert p.sum() == pytest.approx(1.0, abs=1e-8)
    mean = float(np.sum(n * p))
    var = float(np.sum((n - mean) ** 2 * p))
    assert mean == pytest.approx(theory.mean, rel=1e-7)
    assert var == pytest.approx(rp.variance(), rel=1e-6)
    with pytest.raises(DomainError):
        rp.pmf(-1)


def test_transfer_gap_small_for_large_condensate():
    """Poisson noise is negligible against the condensate fluctuations."""
    rp = dist.RandomizedPoisson(_theory(20.0, h=1e-8))
    gap = dist.charfun_transfer_gap(rp, np.array([0.5, 1.0, 2.0]))
    assert np.all(gap < 1e-2)
    with pytest.raises(DomainError):
        dist.charfun_transfer_gap(dist.RandomizedPoisson(dist.PointMass(2.0)), 1.0)


def test_gaussian_density_and_histogram_distance():
    """The condensate Gaussian is normalised and matches its own samples."""
    beta, N, vhat0, center = 1.0, 1e4, 1.0, 500.0
    std = math.sqrt(N / (beta * vhat0))
    xs = np.linspace(center - 10 * std, center + 10 * std, 20001)
    total = integrate.trapezoid(dist.gaussian_density(xs, beta, N, vhat0, center), xs)
    assert total == pytest.approx(1.0, rel=1e-8)
    draws = np.random.default_rng(1).normal(center, std, 100_000)
    distance = dist.l1_histogram_distance(
        draws, lambda x: dist.gaussian_density(x, beta, N, vhat0, center), bins=100
    )
    assert distance < 0.05
    with pytest.raises(DomainError):
        dist.gaussian_density(0.0, beta, N, 0.0, center)


def test_sample_is_seeded():
    """Same seed, same draws; the summary carries the law parameters."""
    law = dist.limit_law(1.0, 1e8, 1e4)
    a = dist.sample(law, 20_000, seed=3)
    b = dist.sample(law, 20_000, seed=3)
    assert np.array_equal(a.samples, b.samples)
    summary = a.to_dict()
    assert summary["count"] == 20_000
    assert summary["law_params"]["kind"] == dist.EXPONENTIAL
    assert a.ks < 0.03


def test_randomized_poisson_sampling_standardised():
    """Standardised randomized Poisson draws are close to the mixing law."""
    theory = _theory(20.0, h=1e-8)
    rp = dist.RandomizedPoisson(theory)
    summary = dist.sample(rp, 50_000, seed=9, reference=dist.truncated_law(theory.sigma))
    assert summary.mean == pytest.approx(0.0, abs=0.03)
    assert summary.ks < 0.02


def test_variance_limit_ratios():
    """Each regime's rescaled variance tends to one."""
    N, vhat0, beta = 1e8, 1.0, 1.0
    h = condensate.coupling(vhat0, N)
    big = condensate.solve_mu_continuous(beta, h, 0.5 * N)
    assert dist.variance_limit_ratio(big, N, vhat0, dist.NORMAL) == pytest.approx(1.0, rel=1e-6)
    mid = condensate.solve_mu_continuous(beta, h, N ** (5 / 6))
    assert dist.variance_limit_ratio(mid, N, vhat0, dist.TRUNCATED) == pytest.approx(1.0)
    small = condensate.solve_mu_continuous(beta, h, 1e3)
    assert dist.variance_limit_ratio(small, N, vhat0, dist.EXPONENTIAL) == pytest.approx(
        1.0, abs=0.1
    )
    with pytest.raises(DomainError):
        dist.variance_limit_ratio(big, N, vhat0, "bimodal")


def test_gaussian_center_choices():
    """The Gaussian centers on Ñ0 by default and on N0 on request."""
    N = 1e4
    beta = 2 * ideal_gas.critical_beta(N)
    table = lattice.certified_table(beta, 0.0)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    spectrum = bogoliubov.build_spectrum(state, VhatTable({0: 1.0, 1: 0.5}), table)
    assert dist.gaussian_center(spectrum) == spectrum.N_tilde_0
    assert dist.gaussian_center(spectrum, "ideal") == state.N0
    with pytest.raises(DomainError):
        dist.gaussian_center(spectrum, "mean")


def test_randomized_poisson_charfun_of_fixed_rate():
    """A point-mass rate gives the Poisson characteristic function."""
    rp = dist.RandomizedPoisson(dist.PointMass(3.0))
    ts = np.linspace(-2.0, 2.0, 9)
    expected = np.exp(3.0 * np.expm1(1j * ts))
    got = dist.randomized_poisson_charfun(rp, ts, center=0.0, scale=1.0)
    assert np.max(np.abs(got - expected)) < 1e-14
    with pytest.raises(DomainError):
        dist.randomized_poisson_charfun(rp, ts, center=0.0, scale=0.0)
