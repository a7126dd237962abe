"""
Tests for the continuous and discrete Φ⁴ condensate theories.
"""

import math

import numpy as np
import pytest

from bose_gibbs import condensate
from bose_gibbs.common.errors import DomainError
from bose_gibbs.regime import PhaseRegime


def test_coupling_and_sigma_roundtrip():
    """h = v̂(0)/(2N) and σ ↔ μ are inverse maps."""
    assert condensate.coupling(1.0, 1e6) == pytest.approx(5e-7)
    with pytest.raises(DomainError):
        condensate.coupling(-1.0, 10.0)
    beta, h = 2.0, 3e-4
    sigma = condensate.sigma_of(beta, h, 0.7)
    assert condensate.mu_of(beta, h, sigma) == pytest.approx(0.7, rel=1e-15)


@pytest.mark.parametrize("mu", [-0.05, 0.0, 0.02, 0.3])
def test_continuous_mean_matches_mills_ratio_form(mu):
    """The erfcx closed form and the inverse-Mills form give the same mean."""
    beta, h = 1.0, 1e-3
    mean = condensate.continuous_mean(beta, h, mu)
    assert mean == pytest.approx(condensate.continuous_mean_mills(beta, h, mu), rel=1e-10)


def test_quartic_free_limits():
    """With h = 0 the theories are exponential and geometric."""
    beta, mu = 2.0, -0.1
    cont = condensate.continuous_moments(beta, 0.0, mu)
    assert cont.mean == pytest.approx(-1.0 / (beta * mu))
    disc = condensate.discrete_moments(beta, 0.0, mu)
    assert disc.mean == pytest.approx(1.0 / math.expm1(-beta * mu))
    assert disc.var == pytest.approx(disc.mean * (1.0 + disc.mean))
    with pytest.raises(DomainError):
        condensate.continuous_moments(beta, 0.0, 0.1)


def test_direct_and_euler_maclaurin_sums_agree():
    """Both discrete evaluation paths agree where both apply."""
    a1, a2 = 2e-5, 1e-10
    lo, hi = condensate._window(a1, a2, condensate.WINDOW_DROP)
    direct = condensate._direct_moments(a1, a2, lo, hi)
    em = condensate._em_moments(a1, a2)
    assert direct.ln_partition == pytest.approx(em.ln_partition, rel=1e-12)
    assert direct.mean == pytest.approx(em.mean, rel=1e-9)
    assert direct.var == pytest.approx(em.var, rel=1e-8)


@pytest.mark.parametrize("kind", [condensate.CONTINUOUS, condensate.DISCRETE])
@pytest.mark.parametrize("M", [3.0, 150.0, 1e5])
def test_solve_mu_hits_target(kind, M):
    """The solved chemical potential reproduces the requested mean."""
    theory = condensate.solve_mu(kind, 1.0, condensate.coupling(1.0, 1e6), M)
    assert theory.mean == pytest.approx(M, rel=1e-10)
    assert theory.residual <= 1e-10
    assert theory.kind == kind


def test_solve_mu_rejects_bad_input():
    """Unknown kinds and non-positive targets are domain errors."""
    with pytest.raises(DomainError):
        condensate.solve_mu("lattice", 1.0, 1e-3, 10.0)
    with pytest.raises(DomainError):
        condensate.solve_mu(condensate.DISCRETE, 1.0, 1e-3, 0.0)


def test_quartic_free_discrete_free_energy_is_ideal_condensate():
    """h = 0 discrete free energy equals the ideal-condensate closed form."""
    beta, M = 0.3, 40.0
    theory = condensate.solve_mu(condensate.DISCRETE, beta, 0.0, M)
    assert condensate.free_energy(theory) == pytest.approx(
        condensate.free_energy_ideal_condensate(beta, M), rel=1e-12
    )
    assert condensate.free_energy_ideal_condensate(beta, 1e4) == pytest.approx(
        -(math.log(1e4) + 1.0) / beta, rel=1e-5
    )


def test_asymptotic_free_energy_regimes():
    """Each regime of M against N^{5/6} picks its leading-order form."""
    beta, N, vhat0 = 1.0, 1e8, 1.0
    big = condensate.free_energy_asymptotic(beta, N, 0.5 * N, vhat0)
    assert big["regime"] == PhaseRegime.INTERACTING
    exact = condensate.free_energy(
        condensate.solve_mu_continuous(beta, condensate.coupling(vhat0, N), 0.5 * N)
    )
    assert beta * abs(big["value"] - exact) < 1e-3

    small = condensate.free_energy_asymptotic(beta, N, 1e3, vhat0)
    assert small["regime"] == PhaseRegime.NON_INTERACTING
    assert small["value"] == condensate.free_energy_ideal_condensate(beta, 1e3)

    middle = condensate.free_energy_asymptotic(beta, N, N ** (5 / 6), vhat0)
    assert middle["regime"] == PhaseRegime.CROSSOVER


def test_mgf_limits_at_zero():
    """Every MGF limit equals one at λ = 0."""
    assert condensate.mgf_limit(PhaseRegime.LAW_NORMAL, 0.0) == pytest.approx(1.0)
    assert condensate.mgf_limit(PhaseRegime.LAW_EXPONENTIAL, 0.0) == pytest.approx(1.0)
    assert condensate.mgf_limit(PhaseRegime.LAW_TRUNCATED, 0.0, sigma=0.5) == pytest.approx(
        1.0, rel=1e-10
    )
    with pytest.raises(DomainError):
        condensate.mgf_limit(PhaseRegime.LAW_EXPONENTIAL, 1.0)
    with pytest.raises(DomainError):
        condensate.mgf_limit(PhaseRegime.LAW_TRUNCATED, 0.5)


def test_mgf_approaches_normal_for_large_sigma():
    """Far from the edge the centred condensate is Gaussian."""
    theory = condensate.continuous_theory(1.0, 1e-6, condensate.mu_of(1.0, 1e-6, 50.0))
    value = condensate.mgf_abs_centered(theory, 0.5)
    assert value == pytest.approx(condensate.mgf_limit(PhaseRegime.LAW_NORMAL, 0.5), rel=1e-8)


@pytest.mark.parametrize("sigma", [-3.0, 1.0])
def test_sampler_matches_moments(sigma):
    """Inverse-CDF draws reproduce the mean and variance of X."""
    beta, h = 1.0, 1e-4
    theory = condensate.continuous_theory(beta, h, condensate.mu_of(beta, h, sigma))
    rng = np.random.default_rng(7)
    draws = condensate.sample_truncated_gaussian(theory, 200_000, rng)
    assert np.all(draws >= 0)
    assert draws.mean() == pytest.approx(theory.mean, rel=2e-2)
    assert draws.var() == pytest.approx(theory.variance, rel=5e-2)


def test_gibbs_law_is_variational_minimiser():
    """Mean-preserving perturbations never lower the discrete free-energy functional."""
    theory = condensate.solve_mu(condensate.DISCRETE, 1.0, 0.01, 20.0)
    report = condensate.variational_check(theory, count=50)
    assert report["violations"] == 0
    assert report["worst_gap"] >= -1e-12


def test_variance_continuous():
    """Matches the solved theory's variance and refuses discrete theories."""
    h = condensate.coupling(1.0, 1e6)
    theory = condensate.solve_mu_continuous(1.0, h, 150.0)
    assert condensate.variance_continuous(theory) == pytest.approx(theory.variance)
    assert condensate.variance_continuous(theory) > 0
    with pytest.raises(DomainError):
        condensate.variance_continuous(condensate.solve_mu_discrete(1.0, h, 150.0))
