"""
Tests for the ideal Bose gas: chemical potential, condensate and free energies.
"""

import math

import pytest

from bose_gibbs import ideal_gas, lattice
from bose_gibbs.common.errors import DomainError
from bose_gibbs.regime import PhaseRegime


def _table(beta):
    return lattice.certified_table(beta, 0.0)


def test_critical_beta_at_one_thousand_particles():
    """β_c(1000) ≈ 1.5093e-3."""
    assert ideal_gas.critical_beta(1000) == pytest.approx(1.5093e-3, rel=1e-3)
    with pytest.raises(DomainError):
        ideal_gas.critical_beta(0)


def test_leading_condensate_fraction():
    """1 - (β/β_c)^{-3/2} above the transition, zero below."""
    N = 1e6
    bc = ideal_gas.critical_beta(N)
    assert ideal_gas.condensate_fraction_leading(2 * bc, N) == pytest.approx(1 - 2 ** -1.5)
    assert ideal_gas.condensate_fraction_leading(0.5 * bc, N) == 0.0


def test_solve_mu0_condensed():
    """Deep in the condensed phase N0/N follows the leading law."""
    N = 1e6
    beta = 2 * ideal_gas.critical_beta(N)
    state = ideal_gas.solve_mu0(beta, N, table=_table(beta))
    assert state.mu0 < 0
    assert state.residual < 1e-10
    assert state.phase == PhaseRegime.CONDENSED
    assert state.condensate_fraction == pytest.approx(1 - 2 ** -1.5, abs=0.02)


def test_solve_mu0_non_condensed():
    """Above the critical temperature the zero mode holds O(1) particles."""
    N = 1e6
    beta = 0.5 * ideal_gas.critical_beta(N)
    state = ideal_gas.solve_mu0(beta, N)
    assert state.phase == PhaseRegime.NON_CONDENSED
    assert 0 < state.N0 < 10


def test_condensate_grows_with_beta():
    """N0 is increasing in β at fixed N."""
    N = 1e5
    bc = ideal_gas.critical_beta(N)
    n0 = [ideal_gas.solve_mu0(r * bc, N).N0 for r in (0.8, 1.0, 1.2, 2.0)]
    assert all(a < b for a, b in zip(n0, n0[1:]))


def test_solve_mu0_rejects_bad_input():
    """Non-positive β or N, and tables without the zero mode, are domain errors."""
    with pytest.raises(DomainError):
        ideal_gas.solve_mu0(-1.0, 10.0)
    with pytest.raises(DomainError):
        ideal_gas.solve_mu0(1.0, 0.0)
    table = lattice.build_shells(lattice.FOUR_PI_SQ * 4).subset([1, 2])
    with pytest.raises(DomainError):
        ideal_gas.solve_mu0(1.0, 10.0, table=table)


def test_free_energy_parts_add_up():
    """F0 - (F0_plus + F0_bec) = μ0 (N - N0)."""
    N = 1e6
    beta = 1.5 * ideal_gas.critical_beta(N)
    table = _table(beta)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    fe = ideal_gas.free_energies(state, table)
    assert fe.F0_total == pytest.approx(fe.F0_plus + fe.F0_bec)
    assert fe.F0 - fe.F0_total == pytest.approx(state.mu0 * (N - state.N0), rel=1e-8)


def test_grand_potential_derivative_is_particle_number():
    """∂Φ0/∂μ = -N at μ = μ0."""
    N = 1e4
    beta = 1.2 * ideal_gas.critical_beta(N)
    table = _table(beta)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    h = 1e-6 * abs(state.mu0)
    d = (
        ideal_gas.grand_potential(beta, state.mu0 + h, table)
        - ideal_gas.grand_potential(beta, state.mu0 - h, table)
    ) / (2 * h)
    assert d == pytest.approx(-N, rel=1e-5)


def test_dmu0_dN_matches_finite_difference():
    """1/(β Var 𝒩) agrees with a centred difference of the solver."""
    N = 1e5
    beta = 1.5 * ideal_gas.critical_beta(N)
    table = _table(beta)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    h = 1e-3 * N
    up = ideal_gas.solve_mu0(beta, N + h, table=table).mu0
    down = ideal_gas.solve_mu0(beta, N - h, table=table).mu0
    fd = (up - down) / (2 * h)
    assert ideal_gas.dmu0_dN(state, table) == pytest.approx(fd, rel=1e-3)


@pytest.mark.parametrize("ratio", [1.0, 1.02, 1.5, 2.0])
def test_dmu0_dN_ratio_bounded(ratio):
    """The scaled derivative stays O(1) through the critical window."""
    N = 1e6
    beta = ratio * ideal_gas.critical_beta(N)
    table = _table(beta)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    value = ideal_gas.dmu0_dN_ratio(state, table)
    assert 1e-2 < value < 1e2


def test_particle_variance_exceeds_condensate_fluctuation():
    """Var 𝒩 >= N0² + N0 from the zero mode alone."""
    N = 1e5
    beta = 2 * ideal_gas.critical_beta(N)
    table = _table(beta)
    state = ideal_gas.solve_mu0(beta, N, table=table)
    assert ideal_gas.particle_variance(state, table) >= state.N0 ** 2 + state.N0
    assert math.isfinite(ideal_gas.dmu0_dN(state, table))
