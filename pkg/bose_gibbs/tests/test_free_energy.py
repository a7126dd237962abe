"""
Tests for the free-energy expansion, the grand potential and β sweeps.
"""

import csv
import io
import math

import numpy as np
import pytest

from bose_gibbs import condensate, free_energy, ideal_gas, lattice
from bose_gibbs.common.errors import DomainError
from bose_gibbs.lattice import VhatTable
from bose_gibbs.regime import PhaseRegime

N = 1e3
DEFAULT_VHAT = VhatTable({0: 1.0, 1: 0.5, 2: 0.25})


@pytest.fixture(scope="module")
def beta_c():
    return ideal_gas.critical_beta(N)


@pytest.mark.parametrize("ratio", [0.5, 2.0, 4.0])
def test_vanishing_interaction_gives_ideal_gas(beta_c, ratio):
    """With v̂ ≡ 0 the expansion collapses to F0 in every phase."""
    beta = ratio * beta_c
    table = lattice.certified_table(beta, 0.0)
    breakdown = free_energy.total_free_energy(beta, N, VhatTable({}), table)
    F0 = free_energy.ideal_free_energy(beta, N, table)
    assert breakdown.mean_field == 0.0
    assert breakdown.total == pytest.approx(F0, rel=1e-10)


def test_breakdown_sums_its_parts(beta_c):
    """total = F_Bog + v̂(0)N/2 + F^BEC, with the remainder band reported."""
    breakdown = free_energy.total_free_energy(2 * beta_c, N, DEFAULT_VHAT)
    assert breakdown.regime == PhaseRegime.CONDENSED
    assert breakdown.mean_field == pytest.approx(0.5 * N)
    assert breakdown.total == pytest.approx(
        breakdown.F_bog + breakdown.mean_field + breakdown.F_bec, rel=1e-14
    )
    diag = breakdown.diagnostics
    assert diag["remainder_band"] == pytest.approx(N ** 0.625)
    assert math.isfinite(diag["branch_gap_ratio"])
    assert "condensed_log_term" in diag


def test_non_condensed_phase_uses_ideal_parts(beta_c):
    """Above T_c the total is F0 + v̂(0)N/2."""
    breakdown = free_energy.total_free_energy(0.5 * beta_c, N, DEFAULT_VHAT)
    assert breakdown.regime == PhaseRegime.NON_CONDENSED
    assert breakdown.total == pytest.approx(
        breakdown.diagnostics["F0"] + 0.5 * N, rel=1e-12
    )


def test_assemble():
    b = free_energy.FreeEnergyBreakdown.assemble(-3.0, 2.0, 0.5, "condensed", note=1)
    assert b.total == -0.5
    assert b.to_dict()["diagnostics"] == {"note": 1}


def test_total_free_energy_rejects_bad_input():
    with pytest.raises(DomainError):
        free_energy.total_free_energy(1.0, 0.0, DEFAULT_VHAT)
    with pytest.raises(DomainError):
        free_energy.total_free_energy(-1.0, N, DEFAULT_VHAT)


def test_condensate_free_energy_without_interaction():
    """v̂(0) = 0 gives the ideal single-mode free energy."""
    assert free_energy.condensate_free_energy(0.01, N, 50.0, 0.0) == pytest.approx(
        condensate.free_energy_ideal_condensate(0.01, 50.0)
    )


def test_theta_branches_meet_at_boundary():
    """Both Θ^BEC forms coincide at N0 = η^{5/6}."""
    eta = 1e6
    N0 = eta ** (5.0 / 6.0)
    gap = free_energy.theta_bec_gap(0.01, N0, eta)
    assert gap["boundary_N0"] == pytest.approx(N0)
    assert gap["gap"] == pytest.approx(0.0, abs=1e-9)
    away = free_energy.theta_bec_gap(0.01, 10 * N0, eta)
    assert away["gap"] == pytest.approx(math.log(10.0) / 0.01)


def test_theta_bec_branch_values():
    assert free_energy.theta_bec(2.0, 100.0, 1e6, PhaseRegime.THETA_IDEAL) == pytest.approx(
        -math.log(100.0) / 2.0
    )
    assert free_energy.theta_bec(
        2.0, 100.0, 1e6, PhaseRegime.THETA_INTERACTING
    ) == pytest.approx(-5.0 / 12.0 * math.log(1e6))


def test_effective_mu_solves_balance(beta_c):
    """M(β, μ̃) = (μ - μ̃)η/v̂(0) at the returned μ̃ < 0."""
    beta = 2 * beta_c
    eff = free_energy.solve_effective_mu(beta, 0.5, N, 1.0)
    assert eff.mu_tilde < 0
    assert eff.gap > 0
    assert eff.residual < 1e-10
    assert eff.M == pytest.approx(eff.gap * N / 1.0, rel=1e-9)


@pytest.mark.parametrize("eta, vhat0", [(0.0, 1.0), (N, 0.0)])
def test_effective_mu_rejects_bad_input(eta, vhat0):
    with pytest.raises(DomainError):
        free_energy.solve_effective_mu(1e-3, 0.5, eta, vhat0)


def test_grand_potential_parts(beta_c):
    """Φ is the sum of its three parts and μ0(β, M) tracks μ̃."""
    phi = free_energy.grand_potential(2 * beta_c, 0.5, N, 1.0)
    assert phi.total == pytest.approx(
        phi.Phi_id_plus + phi.quadratic_term + phi.Theta_bec, rel=1e-14
    )
    assert phi.quadratic_term <= 0
    assert phi.mu0 == pytest.approx(phi.mu_tilde, rel=1e-6)
    assert phi.regime in (PhaseRegime.THETA_INTERACTING, PhaseRegime.THETA_IDEAL)


def test_chem_potential_band_value():
    """Hand-evaluated at β = 1, N = 8, N0 = 2."""
    expected = 2.0 * math.sqrt(1.0 / 8.0 + 1.0 / 5.0) + 0.125
    assert free_energy.chem_potential_band(1.0, 8.0, 2.0) == pytest.approx(expected)


def test_chem_potential_estimate(beta_c):
    est = free_energy.chem_potential_estimate(2 * beta_c, N, 1.0)
    assert est["center"] == pytest.approx(1.0 + est["mu0"])
    assert est["band"] > 0
    with pytest.raises(DomainError):
        free_energy.chem_potential_estimate(2 * beta_c, N, -1.0)


def test_legendre_consistency_needs_interaction(beta_c):
    with pytest.raises(DomainError):
        free_energy.legendre_consistency(2 * beta_c, N, VhatTable({1: 1.0}))


def test_parse_sweep(beta_c):
    betas = free_energy.parse_sweep("0.5:2.0:beta_c:25", N)
    assert len(betas) == 25
    assert betas[0] == pytest.approx(0.5 * beta_c)
    assert betas[-1] == pytest.approx(2.0 * beta_c)
    assert list(free_energy.parse_sweep("1:2:abs:3", N)) == [1.0, 1.5, 2.0]


@pytest.mark.parametrize(
    "text", ["1:2:abs", "a:2:abs:3", "1:2:kelvin:3", "2:1:abs:3", "1:2:abs:1", "0:2:abs:3"]
)
def test_parse_sweep_rejects(text):
    with pytest.raises(DomainError):
        free_energy.parse_sweep(text, N)


def test_monotonicity_check_flags_decrease():
    rows = [{"beta": 1.0, "total": -5.0}, {"beta": 2.0, "total": -6.0},
            {"beta": 3.0, "total": -1.0}]
    report = free_energy.check_temperature_monotonicity(rows)
    assert not report["passed"]
    assert report["violations"] == [(1.0, 2.0)]
    assert report["worst_step"] == -1.0


@pytest.mark.timeout(600)
def test_beta_sweep_rows_and_csv():
    """A 25-point sweep through T_c is monotone and writes one CSV row per β."""
    rows = free_energy.beta_sweep(N, "0.5:2.0:beta_c:25", DEFAULT_VHAT)
    assert len(rows) == 25
    regimes = {row["regime"] for row in rows}
    assert {PhaseRegime.NON_CONDENSED, PhaseRegime.CONDENSED} <= regimes
    assert free_energy.check_temperature_monotonicity(rows)["passed"]

    parsed = list(csv.DictReader(io.StringIO(free_energy.sweep_csv(rows))))
    assert len(parsed) == 25
    assert tuple(parsed[0]) == free_energy.SWEEP_COLUMNS
    assert float(parsed[3]["total"]) == rows[3]["total"]


def test_effective_mu_decreases_with_vhat0(beta_c):
    """A stronger v̂(0) pushes μ̃ strictly down."""
    beta = 2 * beta_c
    tildes = [free_energy.solve_effective_mu(beta, 0.5, N, v).mu_tilde
              for v in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(tildes, tildes[1:]))


@pytest.mark.parametrize("eta", [1e4, 1e6])
def test_effective_mu_gap_stays_bracketed(eta):
    """c <= μ - μ̃ <= 1/c across β and μ, with c = 0.1."""
    for ratio in (0.5, 1.0, 2.0):
        beta = ratio * ideal_gas.critical_beta(eta)
        table = lattice.certified_table(beta, 0.0)
        for mu in (0.5, 1.0, 2.0):
            gap = free_energy.solve_effective_mu(beta, mu, eta, 1.0, table).gap
            assert 0.1 <= gap <= 10.0, (ratio, mu, gap)


def test_grand_potential_matches_direct_recomputation(beta_c):
    """At μ = v̂(0) + μ0(β, η) the parts of Φ agree with a hand assembly and M = η."""
    beta, vhat0 = 2 * beta_c, 1.0
    table = lattice.certified_table(beta, 0.0)
    mu0 = ideal_gas.solve_mu0(beta, N, table).mu0
    phi = free_energy.grand_potential(beta, vhat0 + mu0, N, vhat0, table)
    assert phi.M == pytest.approx(N, rel=1e-8)
    assert phi.mu_tilde == pytest.approx(mu0, rel=1e-8)

    excited = table.n > 0
    x = beta * (table.psq[excited] - phi.mu0)
    log_part = float(np.sum(table.multiplicity[excited] * np.log(-np.expm1(-x)))) / beta
    assert phi.Phi_id_plus == pytest.approx(log_part, rel=1e-8)
    assert phi.quadratic_term == pytest.approx(-(vhat0 + mu0 - phi.mu0) ** 2 * N / (2 * vhat0),
                                               rel=1e-8)
    N0 = 1.0 / math.expm1(-beta * phi.mu0)
    assert phi.N0 == pytest.approx(N0, rel=1e-8)
    expected_theta = (-5.0 / (6.0 * beta) * math.log(N)
                      if N0 >= N ** (5.0 / 6.0) else -math.log(N0) / beta)
    assert phi.Theta_bec == pytest.approx(expected_theta, rel=1e-8)


@pytest.mark.parametrize("eta", [1e4, 1e6, 1e8])
def test_theta_bec_ratio_bounded(eta):
    """|Θ^BEC - F_c|/η^{2/3} stays small on both branches and at the crossover."""
    for exponent in (0.5, 5.0 / 6.0, 0.95):
        N0 = eta ** exponent
        r = free_energy.theta_bec_ratio(1.0, N0, eta, 1.0)
        assert r["theta_bec"] == pytest.approx(free_energy.theta_bec(1.0, N0, eta, r["branch"]))
        assert r["ratio"] == pytest.approx(abs(r["theta_bec"] - r["F_c"]) / eta ** (2.0 / 3.0))
        assert r["ratio"] < 0.05, (exponent, r)


@pytest.mark.timeout(300)
def test_legendre_consistency_reports_gap_against_band(beta_c):
    """Φ + μM is compared with the canonical total; the ratio is gap/band."""
    beta = 2 * beta_c
    table = lattice.certified_table(beta, 0.0)
    report = free_energy.legendre_consistency(beta, N, DEFAULT_VHAT, table)
    mu = free_energy.chem_potential_estimate(beta, N, 1.0, table)["center"]
    phi = free_energy.grand_potential(beta, mu, N, 1.0, table)
    canonical = free_energy.total_free_energy(beta, N, DEFAULT_VHAT, table)
    assert report["mu"] == pytest.approx(mu)
    assert report["legendre"] == pytest.approx(phi.total + mu * phi.M, rel=1e-12)
    assert report["canonical"] == pytest.approx(canonical.total, rel=1e-12)
    assert report["gap"] == pytest.approx(abs(report["legendre"] - report["canonical"]))
    assert report["band"] == pytest.approx(N ** (2.0 / 3.0))
    assert report["ratio"] == pytest.approx(report["gap"] / report["band"])
    assert math.isfinite(report["ratio"])
