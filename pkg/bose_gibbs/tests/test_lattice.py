"""
Tests for lattice shells and the certified spectral sums.
"""

import math

import numpy as np
import pytest

from bose_gibbs.common.errors import AccuracyError, DomainError, ResourceError
from bose_gibbs.lattice import (
    FOUR_PI_SQ,
    VhatTable,
    bose_sum,
    build_shells,
    certified_table,
    check_summability,
    gaussian_tail,
    inverse_power_sum,
    inverse_power_sum_with_bound,
    inverse_power_tail,
    load_vhat,
    log_sum,
    r3_counts,
    representative,
    shells_csv,
    sinh2_sum,
)

R3_SMALL = [1, 6, 12, 8, 6, 24, 24, 0, 12, 30, 24]
# Σ_{z≠0} |z|^{-4} over ℤ³
LATTICE_SUM_4 = 16.532315959


def test_r3_counts_small():
    """Direct convolution reproduces the sums-of-three-squares counts."""
    assert list(r3_counts(10)) == R3_SMALL


def test_r3_counts_fft_path_agrees():
    """The FFT branch gives the same low shells and passes its ball count."""
    big = r3_counts(5000)
    assert list(big[:11]) == R3_SMALL
    assert big[7] == 0 and big[28] == 0


def test_representative():
    """Shells that are sums of three squares have a sorted representative."""
    assert representative(6) == (2, 1, 1)
    assert representative(9) == (3, 0, 0)
    assert representative(7) is None


def test_build_shells_skips_empty_shells():
    """Empty shells such as n = 7 are not tabulated."""
    table = build_shells(FOUR_PI_SQ * 10)
    assert 7 not in table.n
    assert table.has_zero()
    assert table.lattice_points() == sum(R3_SMALL)
    assert table.psq[1] == pytest.approx(FOUR_PI_SQ)


def test_build_shells_limits():
    """Non-positive radius is a domain error and oversized tables are refused."""
    with pytest.raises(DomainError):
        build_shells(0.0)
    with pytest.raises(ResourceError):
        build_shells(FOUR_PI_SQ * 1000, shell_limit=100)


def test_bose_sum_on_finite_table():
    """Finite mode sets are summed exactly with no tail."""
    table = build_shells(FOUR_PI_SQ * 2).subset([1, 2])
    beta, mu = 0.1, 0.0
    expected = 6 / math.expm1(beta * FOUR_PI_SQ) + 12 / math.expm1(beta * 2 * FOUR_PI_SQ)
    assert bose_sum(table, beta, mu) == pytest.approx(expected, rel=1e-14)


def test_mu_must_lie_below_spectrum():
    """μ at or above the lowest included level is rejected."""
    table = build_shells(FOUR_PI_SQ * 4)
    with pytest.raises(DomainError):
        bose_sum(table, 1.0, 0.0)
    with pytest.raises(DomainError):
        bose_sum(table, 1.0, FOUR_PI_SQ, include_zero=False)
    with pytest.raises(DomainError):
        bose_sum(table, -1.0, -1.0)


def test_uncertified_tail_raises():
    """A table too small for the requested accuracy raises AccuracyError."""
    table = build_shells(FOUR_PI_SQ * 4)
    with pytest.raises(AccuracyError):
        bose_sum(table, 0.01, -1.0, tol=1e-12)


def test_gaussian_tail_refuses_tiny_cutoff():
    """The bound does not apply inside the shifted-cube radius."""
    assert gaussian_tail(0, 1.0, 0.0, 2.0) == math.inf


def test_certified_table_is_stable_under_growth():
    """Sums on the certified table match a much larger table."""
    beta = 0.01
    table = certified_table(beta, 0.0, rel_tol=1e-12)
    big = build_shells(FOUR_PI_SQ * table.cutoff_n * 4)
    a = bose_sum(table, beta, -1.0, include_zero=False)
    b = bose_sum(big, beta, -1.0, include_zero=False, tol=None)
    assert a == pytest.approx(b, rel=1e-11)


def test_sinh2_and_log_sums_are_mu_derivatives():
    """∂_μ bose_sum = β·sinh2_sum and ∂_μ log_sum = -β·bose_sum."""
    table = build_shells(FOUR_PI_SQ * 64).subset(range(1, 65))
    beta, mu, h = 0.05, -3.0, 1e-5
    d_bose = (bose_sum(table, beta, mu + h) - bose_sum(table, beta, mu - h)) / (2 * h)
    assert d_bose == pytest.approx(beta * sinh2_sum(table, beta, mu), rel=1e-7)
    d_log = (log_sum(table, beta, mu + h) - log_sum(table, beta, mu - h)) / (2 * h)
    assert d_log == pytest.approx(-beta * bose_sum(table, beta, mu), rel=1e-7)


def test_inverse_power_sum_matches_direct_enumeration():
    """In-table shells equal a direct ℤ³ sum; the tail estimate sits on top."""
    table = build_shells(FOUR_PI_SQ * 400)
    g = np.arange(-20, 21)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    nsq = (x * x + y * y + z * z).ravel()
    nsq = nsq[(nsq > 0) & (nsq <= 400)].astype(float)
    direct = float(np.sum(1.0 / (FOUR_PI_SQ * nsq) ** 2))
    estimate, bound = inverse_power_tail(table, 2.0)
    value, certificate = inverse_power_sum_with_bound(table, 2.0)
    assert value == pytest.approx(direct + estimate / FOUR_PI_SQ ** 2, rel=1e-12)
    assert certificate == pytest.approx(bound / FOUR_PI_SQ ** 2, rel=1e-12)
    with pytest.raises(DomainError):
        inverse_power_sum(build_shells(FOUR_PI_SQ * 4), 1.5)


@pytest.mark.parametrize("n_cut", [400, 1600])
def test_inverse_power_sum_within_its_certificate(n_cut):
    """The lattice constant lies inside the returned bound."""
    exact = LATTICE_SUM_4 / FOUR_PI_SQ ** 2
    value, certificate = inverse_power_sum_with_bound(build_shells(FOUR_PI_SQ * n_cut), 2.0)
    assert abs(value - exact) <= certificate
    assert value == pytest.approx(exact, rel=1e-4)


def test_inverse_power_sum_raises_on_loose_tail():
    """A tail bound above tol·|sum| is an accuracy error."""
    table = build_shells(FOUR_PI_SQ * 100)
    with pytest.raises(AccuracyError):
        inverse_power_sum(table, 2.0, tol=1e-6)
    assert inverse_power_sum(table, 2.0) > 0


def test_inverse_power_sum_vhat_beyond_table():
    """v̂ support past the cutoff is summed exactly with r3 multiplicities."""
    table = build_shells(FOUR_PI_SQ * 100)
    vhat = VhatTable({1: 1.0, 3: 0.5, 200: 2.0, 300: 0.75})
    r3 = r3_counts(300)
    expected = sum(v * r3[n] / (FOUR_PI_SQ * n) ** 2 for n, v in vhat.values.items())
    value, certificate = inverse_power_sum_with_bound(table, 2.0, vhat)
    assert value == pytest.approx(expected, rel=1e-12)
    assert certificate == 0.0
    inside = sum(v * r3[n] / (FOUR_PI_SQ * n) ** 2 for n, v in vhat.values.items() if n <= 100)
    assert value > inside
    assert inverse_power_sum(table, 2.0, vhat, tol=1e-12) == pytest.approx(expected, rel=1e-12)


def test_vhat_table():
    """v̂ lookups by shell index and by lattice vector."""
    vhat = VhatTable({0: 1.0, 1: 0.5, 2: 0.25})
    assert vhat.vhat0 == 1.0
    assert vhat.at((1, -1, 0)) == 0.25
    assert list(vhat.on(np.array([0, 1, 3, 100]))) == [1.0, 0.5, 0.0, 0.0]
    assert vhat.sup_beyond(0) == 0.5
    assert not vhat.is_zero()
    assert VhatTable({0: 0.0}).is_zero()
    with pytest.raises(DomainError):
        VhatTable({1: -0.1})


def test_load_vhat(tmp_path):
    """v̂ files hold 'n value' pairs with # comments."""
    path = tmp_path / "vhat.txt"
    path.write_text("# shell  value\n0 1.0\n1, 0.5   # first shell\n\n2 0.25\n")
    assert load_vhat(path).values == {0: 1.0, 1: 0.5, 2: 0.25}
    path.write_text("0 1.0 extra\n")
    with pytest.raises(DomainError):
        load_vhat(path)


def test_check_summability():
    """Compactly supported v̂ is accepted."""
    table = build_shells(FOUR_PI_SQ * 400)
    assert check_summability(table, VhatTable({0: 1.0, 1: 0.5}))


def test_shells_csv():
    """CSV lists one row per non-empty shell."""
    text = shells_csv(build_shells(FOUR_PI_SQ * 3))
    lines = text.strip().splitlines()
    assert lines[0] == "n,psq,multiplicity"
    assert len(lines) == 5
    assert lines[2].startswith("1,") and lines[2].endswith(",6")


def test_r3_counts_match_direct_enumeration():
    """Shell multiplicities up to n = 200 equal a direct count over ℤ³."""
    g = np.arange(-14, 15)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    nsq = (x * x + y * y + z * z).ravel()
    direct = np.bincount(nsq[nsq <= 200], minlength=201)
    np.testing.assert_array_equal(r3_counts(200), direct)


def test_bose_sum_matches_lattice_enumeration():
    """At β = 1, μ = -1 the certified sum equals Σ_z 1/(e^{β(p²-μ)} - 1) over ℤ³."""
    beta, mu = 1.0, -1.0
    g = np.arange(-4, 5)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    psq = FOUR_PI_SQ * (x * x + y * y + z * z).ravel()
    direct = float(np.sum(1.0 / np.expm1(beta * (psq - mu))))
    table = certified_table(beta, 0.0)
    assert bose_sum(table, beta, mu) == pytest.approx(direct, rel=1e-12)
