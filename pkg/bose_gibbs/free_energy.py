"""
free_energy.py
--------------

Free-energy expansion of the interacting gas and its grand-canonical
counterpart.

Canonical side: F(β, N) ≈ F_Bog + v̂(0)N/2 + F^BEC(β, N0), with F^BEC the
free energy of the discrete Φ⁴ condensate theory at the ideal-gas N0. Away
from the critical window the two limiting forms are reported alongside:
F_Bog + v̂(0)N/2 + (1/2β)ln(v̂(0)β/(2πN)) in the condensed phase, and the
ideal-gas F0 + v̂(0)N/2 in the non-condensed phase.

Grand-canonical side: the effective chemical potential μ̃ < 0 solves
Σ_p 1/(e^{β(p²-μ̃)} - 1) = (μ - μ̃)η/v̂(0), and
Φ = Φ^id_+(β, μ0(β, M)) - (μ - μ0)²η/(2v̂(0)) + Θ^BEC(β, N0(β, M)).

Remainder orders are never absorbed: every comparison reports the measured
gap and its ratio to the nominal band.
"""

import csv
from dataclasses import asdict, dataclass, field
import io
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import optimize

from . import condensate, ideal_gas, lattice
from .bogoliubov import build_spectrum
from .common.errors import ConvergenceError, DomainError
from .lattice import ShellTable, VhatTable
from .regime import PhaseRegime

logger = logging.getLogger(__name__)

DEFAULT_ROOT_TOL = 1e-10
REMAINDER_EXPONENT = 5.0 / 8.0
THETA_EXPONENT = 2.0 / 3.0
SWEEP_COLUMNS = ("beta", "F_bog", "F_bec", "total", "regime")


# ---------------------------------------------------------------------------
# Effective chemical potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveMu:
    beta: float
    mu: float
    eta: float
    vhat0: float
    mu_tilde: float
    M: float
    residual: float

    @property
    def gap(self) -> float:
        """μ - μ̃ > 0."""
        return self.mu - self.mu_tilde


def _default_table(beta: float, table: Optional[ShellTable], tol: float) -> ShellTable:
    if table is None:
        return lattice.certified_table(beta, 0.0, rel_tol=tol)
    if not table.has_zero():
        raise DomainError("the shell table must contain the zero mode")
    return table


def solve_effective_mu(
    beta: float,
    mu: float,
    eta: float,
    vhat0: float,
    table: Optional[ShellTable] = None,
    tol: float = DEFAULT_ROOT_TOL,
) -> EffectiveMu:
    """
    Solve M(β, μ̃) = (μ - μ̃)η/v̂(0) for μ̃ < 0.

    In x = -βμ̃ the left side decreases from +∞ and the right side increases
    linearly, so the root is unique and bracketed by doubling.
    """
    if not beta > 0 or not eta > 0 or not vhat0 > 0:
        raise DomainError(
            f"beta, eta and vhat0 must be positive, got {beta}, {eta}, {vhat0}"
        )
    table = _default_table(beta, table, lattice.DEFAULT_TAIL_TOL)
    psq, mult = table.psq, table.multiplicity
    slope_lin = eta / (beta * vhat0)

    def excess(x: float) -> float:
        return float(np.sum(mult / np.expm1(beta * psq + x))) - (mu + x / beta) * eta / vhat0

    def slope(x: float) -> float:
        return -float(np.sum(mult * 0.25 / np.sinh(0.5 * (beta * psq + x)) ** 2)) - slope_lin

    x_hi = max(1.0, -beta * mu if mu < 0 else 1.0)
    while excess(x_hi) > 0:
        x_hi *= 2.0
        if x_hi > 1e300:
            raise ConvergenceError(f"no upper bracket for the effective mu at mu={mu}")
    # lower end: the zero mode alone exceeds any finite right side as x -> 0
    x_lo = min(x_hi, 1.0)
    while excess(x_lo) <= 0:
        x_lo *= 0.5
        if x_lo < 1e-300:
            raise ConvergenceError(f"no lower bracket for the effective mu at mu={mu}")

    try:
        x = optimize.brentq(excess, x_lo, x_hi, xtol=1e-300, rtol=4e-15, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"effective mu solve failed: {exc}") from exc

    for _ in range(2):
        x_new = x - excess(x) / slope(x)
        if x_new > 0:
            x = x_new

    mu_tilde = -x / beta
    M = lattice.bose_sum(table, beta, mu_tilde, include_zero=True)
    rhs = (mu - mu_tilde) * eta / vhat0
    residual = abs(M - rhs) / max(abs(M), 1e-300)
    if residual > tol:
        raise ConvergenceError(f"effective mu residual {residual:.2e} above {tol:.1e}")
    logger.debug(
        "Effective mu: mu=%.8g -> mu_tilde=%.10g M=%.6g (residual %.1e)",
        mu, mu_tilde, M, residual,
    )
    return EffectiveMu(beta, mu, eta, vhat0, mu_tilde, M, residual)


# ---------------------------------------------------------------------------
# Grand potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrandPotential:
    Phi_id_plus: float
    quadratic_term: float
    Theta_bec: float
    total: float
    regime: str
    mu_tilde: float
    mu0: float
    M: float
    N0: float
    crossover: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def theta_bec(beta: float, N0: float, eta: float, branch: str) -> float:
    if branch == PhaseRegime.THETA_INTERACTING:
        return -5.0 / (6.0 * beta) * math.log(eta)
    return -math.log(N0) / beta


def theta_bec_gap(beta: float, N0: float, eta: float) -> Dict[str, float]:
    """Both Θ^BEC branches at (N0, η) and their difference; zero at N0 = η^{5/6}."""
    interacting = theta_bec(beta, N0, eta, PhaseRegime.THETA_INTERACTING)
    ideal = theta_bec(beta, N0, eta, PhaseRegime.THETA_IDEAL)
    return {
        "theta_interacting": interacting,
        "theta_ideal": ideal,
        "gap": abs(interacting - ideal),
        "boundary_N0": eta ** (5.0 / 6.0),
    }


def grand_potential(
    beta: float,
    mu: float,
    eta: float,
    vhat0: float,
    table: Optional[ShellTable] = None,
    tracker: Optional[PhaseRegime] = None,
    tol: float = DEFAULT_ROOT_TOL,
) -> GrandPotential:
    table = _default_table(beta, table, lattice.DEFAULT_TAIL_TOL)
    tracker = tracker or PhaseRegime()
    eff = solve_effective_mu(beta, mu, eta, vhat0, table, tol)

    # μ0(β, M) from the ideal gas at particle number M; equals μ̃ up to the solvers
    ideal = ideal_gas.solve_mu0(beta, eff.M, table, tracker=tracker)
    branch = tracker.classify_theta_branch(ideal.N0, eta)

    Phi_id_plus = lattice.log_sum(table, beta, ideal.mu0, include_zero=False) / beta
    quadratic = -((mu - ideal.mu0) ** 2) * eta / (2.0 * vhat0)
    Theta = theta_bec(beta, ideal.N0, eta, branch["regime"])
    result = GrandPotential(
        Phi_id_plus=Phi_id_plus,
        quadratic_term=quadratic,
        Theta_bec=Theta,
        total=Phi_id_plus + quadratic + Theta,
        regime=branch["regime"],
        mu_tilde=eff.mu_tilde,
        mu0=ideal.mu0,
        M=eff.M,
        N0=ideal.N0,
        crossover=bool(branch["crossover"]),
    )
    logger.info(
        "Grand potential at beta=%.6g mu=%.6g eta=%.6g: Phi=%.10g (%s)",
        beta, mu, eta, result.total, result.regime,
    )
    return result


def theta_bec_ratio(beta: float, N0: float, eta: float, vhat0: float) -> Dict[str, float]:
    """
    |Θ^BEC - F_c^BEC(β, N0)| / η^{2/3}, with F_c^BEC the continuous Φ⁴ free
    energy at coupling v̂(0)/(2η).
    """
    tracker = PhaseRegime()
    branch = tracker.classify_theta_branch(N0, eta)["regime"]
    Theta = theta_bec(beta, N0, eta, branch)
    Fc = condensate.free_energy(
        condensate.solve_mu_continuous(beta, condensate.coupling(vhat0, eta), N0)
    )
    return {
        "theta_bec": Theta,
        "F_c": Fc,
        "ratio": abs(Theta - Fc) / eta ** THETA_EXPONENT,
        "branch": branch,
    }


# ---------------------------------------------------------------------------
# Canonical free energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreeEnergyBreakdown:
    F_bog: float
    mean_field: float
    F_bec: float
    total: float
    regime: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def assemble(
        cls, F_bog: float, mean_field: float, F_bec: float, regime: str, **diagnostics: Any
    ) -> "FreeEnergyBreakdown":
        return cls(
            F_bog=F_bog,
            mean_field=mean_field,
            F_bec=F_bec,
            total=F_bog + mean_field + F_bec,
            regime=regime,
            diagnostics=dict(diagnostics),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def ideal_free_energy(
    beta: float,
    N: float,
    table: Optional[ShellTable] = None,
    tol: float = lattice.DEFAULT_TAIL_TOL,
) -> float:
    """F0(β, N) of the ideal gas on the unit torus."""
    table = _default_table(beta, table, tol)
    state = ideal_gas.solve_mu0(beta, N, table)
    return ideal_gas.free_energies(state, table).F0


def condensate_free_energy(beta: float, N: float, N0: float, vhat0: float) -> float:
    """F^BEC(β, N0): discrete Φ⁴ free energy at h = v̂(0)/(2N); ideal for v̂(0) = 0."""
    if vhat0 == 0:
        return condensate.free_energy_ideal_condensate(beta, N0)
    theory = condensate.solve_mu_discrete(beta, condensate.coupling(vhat0, N), N0)
    return condensate.free_energy(theory)


def total_free_energy(
    beta: float,
    N: float,
    vhat: VhatTable,
    table: Optional[ShellTable] = None,
    tracker: Optional[PhaseRegime] = None,
    tol: float = lattice.DEFAULT_TAIL_TOL,
) -> FreeEnergyBreakdown:
    if not beta > 0 or not N > 0:
        raise DomainError(f"beta and N must be positive, got beta={beta}, N={N}")
    table = _default_table(beta, table, tol)
    tracker = tracker or PhaseRegime()
    state = ideal_gas.solve_mu0(beta, N, table, tracker=tracker)
    ideal = ideal_gas.free_energies(state, table)
    vhat0 = vhat.vhat0
    mean_field = 0.5 * vhat0 * N

    spectrum = build_spectrum(state, vhat, table, tol=tol)
    F_bec = condensate_free_energy(beta, N, state.N0, vhat0)
    expansion_total = spectrum.F_bog + mean_field + F_bec
    non_condensed_total = ideal.F0 + mean_field
    band = N ** REMAINDER_EXPONENT

    diagnostics: Dict[str, Any] = {
        "remainder_order": "O(N^{5/8})",
        "remainder_band": band,
        "N0": state.N0,
        "mu0": state.mu0,
        "beta_over_beta_c": state.ratio,
        "F0": ideal.F0,
        "non_condensed_total": non_condensed_total,
        "expansion_total": expansion_total,
        "branch_gap_ratio": abs(expansion_total - non_condensed_total) / band,
    }
    if vhat0 > 0:
        log_term = condensate.free_energy_interacting(beta, N, vhat0)
        diagnostics["condensed_log_term"] = log_term
        diagnostics["condensed_total"] = spectrum.F_bog + mean_field + log_term
        diagnostics["bec_log_gap"] = abs(F_bec - log_term)

    if state.phase == PhaseRegime.NON_CONDENSED:
        # F0 = (F0_+ + μ0(N - N0)) + F0_BEC
        F_excited = ideal.F0_plus + state.mu0 * (N - state.N0)
        breakdown = FreeEnergyBreakdown.assemble(
            F_excited, mean_field, ideal.F0_bec, state.phase, **diagnostics
        )
    else:
        if state.phase == PhaseRegime.CRITICAL:
            logger.warning(
                "beta/beta_c = %.4f lies in the critical window; reporting the full expansion",
                state.ratio,
            )
        breakdown = FreeEnergyBreakdown.assemble(
            spectrum.F_bog, mean_field, F_bec, state.phase, **diagnostics
        )
    logger.info(
        "Free energy at beta=%.6g N=%.6g: total=%.12g (%s)",
        beta, N, breakdown.total, breakdown.regime,
    )
    return breakdown


# ---------------------------------------------------------------------------
# Chemical potential
# ---------------------------------------------------------------------------


def chem_potential_band(beta: float, N: float, N0: float) -> float:
    """
    N^{1/3}·√(1/N + 1/(βN0² + β⁻¹·max{1, 1/(βN0)}^{-1/2}))
    + β⁻¹·min{1/N0, N0/N^{4/3}}.
    """
    inner = beta * N0 ** 2 + max(1.0, 1.0 / (beta * N0)) ** -0.5 / beta
    first = N ** (1.0 / 3.0) * math.sqrt(1.0 / N + 1.0 / inner)
    second = min(1.0 / N0, N0 / N ** (4.0 / 3.0)) / beta
    return first + second


def chem_potential_estimate(
    beta: float, N: float, vhat0: float, table: Optional[ShellTable] = None
) -> Dict[str, float]:
    """Center v̂(0) + μ0 and half-width of the window holding μ_{β,N}."""
    if vhat0 < 0:
        raise DomainError(f"vhat0 must be non-negative, got {vhat0}")
    table = _default_table(beta, table, lattice.DEFAULT_TAIL_TOL)
    state = ideal_gas.solve_mu0(beta, N, table)
    return {
        "center": vhat0 + state.mu0,
        "band": chem_potential_band(beta, N, state.N0),
        "mu0": state.mu0,
        "N0": state.N0,
    }


def legendre_consistency(
    beta: float,
    N: float,
    vhat: VhatTable,
    table: Optional[ShellTable] = None,
) -> Dict[str, float]:
    """
    Compare Φ(β, μ) + μN at μ = v̂(0) + μ0(β, N) and η = N (so M = N) with
    the canonical expansion. Both carry remainders; the ratio to the larger
    band is a diagnostic.
    """
    vhat0 = vhat.vhat0
    if not vhat0 > 0:
        raise DomainError("legendre_consistency needs v̂(0) > 0")
    table = _default_table(beta, table, lattice.DEFAULT_TAIL_TOL)
    mu = chem_potential_estimate(beta, N, vhat0, table)["center"]
    phi = grand_potential(beta, mu, N, vhat0, table)
    canonical = total_free_energy(beta, N, vhat, table)
    legendre = phi.total + mu * phi.M
    band = max(N ** REMAINDER_EXPONENT, N ** THETA_EXPONENT)
    gap = abs(legendre - canonical.total)
    return {
        "mu": mu,
        "legendre": legendre,
        "canonical": canonical.total,
        "gap": gap,
        "band": band,
        "ratio": gap / band,
    }


# ---------------------------------------------------------------------------
# β sweeps
# ---------------------------------------------------------------------------


def parse_sweep(text: str, N: float) -> np.ndarray:
    """
    ``"lo:hi:beta_c:count"`` gives count points from lo·β_c to hi·β_c;
    ``"lo:hi:abs:count"`` takes lo and hi as absolute β.
    """
    parts = text.split(":")
    if len(parts) != 4:
        raise DomainError(f"sweep must read lo:hi:unit:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[3])
    except ValueError as exc:
        raise DomainError(f"bad sweep {text!r}: {exc}") from exc
    unit = parts[2].strip()
    if unit == "beta_c":
        scale = ideal_gas.critical_beta(N)
    elif unit == "abs":
        scale = 1.0
    else:
        raise DomainError(f"sweep unit must be beta_c or abs, got {unit!r}")
    if not 0 < lo < hi or count < 2:
        raise DomainError(f"sweep needs 0 < lo < hi and count >= 2, got {text!r}")
    return np.linspace(lo, hi, count) * scale


def beta_sweep(
    N: float,
    sweep: str,
    vhat: VhatTable,
    table: Optional[ShellTable] = None,
    tracker: Optional[PhaseRegime] = None,
) -> List[Dict[str, Any]]:
    """One row per β: beta, F_bog, F_bec, total, regime."""
    tracker = tracker or PhaseRegime()
    rows = []
    for beta in parse_sweep(sweep, N):
        beta = float(beta)
        point_table = table if table is not None else lattice.certified_table(beta, 0.0)
        b = total_free_energy(beta, N, vhat, point_table, tracker=tracker)
        rows.append(
            {
                "beta": beta,
                "F_bog": b.F_bog,
                "F_bec": b.F_bec,
                "total": b.total,
                "regime": b.regime,
            }
        )
    logger.info("Swept %d beta values at N=%.6g", len(rows), N)
    return rows


def sweep_csv(rows: Sequence[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(
            [repr(row[c]) if isinstance(row[c], float) else row[c] for c in SWEEP_COLUMNS]
        )
    return buf.getvalue()


def check_temperature_monotonicity(rows: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """F must decrease with temperature, i.e. increase along ascending β."""
    ordered = sorted(rows, key=lambda r: r["beta"])
    totals = np.array([r["total"] for r in ordered])
    steps = np.diff(totals)
    violations = [
        (ordered[i]["beta"], ordered[i + 1]["beta"]) for i in np.nonzero(steps <= 0)[0]
    ]
    if violations:
        logger.warning("Free energy not monotone in temperature at %d steps", len(violations))
    return {
        "passed": not violations,
        "violations": violations,
        "worst_step": float(steps.min()) if len(steps) else 0.0,
    }
