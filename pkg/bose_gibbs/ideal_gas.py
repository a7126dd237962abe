"""
ideal_gas.py
------------

Grand-canonical ideal Bose gas on the torus: chemical potential μ0(β, N),
condensate occupation N0, critical inverse temperature β_c, phase, free
energies, particle-number variance and ∂μ0/∂N.

The occupancy Σ_p 1/(e^{β(p²-μ)} - 1) is strictly increasing in μ < 0, so
μ0 is found by bracketing in x = -βμ > 0 followed by a Newton polish.
"""

from dataclasses import dataclass
import logging
import math
from typing import Optional

import numpy as np
from scipy import optimize

from . import lattice
from .common.errors import ConvergenceError, DomainError
from .common.special import zeta_three_halves
from .lattice import ShellTable
from .regime import PhaseRegime

logger = logging.getLogger(__name__)

DEFAULT_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class IdealGasState:
    beta: float
    N: float
    mu0: float
    N0: float
    beta_c: float
    phase: str
    ratio: float
    residual: float

    @property
    def condensate_fraction(self) -> float:
        return self.N0 / self.N


@dataclass(frozen=True)
class IdealFreeEnergies:
    F0_plus: float
    F0_bec: float
    F0_total: float
    Phi0: float
    F0: float  # Φ0 + μ0 N, the ideal-gas free energy


def critical_beta(N: float) -> float:
    """β_c = (1/4π) (N/ζ(3/2))^{-2/3}."""
    if not N > 0:
        raise DomainError(f"N must be positive, got {N}")
    return (N / zeta_three_halves()) ** (-2.0 / 3.0) / (4.0 * math.pi)


def condensate_fraction_leading(beta: float, N: float) -> float:
    """Leading-order N0/N = 1 - (β/β_c)^{-3/2} above β_c, else 0."""
    ratio = beta / critical_beta(N)
    return max(0.0, 1.0 - ratio ** -1.5)


def classify_phase(
    beta: float,
    N: float,
    window: float = 0.05,
    tracker: Optional[PhaseRegime] = None,
) -> str:
    tracker = tracker or PhaseRegime(phase_window=window)
    return tracker.classify_phase(beta, critical_beta(N))["regime"]


def solve_mu0(
    beta: float,
    N: float,
    table: Optional[ShellTable] = None,
    tol: float = DEFAULT_ROOT_TOL,
    window: float = 0.05,
    tracker: Optional[PhaseRegime] = None,
) -> IdealGasState:
    """
    Solve Σ_p 1/(e^{β(p²-μ0)} - 1) = N for μ0 < 0.

    Without a table, one is built with its Bose tail certified at μ = 0,
    which covers every trial μ < 0.
    """
    if not beta > 0 or not N > 0:
        raise DomainError(f"beta and N must be positive, got beta={beta}, N={N}")
    if table is None:
        table = lattice.certified_table(beta, 0.0, rel_tol=lattice.DEFAULT_TAIL_TOL)
    if not table.has_zero():
        raise DomainError("the shell table must contain the zero mode")

    psq, mult = table.psq, table.multiplicity

    def occupancy(x: float) -> float:
        return float(np.sum(mult / np.expm1(beta * psq + x)))

    def slope(x: float) -> float:
        # -d occupancy / dx
        return float(np.sum(mult * 0.25 / np.sinh(0.5 * (beta * psq + x)) ** 2))

    x_lo = 0.5 / (N + 1.0)
    x_hi = 2.0 * math.log1p(1.0 / N)
    while occupancy(x_hi) >= N:
        x_hi *= 2.0
        if x_hi > 1e6:
            raise ConvergenceError(f"no upper bracket for mu0 at beta={beta}, N={N}")

    try:
        x = optimize.brentq(
            lambda t: occupancy(t) - N, x_lo, x_hi, xtol=1e-300, rtol=4e-15, maxiter=400
        )
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"mu0 bracket solve failed: {exc}") from exc

    for _ in range(2):
        x_new = x + (occupancy(x) - N) / slope(x)
        if x_new > 0:
            x = x_new

    total = lattice.bose_sum(table, beta, -x / beta, include_zero=True)
    residual = abs(total - N) / N
    if residual > tol * 1e2:
        raise ConvergenceError(f"mu0 residual {residual:.2e} above tolerance {tol:.1e}")

    tracker = tracker or PhaseRegime(phase_window=window)
    beta_c = critical_beta(N)
    phase = tracker.classify_phase(beta, beta_c)
    state = IdealGasState(
        beta=beta,
        N=N,
        mu0=-x / beta,
        N0=1.0 / math.expm1(x),
        beta_c=beta_c,
        phase=phase["regime"],
        ratio=phase["ratio"],
        residual=residual,
    )
    logger.info(
        "Solved mu0=%.10g N0=%.6g at beta=%.6g N=%.6g (%s, residual %.1e)",
        state.mu0, state.N0, beta, N, state.phase, residual,
    )
    return state


def ideal_occupancies(state: IdealGasState, table: ShellTable) -> np.ndarray:
    """Bose–Einstein occupancy of one momentum on each shell (zero mode = N0)."""
    return 1.0 / np.expm1(state.beta * (table.psq - state.mu0))


def grand_potential(beta: float, mu: float, table: ShellTable) -> float:
    """Φ0(β, μ) = β⁻¹ Σ_p ln(1 - e^{-β(p²-μ)}), zero mode included."""
    return lattice.log_sum(table, beta, mu, include_zero=True) / beta


def free_energies(state: IdealGasState, table: ShellTable) -> IdealFreeEnergies:
    beta, mu0 = state.beta, state.mu0
    F0_plus = lattice.log_sum(table, beta, mu0, include_zero=False) / beta
    F0_bec = math.log(-math.expm1(beta * mu0)) / beta + mu0 * state.N0
    Phi0 = grand_potential(beta, mu0, table) if table.has_zero() else F0_plus
    return IdealFreeEnergies(
        F0_plus=F0_plus,
        F0_bec=F0_bec,
        F0_total=F0_plus + F0_bec,
        Phi0=Phi0,
        F0=Phi0 + mu0 * state.N,
    )


def particle_variance(state: IdealGasState, table: ShellTable) -> float:
    """Var(𝒩) in the ideal Gibbs state: Σ_p 1/(4 sinh²(β(p²-μ0)/2))."""
    return lattice.sinh2_sum(table, state.beta, state.mu0, include_zero=True)


def dmu0_dN(state: IdealGasState, table: ShellTable) -> float:
    """∂μ0/∂N = 1/(β Var(𝒩))."""
    return 1.0 / (state.beta * particle_variance(state, table))


def dmu0_dN_ratio(state: IdealGasState, table: ShellTable) -> float:
    """dμ0/dN · (βN0² + N^{2/3}); bounded uniformly in the critical scaling."""
    return dmu0_dN(state, table) * (state.beta * state.N0 ** 2 + state.N ** (2.0 / 3.0))
