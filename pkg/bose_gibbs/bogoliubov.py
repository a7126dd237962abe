"""
bogoliubov.py
-------------

Temperature-dependent Bogoliubov theory on top of an ideal-gas state.

For a shell with x = p² - μ0 and c = v̂(p)N0/N the quadratic form has
A = x + c on a†a and B = c on the pairing terms. The symplectic rotation is
parametrised by s = ¼ ln(x/(x+2c)) <= 0, u = cosh s, v = sinh s, so that

    ε = √x·√(x+2c),   γ = cosh(2s)γ^Bog + v²,   α = ½ sinh(2s)(2γ^Bog + 1),

with γ^Bog = 1/(e^{βε} - 1). All per-shell quantities are numpy arrays; the
``BogoliubovMode`` record is a view on one shell.
"""

from dataclasses import dataclass
import csv
import io
import logging
import math
from typing import Dict, List, Optional

import numpy as np

from . import lattice
from .common.errors import AccuracyError, DomainError
from .ideal_gas import IdealGasState
from .lattice import ShellTable, VhatTable

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("n", "psq", "eps", "u", "v", "gamma_bog", "gamma", "alpha")


@dataclass(frozen=True)
class BogoliubovMode:
    psq: float
    A: float
    B: float
    eps: float
    u: float
    v: float
    gamma_bog: float
    gamma: float
    alpha: float
    beta: float
    x: float  # p² - μ0
    multiplicity: int = 1
    n: int = -1

    @property
    def c(self) -> float:
        return self.B


def _rotation(x: np.ndarray, c: np.ndarray):
    s = -0.25 * np.log1p(2.0 * c / x)
    eps = np.sqrt(x) * np.sqrt(x + 2.0 * c)
    return s, eps


def _occupations(beta: float, x: np.ndarray, c: np.ndarray):
    s, eps = _rotation(x, c)
    gamma_bog = 1.0 / np.expm1(beta * eps)
    v = np.sinh(s)
    gamma = np.cosh(2.0 * s) * gamma_bog + v * v
    alpha = 0.5 * np.sinh(2.0 * s) * (2.0 * gamma_bog + 1.0)
    return s, eps, gamma_bog, gamma, alpha


def mode_from_coefficients(
    x: float, c: float, beta: float, psq: Optional[float] = None
) -> BogoliubovMode:
    """
    One mode from x = p² - μ0 > 0 and c = v̂(p)N0/N >= 0 (so A = x + c, B = c).
    ``psq`` defaults to x, i.e. μ0 = 0.
    """
    if not x > 0 or c < 0 or not beta > 0:
        raise DomainError(f"need x > 0, c >= 0, beta > 0; got x={x}, c={c}, beta={beta}")
    s, eps, gb, g, a = _occupations(beta, np.asarray(x, float), np.asarray(c, float))
    return BogoliubovMode(
        psq=x if psq is None else psq,
        A=x + c,
        B=c,
        eps=float(eps),
        u=math.cosh(float(s)),
        v=math.sinh(float(s)),
        gamma_bog=float(gb),
        gamma=float(g),
        alpha=float(a),
        beta=beta,
        x=x,
    )


@dataclass(frozen=True, eq=False)
class BogoliubovSpectrum:
    """Per-shell Bogoliubov data over the nonzero shells of a table."""

    base: IdealGasState
    n: np.ndarray
    multiplicity: np.ndarray
    psq: np.ndarray
    c: np.ndarray
    eps: np.ndarray
    u: np.ndarray
    v: np.ndarray
    gamma_bog: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray
    E0: float
    F_bog: float
    N_tilde_0: float
    vhat0: float
    tail_bound: float = 0.0

    @property
    def beta(self) -> float:
        return self.base.beta

    @property
    def x(self) -> np.ndarray:
        return self.psq - self.base.mu0

    @property
    def A(self) -> np.ndarray:
        return self.x + self.c

    @property
    def B(self) -> np.ndarray:
        return self.c

    @property
    def phase(self) -> str:
        return self.base.phase

    @property
    def excited_number(self) -> float:
        return float(np.sum(self.multiplicity * self.gamma))

    def __len__(self) -> int:
        return len(self.n)

    def mode(self, i: int) -> BogoliubovMode:
        return BogoliubovMode(
            psq=float(self.psq[i]),
            A=float(self.A[i]),
            B=float(self.c[i]),
            eps=float(self.eps[i]),
            u=float(self.u[i]),
            v=float(self.v[i]),
            gamma_bog=float(self.gamma_bog[i]),
            gamma=float(self.gamma[i]),
            alpha=float(self.alpha[i]),
            beta=self.beta,
            x=float(self.x[i]),
            multiplicity=int(self.multiplicity[i]),
            n=int(self.n[i]),
        )

    @property
    def modes(self) -> List[BogoliubovMode]:
        return [self.mode(i) for i in range(len(self.n))]

    def index_of(self, n: int) -> int:
        hits = np.nonzero(self.n == n)[0]
        if not len(hits):
            raise DomainError(f"shell n={n} is not part of the spectrum")
        return int(hits[0])


def _support_table(table: ShellTable, vhat: VhatTable) -> ShellTable:
    """Extend a truncated table so the v̂ support lies inside it."""
    if not table.truncated or vhat.max_n <= table.cutoff_n:
        return table
    logger.info("Extending shell table to n=%d to cover the v̂ support", vhat.max_n)
    wider = lattice.build_shells(lattice.FOUR_PI_SQ * vhat.max_n)
    return wider.with_tail(table.tail_bound, *(table.built_for or (0.0, 0.0)))


def build_spectrum(
    state: IdealGasState,
    vhat: VhatTable,
    table: ShellTable,
    tol: Optional[float] = lattice.DEFAULT_TAIL_TOL,
) -> BogoliubovSpectrum:
    table = _support_table(table, vhat)
    beta, mu0, N = state.beta, state.mu0, state.N
    mask = table.n > 0
    n = table.n[mask]
    mult = table.multiplicity[mask]
    psq = table.psq[mask]
    x = psq - mu0
    c = vhat.on(n) * state.N0 / N

    s, eps, gamma_bog, gamma, alpha = _occupations(beta, x, c)
    u, v = np.cosh(s), np.sinh(s)

    # A - ε = c²/(A + ε), free of cancellation
    E0 = -0.5 * float(np.sum(mult * c * c / (x + c + eps)))
    excited = float(np.sum(mult * gamma))
    F_bog = float(np.sum(mult * np.log(-np.expm1(-beta * eps)))) / beta + mu0 * excited

    tail = 0.0
    if table.truncated:
        # v̂ vanishes beyond the table, so the tail is that of free occupations
        tail = lattice.gaussian_tail(table.cutoff_n, beta, mu0, 2.0)
        if tol is not None and tail > tol * max(excited, 1e-300):
            raise AccuracyError(
                f"Bogoliubov occupation tail {tail:.3e} exceeds tolerance at "
                f"cutoff n={table.cutoff_n}"
            )

    spectrum = BogoliubovSpectrum(
        base=state,
        n=n,
        multiplicity=mult,
        psq=psq,
        c=c,
        eps=eps,
        u=u,
        v=v,
        gamma_bog=gamma_bog,
        gamma=gamma,
        alpha=alpha,
        E0=E0,
        F_bog=F_bog,
        N_tilde_0=N - excited,
        vhat0=vhat.vhat0,
        tail_bound=tail,
    )
    logger.info(
        "Built Bogoliubov spectrum over %d shells: E0=%.6g F_bog=%.8g N~0=%.6g",
        len(n), E0, F_bog, spectrum.N_tilde_0,
    )
    return spectrum


def bogoliubov_matrix_check(mode: BogoliubovMode) -> float:
    """
    ‖T H T - diag(ε, ε)‖ for H = [[A, B], [B, A]] and the symplectic
    rotation T = [[u, v], [v, u]] (det T = u² - v² = 1).
    """
    H = np.array([[mode.A, mode.B], [mode.B, mode.A]])
    T = np.array([[mode.u, mode.v], [mode.v, mode.u]])
    D = T @ H @ T
    return float(np.max(np.abs(D - mode.eps * np.eye(2))))


# ---------------------------------------------------------------------------
# γ_p(λ, μ) and its derivatives
# ---------------------------------------------------------------------------


def _admissible(mode: BogoliubovMode, lam: float, f: float, mu: float) -> float:
    x0 = mode.x
    if abs(lam * f) >= 0.5 * x0:
        raise DomainError(
            f"|lambda*f| = {abs(lam * f):.3g} violates the admissibility bound "
            f"(p²-μ0)/2 = {0.5 * x0:.3g}"
        )
    x = x0 + lam * f - (mu - (mode.psq - x0))
    if not x > 0:
        raise DomainError(f"perturbed energy p²+λf-μ = {x} must stay positive")
    return x


def gamma_perturbed(
    mode: BogoliubovMode, lam: float = 0.0, f: float = 0.0, mu: Optional[float] = None
) -> float:
    """γ_p with the one-particle energy p² - μ0 replaced by p² + λf - μ (c fixed)."""
    mu0 = mode.psq - mode.x
    x = _admissible(mode, lam, f, mu0 if mu is None else mu)
    return float(_occupations(mode.beta, np.asarray(x), np.asarray(mode.c))[3])


def _gamma_x_derivatives(beta: float, x: float, c: float):
    """(γ, dγ/dx, d²γ/dx²) at fixed c."""
    s = -0.25 * math.log1p(2.0 * c / x)
    eps = math.sqrt(x) * math.sqrt(x + 2.0 * c)
    d = x + c
    eps_x = d / eps
    eps_xx = -c * c / eps ** 3

    half = 0.5 * beta * eps
    sh = math.sinh(half)
    gb = 1.0 / math.expm1(beta * eps)
    gb_e = -beta / (4.0 * sh * sh)
    gb_ee = beta * beta * math.cosh(half) / (4.0 * sh ** 3)
    gb_x = gb_e * eps_x
    gb_xx = gb_ee * eps_x ** 2 + gb_e * eps_xx

    s_x = 0.25 * (1.0 / x - 1.0 / (x + 2.0 * c))
    s_xx = 0.25 * (-1.0 / x ** 2 + 1.0 / (x + 2.0 * c) ** 2)
    u, v = math.cosh(s), math.sinh(s)
    v_x = u * s_x
    v_xx = v * s_x ** 2 + u * s_xx

    gamma = (1.0 + 2.0 * v * v) * gb + v * v
    g_x = 2.0 * v * v_x * (1.0 + 2.0 * gb) + (1.0 + 2.0 * v * v) * gb_x
    g_xx = (
        2.0 * (v_x ** 2 + v * v_xx) * (1.0 + 2.0 * gb)
        + 8.0 * v * v_x * gb_x
        + (1.0 + 2.0 * v * v) * gb_xx
    )
    return gamma, g_x, g_xx


def gamma_derivatives(
    mode: BogoliubovMode,
    wrt: str,
    f: float = 0.0,
    lam: float = 0.0,
    mu: Optional[float] = None,
) -> float:
    """
    ∂γ_p/∂μ, ∂γ_p/∂λ or ∂²γ_p/∂λ² at (λ, μ), by the chain rule through
    ε, v and γ^Bog. The one-particle energy enters only through
    x = p² + λf - μ, so ∂x/∂μ = -1 and ∂x/∂λ = f.

    Args:
        mode: the unperturbed mode (fixes p², μ0, c, β)
        wrt: one of ``"mu"``, ``"lambda"``, ``"lambda2"``
        f: perturbation f(p) on this shell
        lam, mu: evaluation point; ``mu`` defaults to μ0
    """
    mu0 = mode.psq - mode.x
    x = _admissible(mode, lam, f, mu0 if mu is None else mu)
    _, g_x, g_xx = _gamma_x_derivatives(mode.beta, x, mode.c)
    if wrt == "mu":
        return -g_x
    if wrt == "lambda":
        return f * g_x
    if wrt == "lambda2":
        return f * f * g_xx
    raise DomainError(f"unknown derivative {wrt!r}; use mu, lambda or lambda2")


# ---------------------------------------------------------------------------
# Bounds and diagnostics
# ---------------------------------------------------------------------------


def n_tilde_ratio(spectrum: BogoliubovSpectrum) -> float:
    """|Ñ0 - N0| / ((1 + 1/β)N0²/N² + N0/(βN))."""
    st = spectrum.base
    scale = (1.0 + 1.0 / st.beta) * (st.N0 / st.N) ** 2 + st.N0 / (st.beta * st.N)
    return abs(spectrum.N_tilde_0 - st.N0) / scale


def bound_checks(spectrum: BogoliubovSpectrum, ratio_limit: float = 100.0) -> Dict:
    """
    Per-shell identities and bounds of the spectrum, as a report.

    Hard checks: u² - v² = 1, ε² = A² - B², signs, the v², |α| and γ bounds,
    and the monotonicity ln(1 - e^{-βε}) >= ln(1 - e^{-β(p²-μ0)}). The Ñ0
    ratio and the ∂γ/∂μ scaling are soft diagnostics.
    """
    beta = spectrum.beta
    p4 = spectrum.psq ** 2
    c = spectrum.c
    A, B = spectrum.A, spectrum.B
    eps, u, v = spectrum.eps, spectrum.u, spectrum.v
    gb, g, a = spectrum.gamma_bog, spectrum.gamma, spectrum.alpha
    x = spectrum.x

    unitarity = float(np.max(np.abs(u * u - v * v - 1.0))) if len(u) else 0.0
    dispersion = float(np.max(np.abs(eps ** 2 - (A * A - B * B)) / eps ** 2)) if len(u) else 0.0
    rel = 1e-12
    checks = {
        "unitarity": unitarity <= 1e-12,
        "dispersion": dispersion <= 1e-12,
        "signs": bool(np.all(v <= 0) and np.all(u >= 0) and np.all(a <= 0) and np.all(g >= 0)
                      and np.all(eps >= x * (1 - rel))),
        "v_bound": bool(np.all(v * v <= c * c / (4.0 * p4) * (1 + rel) + 1e-300)),
        "alpha_bound": bool(np.all(np.abs(a) <= c / (2.0 * spectrum.psq) * (2.0 * gb + 1.0)
                                   * (1 + rel) + 1e-300)),
        "gamma_bound": bool(np.all(
            g <= (c * c / p4 * (1.0 + 2.0 / (beta * spectrum.psq))
                  + 1.0 / (beta * spectrum.psq)) * (1 + rel)
        )),
        "log_monotone": bool(np.all(
            np.log(-np.expm1(-beta * eps)) >= np.log(-np.expm1(-beta * x)) - 1e-14
        )),
    }

    mu_ratio = 0.0
    for i in range(min(len(spectrum), 200)):
        m = spectrum.mode(i)
        mu_ratio = max(mu_ratio, abs(gamma_derivatives(m, "mu")) * beta * m.psq ** 2)

    ratio = n_tilde_ratio(spectrum)
    if ratio > ratio_limit:
        logger.warning("N~0 - N0 ratio %.3g exceeds %.3g", ratio, ratio_limit)
    report = {
        "passed": all(checks.values()),
        "checks": checks,
        "unitarity_error": unitarity,
        "dispersion_error": dispersion,
        "n_tilde_ratio": ratio,
        "n_tilde_ratio_ok": ratio <= ratio_limit,
        "dgamma_dmu_ratio": mu_ratio,
    }
    if not report["passed"]:
        failed = sorted(k for k, v in checks.items() if not v)
        logger.warning("Bogoliubov bound checks failed: %s", failed)
    return report


def spectrum_summary(spectrum: BogoliubovSpectrum) -> Dict[str, float]:
    return {
        "E0": spectrum.E0,
        "F_bog": spectrum.F_bog,
        "N_tilde_0": spectrum.N_tilde_0,
        "N0": spectrum.base.N0,
        "mu0": spectrum.base.mu0,
        "shells": len(spectrum),
    }


def spectrum_csv(spectrum: BogoliubovSpectrum, max_rows: Optional[int] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPECTRUM_COLUMNS)
    rows = len(spectrum) if max_rows is None else min(max_rows, len(spectrum))
    for i in range(rows):
        writer.writerow([
            int(spectrum.n[i]),
            repr(float(spectrum.psq[i])),
            repr(float(spectrum.eps[i])),
            repr(float(spectrum.u[i])),
            repr(float(spectrum.v[i])),
            repr(float(spectrum.gamma_bog[i])),
            repr(float(spectrum.gamma[i])),
            repr(float(spectrum.alpha[i])),
        ])
    return buf.getvalue()
