"""
condensate.py
-------------

One-mode Φ⁴ theories of the condensate.

Continuous: |z|² = X on [0, ∞) with density ∝ exp(-β(hX² - μX)) (the polar
reduction of the measure d²z/π). Discrete: n = 0, 1, 2, … with weights
exp(-β(hn² - μn)). In both cases h = v̂(0)/(2N).

Writing a1 = βμ, a2 = βh and σ = a1/(2√a2), the continuous theory is the
truncated Gaussian y = √a2·X - σ >= -σ with weight e^{-y²}; every closed form
goes through ``common.special``. The discrete sums are evaluated either by a
direct log-sum-exp over the window where the log-concave weights are within
e^{-50} of their maximum, or, when that window is too wide, as the continuous
integral plus Euler–Maclaurin boundary corrections at n = 0.
"""

from dataclasses import dataclass
import logging
import math
from typing import Callable, Dict, NamedTuple, Optional

import numpy as np
from scipy import optimize, special

from .common.errors import AccuracyError, ConvergenceError, DomainError
from .common.special import (  # noqa: F401  (theta is part of this module's API)
    inverse_mills,
    log_erfc,
    theta,
    truncated_gaussian_expect,
    truncated_gaussian_moments,
)
from .regime import PhaseRegime

logger = logging.getLogger(__name__)

CONTINUOUS = "continuous"
DISCRETE = "discrete"

DIRECT_LIMIT = 2_000_000
WINDOW_DROP = 50.0
EM_ORDER = 6
DEFAULT_TOL = 1e-12


class Moments(NamedTuple):
    ln_partition: float
    mean: float
    var: float
    method: str
    error: float = 0.0


@dataclass(frozen=True)
class Phi4Theory:
    kind: str
    beta: float
    h: float
    mu: float
    target_mean: float
    sigma: float
    mean: float
    variance: float
    ln_partition: float
    method: str = "closed"
    residual: float = 0.0

    @property
    def sqrt_bh(self) -> float:
        return math.sqrt(self.beta * self.h)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def expect(self, fn: Callable[[np.ndarray], np.ndarray], **quad) -> complex:
        """E[fn(X)] under the continuous theory, by quadrature in y."""
        if self.kind != CONTINUOUS or self.h <= 0:
            raise DomainError("expect() needs a continuous theory with h > 0")
        s = self.sqrt_bh
        sigma = self.sigma
        return truncated_gaussian_expect(sigma, lambda y: fn((y + sigma) / s), **quad)


def coupling(vhat0: float, N: float) -> float:
    """h = v̂(0)/(2N)."""
    if vhat0 < 0 or not N > 0:
        raise DomainError(f"need vhat0 >= 0 and N > 0, got {vhat0}, {N}")
    return vhat0 / (2.0 * N)


def sigma_of(beta: float, h: float, mu: float) -> float:
    """σ = μ√(β/(4h))."""
    return mu * math.sqrt(beta / (4.0 * h))


def mu_of(beta: float, h: float, sigma: float) -> float:
    return 2.0 * sigma * math.sqrt(h / beta)


def _check(beta: float, h: float, mu: float):
    if not beta > 0 or h < 0:
        raise DomainError(f"need beta > 0 and h >= 0, got beta={beta}, h={h}")
    if h == 0 and not mu < 0:
        raise DomainError("without the quartic term the chemical potential must be negative")


# ---------------------------------------------------------------------------
# Continuous theory
# ---------------------------------------------------------------------------


def continuous_moments(beta: float, h: float, mu: float) -> Moments:
    """ln Z, mean and variance of X = |z|² under the continuous theory."""
    _check(beta, h, mu)
    if h == 0:
        m = -1.0 / (beta * mu)
        return Moments(math.log(m), m, m * m, "closed")
    a2 = beta * h
    sigma = sigma_of(beta, h, mu)
    tm = truncated_gaussian_moments(sigma)
    ln_z = sigma * sigma - 0.5 * math.log(a2) + tm.log_norm
    return Moments(ln_z, tm.shifted_mean / math.sqrt(a2), tm.var / a2, "closed")


def continuous_mean(beta: float, h: float, mu: float) -> float:
    return continuous_moments(beta, h, mu).mean


def ln_partition_continuous(beta: float, h: float, mu: float) -> float:
    return continuous_moments(beta, h, mu).ln_partition


def continuous_mean_mills(beta: float, h: float, mu: float) -> float:
    """M = μ/(2h) + g(-√2σ)/√(2βh), g the standard-normal inverse Mills ratio."""
    sigma = sigma_of(beta, h, mu)
    return mu / (2.0 * h) + inverse_mills(-math.sqrt(2.0) * sigma) / math.sqrt(2.0 * beta * h)


# ---------------------------------------------------------------------------
# Discrete theory
# ---------------------------------------------------------------------------


def _window(a1: float, a2: float, drop: float):
    """Integer range where a1·n - a2·n² is within ``drop`` of its maximum."""
    if a2 > 0 and a1 > 0:
        center = a1 / (2.0 * a2)
        half = math.sqrt(drop / a2)
        return max(0, int(math.floor(center - half))), int(math.ceil(center + half))
    hi = 2.0 * drop / (math.sqrt(a1 * a1 + 4.0 * a2 * drop) - a1)
    return 0, int(math.ceil(hi))


def _log_weight(n: np.ndarray, a1: float, a2: float) -> np.ndarray:
    if a2 > 0 and a1 > 0:
        center = a1 / (2.0 * a2)
        d = n - center
        return a1 * center / 2.0 - a2 * d * d
    return a1 * n - a2 * n * n


def _direct_moments(a1: float, a2: float, lo: int, hi: int) -> Moments:
    n = np.arange(lo, hi + 1, dtype=float)
    ell = _log_weight(n, a1, a2)
    top = float(np.max(ell))
    w = np.exp(ell - top)
    total = float(np.sum(w))

    # log-concave tails: geometric bound from the slope at each end
    tail = 0.0
    d_hi = float(_log_weight(np.array([hi + 1.0]), a1, a2)[0] - ell[-1])
    tail += math.exp(ell[-1] - top) * math.exp(d_hi) / -math.expm1(d_hi)
    if lo > 0:
        d_lo = float(_log_weight(np.array([lo - 1.0]), a1, a2)[0] - ell[0])
        tail += math.exp(ell[0] - top) * min(float(lo), math.exp(d_lo) / -math.expm1(d_lo))
    rel_tail = tail / total

    ref = float(round(0.5 * (lo + hi)))
    k = n - ref
    shift = float(np.sum(k * w)) / total
    var = float(np.sum((k - shift) ** 2 * w)) / total
    return Moments(top + math.log(total), ref + shift, var, "direct", rel_tail)


def _em_derivatives(a1: float, a2: float, order: int) -> np.ndarray:
    """m-th derivative at 0 of e^{a1 x - a2 x²}, m = 0..order."""
    out = np.zeros(order + 1)
    for m in range(order + 1):
        acc = 0.0
        for j in range(m // 2 + 1):
            acc += (-a2) ** j / math.factorial(j) * a1 ** (m - 2 * j) / math.factorial(m - 2 * j)
        out[m] = math.factorial(m) * acc
    return out


def _em_corrections(a1: float, a2: float, order: int = EM_ORDER):
    """
    Σ_{n>=0} g - ∫_0^∞ g for g_p(x) = x^p e^{a1 x - a2 x²}, p = 0, 1, 2, from
    g(0)/2 - Σ_k B_{2k}/(2k)! g^{(2k-1)}(0). Also returns the size of the
    last term kept, used as the error estimate.
    """
    bern = special.bernoulli(2 * order)
    P = _em_derivatives(a1, a2, 2 * order)
    corr = np.array([0.5, 0.0, 0.0])
    last = np.zeros(3)
    for k in range(1, order + 1):
        m = 2 * k - 1
        coeff = bern[2 * k] / math.factorial(2 * k)
        for p in range(3):
            if m < p:
                continue
            deriv = math.comb(m, p) * math.factorial(p) * P[m - p]
            term = coeff * deriv
            corr[p] -= term
            last[p] = abs(term)
    return corr, last


def _em_moments(a1: float, a2: float) -> Moments:
    sigma = a1 / (2.0 * math.sqrt(a2))
    tm = truncated_gaussian_moments(sigma)
    ln_z0 = sigma * sigma - 0.5 * math.log(a2) + tm.log_norm
    m1 = tm.shifted_mean / math.sqrt(a2)
    var_c = tm.var / a2

    corr, last = _em_corrections(a1, a2)
    scale = math.exp(-ln_z0) if ln_z0 < 700 else 0.0
    r0, r1, r2 = corr * scale
    d = (r1 - m1 * r0) / (1.0 + r0)
    var = (var_c + r2 - 2.0 * m1 * r1 + m1 * m1 * r0) / (1.0 + r0) - d * d
    error = float(np.max(last * scale / np.array([1.0, max(m1, 1.0), max(var_c, 1.0)])))
    return Moments(ln_z0 + math.log1p(r0), m1 + d, var, "euler_maclaurin", error)


def discrete_moments(
    beta: float, h: float, mu: float, tol: Optional[float] = DEFAULT_TOL
) -> Moments:
    """ln Σ_n e^{-β(hn² - μn)}, mean and variance of n."""
    _check(beta, h, mu)
    if h == 0:
        em1 = math.expm1(-beta * mu)
        mean = 1.0 / em1
        return Moments(-math.log(-math.expm1(beta * mu)), mean, mean * (1.0 + mean), "closed")

    a1, a2 = beta * mu, beta * h
    lo, hi = _window(a1, a2, WINDOW_DROP)
    if hi - lo + 1 <= DIRECT_LIMIT:
        result = _direct_moments(a1, a2, lo, hi)
    else:
        result = _em_moments(a1, a2)
    logger.debug(
        "Discrete moments via %s over [%d, %d]: error %.2e", result.method, lo, hi, result.error
    )
    if tol is not None and result.error > tol:
        raise AccuracyError(
            f"discrete Φ⁴ sum ({result.method}) error estimate {result.error:.2e} "
            f"exceeds {tol:.1e}"
        )
    return result


def discrete_mean(beta: float, h: float, mu: float) -> float:
    return discrete_moments(beta, h, mu).mean


def ln_partition_discrete(beta: float, h: float, mu: float) -> float:
    return discrete_moments(beta, h, mu).ln_partition


# ---------------------------------------------------------------------------
# Chemical-potential solvers
# ---------------------------------------------------------------------------


def _theory(kind, beta, h, mu, M, moments: Moments) -> Phi4Theory:
    sigma = sigma_of(beta, h, mu) if h > 0 else -math.inf
    residual = abs(moments.mean - M) / max(M, 1.0)
    return Phi4Theory(
        kind=kind,
        beta=beta,
        h=h,
        mu=mu,
        target_mean=M,
        sigma=sigma,
        mean=moments.mean,
        variance=moments.var,
        ln_partition=moments.ln_partition,
        method=moments.method,
        residual=residual,
    )


def _check_target(beta: float, h: float, M: float):
    if not M > 0:
        raise DomainError(f"target mean must be positive, got {M}")
    if not beta > 0 or h < 0:
        raise DomainError(f"need beta > 0 and h >= 0, got beta={beta}, h={h}")


def solve_sigma_continuous(M: float, a2: float) -> float:
    """σ with Θ(σ) = M√(π a2), i.e. continuous mean M at βh = a2."""
    target = M * math.sqrt(math.pi * a2)
    if target >= 1.0:
        lo, hi = 0.0, target / math.sqrt(math.pi) + 1.0
    else:
        lo, hi = -(math.sqrt(math.pi) / (2.0 * target)) - 1.0, 0.0
    try:
        return optimize.brentq(lambda s: theta(s) - target, lo, hi, xtol=1e-14, rtol=1e-14)
    except ValueError as exc:
        raise ConvergenceError(f"continuous σ bracket failed for M={M}: {exc}") from exc


def continuous_theory(beta: float, h: float, mu: float) -> Phi4Theory:
    """The continuous theory at a given μ, with its own mean as the target."""
    moments = continuous_moments(beta, h, mu)
    return _theory(CONTINUOUS, beta, h, mu, moments.mean, moments)


def solve_mu_continuous(beta: float, h: float, M: float, tol: float = 1e-10) -> Phi4Theory:
    _check_target(beta, h, M)
    if h == 0:
        mu = -1.0 / (beta * M)
    else:
        mu = mu_of(beta, h, solve_sigma_continuous(M, beta * h))
    theory = _theory(CONTINUOUS, beta, h, mu, M, continuous_moments(beta, h, mu))
    if theory.residual > tol:
        raise ConvergenceError(f"continuous solve residual {theory.residual:.2e}")
    logger.debug("Continuous Φ⁴: M=%.6g -> mu=%.10g sigma=%.6g", M, mu, theory.sigma)
    return theory


def solve_mu_discrete(beta: float, h: float, M: float, tol: float = 1e-10) -> Phi4Theory:
    _check_target(beta, h, M)
    if h == 0:
        mu = -math.log1p(1.0 / M) / beta
        return _theory(DISCRETE, beta, h, mu, M, discrete_moments(beta, h, mu))

    a2 = beta * h

    def excess(sig: float) -> float:
        return discrete_moments(beta, h, mu_of(beta, h, sig), tol=None).mean - M

    start = solve_sigma_continuous(M, a2)
    lo = hi = start
    step = 1e-3 * (1.0 + abs(start))
    for _ in range(200):
        if excess(lo) <= 0:
            break
        lo -= step
        step *= 2.0
    step = 1e-3 * (1.0 + abs(start))
    for _ in range(200):
        if excess(hi) >= 0:
            break
        hi += step
        step *= 2.0
    if lo == hi:
        sig = lo
    else:
        try:
            sig = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)
        except ValueError as exc:
            raise ConvergenceError(f"discrete σ bracket failed for M={M}: {exc}") from exc
    mu = mu_of(beta, h, sig)
    theory = _theory(DISCRETE, beta, h, mu, M, discrete_moments(beta, h, mu))
    if theory.residual > tol:
        raise ConvergenceError(f"discrete solve residual {theory.residual:.2e}")
    logger.debug("Discrete Φ⁴: M=%.6g -> mu=%.10g (%s)", M, mu, theory.method)
    return theory


def solve_mu(kind: str, beta: float, h: float, M: float, tol: float = 1e-10) -> Phi4Theory:
    if kind in (CONTINUOUS, "cont"):
        return solve_mu_continuous(beta, h, M, tol)
    if kind in (DISCRETE, "disc"):
        return solve_mu_discrete(beta, h, M, tol)
    raise DomainError(f"unknown theory kind {kind!r}")


# ---------------------------------------------------------------------------
# Variance and free energies
# ---------------------------------------------------------------------------


def variance_continuous(theory: Phi4Theory) -> float:
    if theory.kind != CONTINUOUS:
        raise DomainError("variance_continuous needs a continuous theory")
    return continuous_moments(theory.beta, theory.h, theory.mu).var


def free_energy(theory: Phi4Theory) -> float:
    """-β⁻¹ ln Z + μM - hM² at the solved mean."""
    M = theory.mean
    return -theory.ln_partition / theory.beta + theory.mu * M - theory.h * M * M


def free_energy_interacting(beta: float, N: float, vhat0: float) -> float:
    """(1/2β) ln(v̂(0)β/(2πN)), the M >> N^{5/6} limit."""
    return 0.5 / beta * math.log(vhat0 * beta / (2.0 * math.pi * N))


def free_energy_ideal_condensate(beta: float, M: float) -> float:
    """β⁻¹ ln(1 - e^{βμ}) + μM with e^{βμ} = M/(1+M); ≈ -β⁻¹ ln M - β⁻¹."""
    return -(math.log1p(M) + M * math.log1p(1.0 / M)) / beta


def free_energy_asymptotic(
    beta: float,
    N: float,
    M: float,
    vhat0: float,
    tracker: Optional[PhaseRegime] = None,
    regime_eps: float = 0.05,
) -> Dict[str, float]:
    """
    Leading-order condensate free energy for the regime of M against
    N^{5/6 ± ε}. In the crossover band the continuous theory is solved at
    the given M and its exact free energy is returned.
    """
    tracker = tracker or PhaseRegime(regime_eps=regime_eps)
    decision = tracker.classify_condensate(M, N)
    label = decision["regime"]
    if label == PhaseRegime.INTERACTING:
        value = free_energy_interacting(beta, N, vhat0)
    elif label == PhaseRegime.NON_INTERACTING:
        value = free_energy_ideal_condensate(beta, M)
    else:
        value = free_energy(solve_mu_continuous(beta, coupling(vhat0, N), M))
    return {"value": value, "regime": label, "exponent": decision["exponent"]}


# ---------------------------------------------------------------------------
# Moment generating function of the centred condensate number
# ---------------------------------------------------------------------------


def mgf_abs_centered(theory: Phi4Theory, lam: float) -> float:
    """E exp(λ|X - E X|/std X) under the continuous theory."""
    if theory.kind != CONTINUOUS or theory.h <= 0:
        raise DomainError("mgf_abs_centered needs a continuous theory with h > 0")
    tm = truncated_gaussian_moments(theory.sigma)
    A, B = tm.mean, math.sqrt(tm.var)
    return float(np.real(truncated_gaussian_expect(
        theory.sigma, lambda y: np.exp(lam * np.abs(y - A) / B), panels=48
    )))


def mgf_limit(regime: str, lam: float, sigma: Optional[float] = None) -> float:
    """
    N → ∞ limit of ``mgf_abs_centered``: standard normal for M >> N^{5/6},
    truncated Gaussian at fixed σ for M ~ N^{5/6}, and the shifted
    exponential e^{-(1+x)} on [-1, ∞) for M << N^{5/6} (needs λ < 1).
    """
    if regime in (PhaseRegime.LAW_NORMAL, PhaseRegime.INTERACTING):
        return float(special.erfcx(-lam / math.sqrt(2.0)))
    if regime in (PhaseRegime.LAW_TRUNCATED, PhaseRegime.CROSSOVER):
        if sigma is None:
            raise DomainError("the truncated-Gaussian limit needs sigma")
        tm = truncated_gaussian_moments(sigma)
        A, B = tm.mean, math.sqrt(tm.var)
        return float(np.real(truncated_gaussian_expect(
            sigma, lambda y: np.exp(lam * np.abs(y - A) / B), panels=48
        )))
    if regime in (PhaseRegime.LAW_EXPONENTIAL, PhaseRegime.NON_INTERACTING):
        if not lam < 1:
            raise DomainError("the exponential limit is finite only for lambda < 1")
        return (math.exp(lam) * -math.expm1(-(1.0 + lam)) / (1.0 + lam)
                + math.exp(-1.0) / (1.0 - lam))
    raise DomainError(f"no MGF limit for regime {regime!r}")


# ---------------------------------------------------------------------------
# Sampling and diagnostics
# ---------------------------------------------------------------------------


def _truncated_tail_inverse(s: float, u: np.ndarray) -> np.ndarray:
    """w >= 0 with erfc(s + w) = u·erfc(s), s > 0, by Newton on ln erfc."""
    target = np.log(u) + log_erfc(s)
    w = -np.log(u) / (2.0 * s + 1.0 / s)
    for _ in range(60):
        t = s + w
        step = (log_erfc(t) - target) / (-2.0 / (math.sqrt(math.pi) * special.erfcx(t)))
        w_new = np.maximum(w - step, 0.5 * w)
        if np.max(np.abs(w_new - w)) <= 1e-15 * (1.0 + np.max(w)):
            w = w_new
            break
        w = w_new
    return w


def sample_shifted_truncated(sigma: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of y + σ >= 0 where y has density ∝ e^{-y²} on [-σ, ∞)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    u = rng.random(count)
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    if sigma >= 0:
        # P(y > t) = erfc(t)/erfc(-σ)
        y = special.erfcinv(u * special.erfc(-sigma))
        return np.maximum(y + sigma, 0.0)
    return _truncated_tail_inverse(-sigma, u)


def sample_truncated_gaussian(
    theory: Phi4Theory, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draws of X = |z|² from the continuous theory by inverse CDF."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if theory.h == 0:
        return rng.exponential(theory.mean, size=count)
    return sample_shifted_truncated(theory.sigma, count, rng) / theory.sqrt_bh


def small_condensate_mu_ratio(theory: Phi4Theory, N: float, eps: float = 0.05) -> float:
    """|μ + 1/(βM)|·βM·N^{2ε}, bounded for M <= N^{5/6-ε}."""
    bm = theory.beta * theory.mean
    return abs(theory.mu * bm + 1.0) * N ** (2.0 * eps)


def variational_check(
    theory: Phi4Theory,
    count: int = 100,
    rng: Optional[np.random.Generator] = None,
    scale: float = 0.1,
) -> Dict[str, float]:
    """
    Random mean-preserving perturbations p of the discrete Gibbs law p* never
    lower Σ p_n h n² + β⁻¹ Σ p_n ln p_n.
    """
    if theory.kind != DISCRETE:
        raise DomainError("variational_check needs a discrete theory")
    rng = rng or np.random.default_rng(0)
    a1, a2 = theory.beta * theory.mu, theory.beta * theory.h
    lo, hi = _window(a1, a2, WINDOW_DROP)
    if hi - lo + 1 > 200_000:
        raise DomainError("variational_check is meant for narrow discrete laws")
    n = np.arange(lo, hi + 1, dtype=float)
    ell = _log_weight(n, a1, a2)
    p_star = np.exp(ell - np.max(ell))
    p_star /= p_star.sum()

    def functional(p: np.ndarray) -> float:
        pos = p > 0
        return float(np.sum(p * theory.h * n * n) + np.sum(p[pos] * np.log(p[pos])) / theory.beta)

    basis = np.vstack([np.ones_like(n), n - n.mean()])
    q, _ = np.linalg.qr(basis.T)
    base = functional(p_star)
    worst = math.inf
    violations = 0
    for _ in range(count):
        d = rng.standard_normal(len(n)) * p_star
        d -= q @ (q.T @ d)
        neg = d < 0
        room = np.min(p_star[neg] / -d[neg]) if neg.any() else 1.0
        p = p_star + min(scale, room) * d
        gap = functional(p) - base
        worst = min(worst, gap)
        if gap < -1e-12 * max(abs(base), 1.0):
            violations += 1
    return {"F_star": base, "worst_gap": worst, "violations": violations, "count": count}
