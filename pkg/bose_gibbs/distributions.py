"""
distributions.py
----------------

Condensate particle-number distributions:

* the Gaussian g of the coherent-state condensate density for N0 >> N^{5/6};
* the four limit laws of the centred and rescaled condensate number
  (standard normal, truncated Gaussian f_{σ,A,B}, shifted exponential,
  geometric);
* randomized Poisson laws, Poisson(X) with the rate X = |z|² drawn from a
  continuous Φ⁴ theory, with their pmf and characteristic function;
* seeded samplers and the KS / histogram-L¹ distances used by the Monte
  Carlo checks.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy import stats

from .common.errors import AccuracyError, DomainError
from .common.special import (
    log_erfc,
    support_window,
    truncated_gaussian_expect,
    truncated_gaussian_moments,
)
from .condensate import (
    CONTINUOUS,
    Phi4Theory,
    coupling,
    sample_shifted_truncated,
    sample_truncated_gaussian,
    solve_sigma_continuous,
)
from .regime import PhaseRegime

logger = logging.getLogger(__name__)

NORMAL = PhaseRegime.LAW_NORMAL
TRUNCATED = PhaseRegime.LAW_TRUNCATED
EXPONENTIAL = PhaseRegime.LAW_EXPONENTIAL
GEOMETRIC = PhaseRegime.LAW_GEOMETRIC

# radians of phase per Gauss–Legendre panel (48 nodes) in oscillatory integrals
PHASE_PER_PANEL = 8.0


def _panels(t_max: float, width: float, scale: float, floor: int = 24) -> int:
    """Panels needed so exp(i t (y - A)/scale) turns by <= PHASE_PER_PANEL per panel."""
    return max(floor, int(math.ceil(abs(t_max) * width / (scale * PHASE_PER_PANEL))))


# ---------------------------------------------------------------------------
# Limit laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitLaw:
    """
    Law of the centred, rescaled condensate number in one asymptotic regime.

    Args:
        kind: one of NORMAL, TRUNCATED, EXPONENTIAL, GEOMETRIC
        sigma, A, B: truncated-Gaussian parameters; the law is that of
            (y - A)/B with y ∝ e^{-y²} on [-σ, ∞)
        rate: e^{βμ0} of the geometric law q(n) = rate^n (1 - rate)
        t: N0/N^{5/6} when the law was built from a crossover state
    """

    kind: str
    sigma: Optional[float] = None
    A: Optional[float] = None
    B: Optional[float] = None
    log_norm: Optional[float] = None
    rate: Optional[float] = None
    t: Optional[float] = None

    @property
    def is_discrete(self) -> bool:
        return self.kind == GEOMETRIC

    def _frozen(self):
        if self.kind == NORMAL:
            return stats.norm()
        if self.kind == EXPONENTIAL:
            return stats.expon(loc=-1.0)
        if self.kind == GEOMETRIC:
            # scipy's geom counts trials, so shift to failures n = 0, 1, ...
            return stats.geom(1.0 - self.rate, loc=-1)
        return None

    def pdf(self, x):
        if self.is_discrete:
            raise DomainError("the geometric law has a pmf, not a density")
        if self.kind == TRUNCATED:
            x = np.asarray(x, dtype=float)
            y = self.A + self.B * x
            out = np.where(
                y >= -self.sigma,
                self.B * np.exp(-(y * y) - self.log_norm),
                0.0,
            )
            return out if out.ndim else float(out)
        return self._frozen().pdf(x)

    def pmf(self, n):
        if not self.is_discrete:
            raise DomainError(f"the {self.kind} law has a density, not a pmf")
        return self._frozen().pmf(n)

    def cdf(self, x):
        if self.kind == TRUNCATED:
            x = np.asarray(x, dtype=float)
            y = self.A + self.B * x
            inside = y > -self.sigma
            out = np.zeros_like(y)
            if np.any(inside):
                # P(Y <= y) = 1 - erfc(y)/erfc(-σ)
                out[inside] = -np.expm1(
                    np.asarray(log_erfc(y[inside])) - log_erfc(-self.sigma)
                )
            return out if out.ndim else float(out)
        return self._frozen().cdf(x)

    def mean(self) -> float:
        if self.is_discrete:
            return self.rate / (1.0 - self.rate)
        return 0.0

    def var(self) -> float:
        if self.is_discrete:
            return self.rate / (1.0 - self.rate) ** 2
        return 1.0

    def charfun(self, t):
        """Characteristic function E e^{itZ}, vectorised over t."""
        t = np.asarray(t, dtype=float)
        if self.kind == NORMAL:
            out = np.exp(-0.5 * t * t) + 0j
        elif self.kind == EXPONENTIAL:
            out = np.exp(-1j * t) / (1.0 - 1j * t)
        elif self.kind == GEOMETRIC:
            out = (1.0 - self.rate) / (1.0 - self.rate * np.exp(1j * t))
        else:
            out = _truncated_charfun(self.sigma, self.A, self.B, t)
        return out if out.ndim else complex(out)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if count < 1:
            raise DomainError("count must be >= 1")
        if self.kind == NORMAL:
            return rng.standard_normal(count)
        if self.kind == EXPONENTIAL:
            return rng.exponential(1.0, size=count) - 1.0
        if self.kind == GEOMETRIC:
            return rng.geometric(1.0 - self.rate, size=count) - 1
        y = sample_shifted_truncated(self.sigma, count, rng) - self.sigma
        return (y - self.A) / self.B

    def params(self) -> Dict[str, Optional[float]]:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "A": self.A,
            "B": self.B,
            "rate": self.rate,
            "t": self.t,
        }


def truncated_law(sigma: float, t: Optional[float] = None) -> LimitLaw:
    """f_{σ,A,B}: the law of (y - A)/B with A, B the mean and std of y."""
    tm = truncated_gaussian_moments(sigma)
    return LimitLaw(
        kind=TRUNCATED,
        sigma=sigma,
        A=tm.mean,
        B=math.sqrt(tm.var),
        log_norm=tm.log_norm,
        t=t,
    )


def geometric_law(rate: float) -> LimitLaw:
    if not 0.0 <= rate < 1.0:
        raise DomainError(f"geometric rate must lie in [0, 1), got {rate}")
    return LimitLaw(kind=GEOMETRIC, rate=rate)


def limit_law(
    beta: float,
    N: float,
    N0: float,
    vhat0: float = 1.0,
    tracker: Optional[PhaseRegime] = None,
) -> LimitLaw:
    """
    Limit law of the condensate number for the regime N0 sits in.

    N0 >> N^{5/6} gives the standard normal, N0 ~ N^{5/6} the truncated
    Gaussian at the σ that solves the continuous mean equation, 1 << N0 <<
    N^{5/6} the shifted exponential and bounded N0 the geometric law with
    e^{βμ0} = N0/(1 + N0). The (t, σ) pair of the crossover case is logged and
    kept on the law.
    """
    if not beta > 0 or not N > 0 or not N0 > 0:
        raise DomainError(f"need beta, N, N0 > 0, got {beta}, {N}, {N0}")
    tracker = tracker or PhaseRegime()
    kind = tracker.classify_limit_law(N0, N)["regime"]

    if kind == NORMAL:
        return LimitLaw(kind=NORMAL)
    if kind == EXPONENTIAL:
        return LimitLaw(kind=EXPONENTIAL)
    if kind == GEOMETRIC:
        return geometric_law(N0 / (1.0 + N0))

    h = coupling(vhat0, N)
    sigma = solve_sigma_continuous(N0, beta * h)
    t = N0 / N ** PhaseRegime.CONDENSATE_EXPONENT
    logger.info("Crossover law at N=%.3g: t=%.6g sigma=%.6g", N, t, sigma)
    return truncated_law(sigma, t=t)


def _truncated_charfun(sigma: float, A: float, B: float, t: np.ndarray) -> np.ndarray:
    a, b, _ = support_window(sigma)
    flat = np.atleast_1d(t)
    panels = _panels(np.max(np.abs(flat)) if flat.size else 0.0, b - a, B)
    out = truncated_gaussian_expect(
        sigma,
        lambda y: np.exp(1j * np.outer(flat, (y - A) / B)),
        panels=panels,
    )
    return out.reshape(np.shape(t))


def charfun_truncated_gaussian(theory: Phi4Theory, t, tol: float = 1e-10):
    """
    φ(t) = E exp(it (X - E X)/std X) under a solved continuous theory.

    Written in y = √(βh)X - σ this is E exp(it(y - A)/B), a smooth 1-D
    integral over the truncated Gaussian. Raises AccuracyError when the
    quadrature loses φ(0) = 1 or |φ| <= 1.
    """
    if theory.kind != CONTINUOUS or theory.h <= 0:
        raise DomainError("charfun_truncated_gaussian needs a continuous theory with h > 0")
    tm = truncated_gaussian_moments(theory.sigma)
    B = math.sqrt(tm.var)
    t_arr = np.asarray(t, dtype=float)
    nodes = np.append(np.atleast_1d(t_arr).ravel(), 0.0)
    values = _truncated_charfun(theory.sigma, tm.mean, B, nodes)
    if abs(values[-1] - 1.0) > tol or np.any(np.abs(values) > 1.0 + tol):
        raise AccuracyError(
            f"characteristic function quadrature off by {abs(values[-1] - 1.0):.2e}"
        )
    out = values[:-1].reshape(t_arr.shape)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# Randomized Poisson laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointMass:
    """Deterministic rate X = value."""

    value: float

    @property
    def mean(self) -> float:
        return self.value

    @property
    def variance(self) -> float:
        return 0.0

    def expect(self, fn: Callable[[np.ndarray], np.ndarray], **_quad):
        return np.asarray(fn(np.array([self.value])))[..., 0]


Mixing = Union[Phi4Theory, PointMass]


@dataclass(frozen=True)
class RandomizedPoisson:
    """
    Y ~ Poisson(X) with X drawn from ``mixing``, so
    P(Y = n) = E[X^n e^{-X}]/n!.
    """

    mixing: Mixing
    panels: int = field(default=48)

    def _expect(self, fn, panels: Optional[int] = None):
        return self.mixing.expect(fn, panels=panels or self.panels)

    @property
    def center(self) -> float:
        """Ñ0, the mean of the mixing law."""
        return self.mixing.mean

    @property
    def scale(self) -> float:
        """√Var of the mixing law, the rescaling of the centred condensate number."""
        return math.sqrt(self.mixing.variance)

    def pmf(self, n):
        n = np.atleast_1d(np.asarray(n))
        if np.any(n < 0):
            raise DomainError("pmf is supported on n >= 0")
        vals = self._expect(lambda x: stats.poisson.pmf(n[:, None], x[None, :]))
        return np.real(np.asarray(vals)).reshape(n.shape)

    def mean(self) -> float:
        return self.mixing.mean

    def variance(self) -> float:
        """E[X] + Var[X] by the law of total variance."""
        return self.mixing.mean + self.mixing.variance

    def charfun(self, t, center: Optional[float] = None, scale: Optional[float] = None):
        """
        φ(t) of (Y - m)/σ_s: E[exp(X(e^{it/σ_s} - 1))]·e^{-itm/σ_s}.

        ``center`` and ``scale`` default to the mixing mean and std.
        """
        m = self.center if center is None else center
        s = self.scale if scale is None else scale
        if not s > 0:
            raise DomainError("scale must be positive")
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr).ravel()
        factor = np.expm1(1j * flat / s)
        panels = self.panels
        if isinstance(self.mixing, Phi4Theory):
            a, b, _ = support_window(self.mixing.sigma)
            tm = truncated_gaussian_moments(self.mixing.sigma)
            panels = _panels(np.max(np.abs(flat)), b - a, math.sqrt(tm.var), self.panels)
        vals = self._expect(lambda x: np.exp(np.outer(factor, x)), panels=panels)
        out = np.asarray(vals) * np.exp(-1j * flat * m / s)
        out = out.reshape(t_arr.shape)
        return out if out.ndim else complex(out)

    def sample_rates(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if isinstance(self.mixing, PointMass):
            return np.full(count, float(self.mixing.value))
        return sample_truncated_gaussian(self.mixing, count, rng)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if count < 1:
            raise DomainError("count must be >= 1")
        return rng.poisson(self.sample_rates(count, rng))


def randomized_poisson_charfun(
    rp: RandomizedPoisson, t, center: Optional[float] = None, scale: Optional[float] = None
):
    return rp.charfun(t, center=center, scale=scale)


def charfun_transfer_gap(rp: RandomizedPoisson, t) -> np.ndarray:
    """|φ_Ỹ(t) - φ_X̃(t)| between the randomized Poisson and its mixing law."""
    if not isinstance(rp.mixing, Phi4Theory):
        raise DomainError("the transfer gap needs a continuous mixing theory")
    return np.abs(rp.charfun(t) - charfun_truncated_gaussian(rp.mixing, t))


# ---------------------------------------------------------------------------
# Condensate Gaussian and distances
# ---------------------------------------------------------------------------


def gaussian_density(x, beta: float, N: float, vhat0: float, center: float):
    """g(x) with mean ``center`` (see ``gaussian_center``) and variance N/(βv̂0)."""
    if not vhat0 > 0:
        raise DomainError("the condensate Gaussian needs vhat0 > 0")
    k = beta * vhat0 / N
    x = np.asarray(x, dtype=float)
    return np.sqrt(k / (2.0 * math.pi)) * np.exp(-0.5 * k * (x - center) ** 2)


def gaussian_center(spectrum, center: str = "tilde") -> float:
    """Ñ0 (``"tilde"``, default) or the ideal-gas N0 (``"ideal"``) of a spectrum."""
    if center == "tilde":
        return float(spectrum.N_tilde_0)
    if center == "ideal":
        return float(spectrum.base.N0)
    raise DomainError(f"center must be 'tilde' or 'ideal', got {center!r}")


def l1_histogram_distance(
    samples: np.ndarray,
    density: Callable[[np.ndarray], np.ndarray],
    bins: int = 200,
    value_range: Optional[tuple] = None,
) -> float:
    """
    ∫|ĥ - f| over a fixed binning, with ĥ the normalised histogram; sample
    mass outside ``value_range`` counts fully.
    """
    samples = np.asarray(samples, dtype=float)
    if value_range is None:
        value_range = (float(samples.min()), float(samples.max()))
    counts, edges = np.histogram(samples, bins=bins, range=value_range)
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    hist = counts / (len(samples) * widths)
    inside = float(np.sum(np.abs(hist - density(mids)) * widths))
    outside = 1.0 - counts.sum() / len(samples)
    return inside + outside


def _discrete_ks(samples: np.ndarray, cdf: Callable) -> float:
    values, counts = np.unique(np.asarray(samples).astype(np.int64), return_counts=True)
    ecdf = np.cumsum(counts) / counts.sum()
    before = np.concatenate(([0.0], ecdf[:-1]))
    at = np.abs(ecdf - cdf(values))
    left = np.abs(before - cdf(values - 1))
    return float(max(np.max(at), np.max(left)))


def ks_distance(samples: np.ndarray, law: Union[LimitLaw, Callable]) -> float:
    """
    sup |F_n - F| against an exact CDF. Continuous laws go through
    ``scipy.stats.kstest``; the geometric law uses its step CDF at the jump
    points and just before them.
    """
    if isinstance(law, LimitLaw):
        if law.is_discrete:
            return _discrete_ks(samples, law.cdf)
        return float(stats.kstest(samples, law.cdf).statistic)
    return float(stats.kstest(samples, law).statistic)


# ---------------------------------------------------------------------------
# Sampling front end
# ---------------------------------------------------------------------------


@dataclass
class SampleSummary:
    samples: np.ndarray
    mean: float
    var: float
    stderr: float
    ks: Optional[float]
    seed: int
    law: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {
            "count": int(len(self.samples)),
            "mean": self.mean,
            "var": self.var,
            "stderr": self.stderr,
            "ks": self.ks,
            "seed": self.seed,
            "law_params": self.law,
        }


def sample(
    source: Union[LimitLaw, RandomizedPoisson],
    count: int,
    seed: int,
    reference: Optional[LimitLaw] = None,
    standardize: Optional[bool] = None,
) -> SampleSummary:
    """
    Seeded draws with summary statistics.

    A RandomizedPoisson source is standardised as (Y - Ñ0)/√Var when compared
    with a continuous reference law, and left as counts otherwise.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(seed)
    draws = source.sample(count, rng)

    if isinstance(source, LimitLaw):
        reference = reference or source
    elif standardize is None:
        standardize = reference is not None and not reference.is_discrete
    if standardize and isinstance(source, RandomizedPoisson):
        draws = (draws - source.center) / source.scale

    values = np.asarray(draws, dtype=float)
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1)) if count > 1 else 0.0
    ks = ks_distance(draws, reference) if reference is not None else None
    logger.debug("Sampled %d draws (seed %d): mean=%.6g var=%.6g ks=%s", count, seed, mean, var, ks)
    return SampleSummary(
        samples=draws,
        mean=mean,
        var=var,
        stderr=math.sqrt(var / count),
        ks=ks,
        seed=seed,
        law=reference.params() if reference is not None else None,
    )


# ---------------------------------------------------------------------------
# Variance limits of the condensate law
# ---------------------------------------------------------------------------


def variance_limit_ratio(theory: Phi4Theory, N: float, vhat0: float, regime: str) -> float:
    """
    Variance of the continuous theory against its large-N limit: βv̂0 Var/N
    → 1 for N0 >> N^{5/6}, βv̂0 Var/(2N) → B² at fixed σ, Var/M² → 1 for
    N0 << N^{5/6}. The returned ratio tends to 1.
    """
    var = theory.variance
    if regime in (NORMAL, PhaseRegime.INTERACTING):
        return theory.beta * vhat0 * var / N
    if regime in (TRUNCATED, PhaseRegime.CROSSOVER):
        B2 = truncated_gaussian_moments(theory.sigma).var
        return theory.beta * vhat0 * var / (2.0 * N) / B2
    if regime in (EXPONENTIAL, PhaseRegime.NON_INTERACTING):
        return var / theory.mean ** 2
    raise DomainError(f"no variance limit for regime {regime!r}")
