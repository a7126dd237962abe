"""
common/special.py
-----------------

Special functions shared by the ideal-gas, condensate and distribution code.

The one-mode Φ⁴ theory reduces, in the variable ``y = sqrt(beta*h)*(x - mu/(2h))``,
to a Gaussian ``exp(-y**2)`` restricted to ``y >= -sigma``. Every closed form
below is written through ``scipy.special.erfcx`` so nothing overflows for the
shifts |σ| ~ N^{1/6} that show up at physical particle numbers. For strongly
negative shifts the closed forms cancel, and the moments are taken from a
Gauss–Laguerre rule in the variable ``x = 2 s (y - s)``, ``s = -sigma``.
"""

from functools import lru_cache
import math
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import special

SQRT_PI = math.sqrt(math.pi)
LOG_HALF_SQRT_PI = math.log(SQRT_PI / 2.0)

# Below this shift the erfcx closed forms lose more than ~3 digits.
LAGUERRE_SHIFT = -4.0
LAGUERRE_ORDER = 96


class TruncatedMoments(NamedTuple):
    """Moments of the density ``exp(-y**2)`` on ``[-sigma, inf)``."""

    log_norm: float
    mean: float
    var: float
    shifted_mean: float  # E[y + sigma], free of cancellation


@lru_cache(maxsize=None)
def zeta_three_halves(terms: int = 64, corrections: int = 6) -> float:
    """
    Riemann zeta at 3/2 by a direct partial sum plus an Euler–Maclaurin tail.

    Parameters
    ----------
    terms : int
        The partial sum runs over ``n < terms``; the tail starts at ``terms``.
    corrections : int
        Number of Bernoulli correction terms in the tail.
    """
    s = 1.5
    n = np.arange(1, terms, dtype=float)
    head = math.fsum(n ** -s)

    a = float(terms)
    tail = a ** (1.0 - s) / (s - 1.0) + 0.5 * a ** -s
    bern = special.bernoulli(2 * corrections)
    for k in range(1, corrections + 1):
        order = 2 * k - 1
        # d^m/dx^m x^{-s} = (-1)^m (s)_m x^{-s-m}
        deriv = (-1.0) ** order * special.poch(s, order) * a ** (-s - order)
        tail -= bern[2 * k] / math.factorial(2 * k) * deriv
    return head + tail


@lru_cache(maxsize=4)
def laguerre_rule(order: int = LAGUERRE_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_laguerre(order)
    return nodes, weights


@lru_cache(maxsize=8)
def legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    return nodes, weights


def _laguerre_moments(s: float) -> TruncatedMoments:
    x, w = laguerre_rule()
    f = w * np.exp(-x * x / (4.0 * s * s))
    z = f.sum()
    m1 = float((f * x).sum() / z)
    m2c = float((f * (x - m1) ** 2).sum() / z)
    log_norm = -s * s - math.log(2.0 * s) + math.log(z)
    shifted = m1 / (2.0 * s)
    return TruncatedMoments(log_norm, s + shifted, m2c / (4.0 * s * s), shifted)


def truncated_gaussian_moments(sigma: float) -> TruncatedMoments:
    """
    Normalisation, mean ``A`` and variance ``B**2`` of ``exp(-y**2)`` on
    ``[-sigma, inf)``.

    ``A = 1/(sqrt(pi) erfcx(-sigma))`` and ``E[y**2] = 1/2 - sigma*A``.
    """
    sigma = float(sigma)
    if sigma >= 0.0:
        erfc_neg = float(special.erfc(-sigma))  # in [1, 2]
        mean = math.exp(-sigma * sigma) / (SQRT_PI * erfc_neg)
        var = 0.5 - sigma * mean - mean * mean
        return TruncatedMoments(
            LOG_HALF_SQRT_PI + math.log(erfc_neg), mean, var, mean + sigma
        )
    if sigma >= LAGUERRE_SHIFT:
        s = -sigma
        ex = float(special.erfcx(s))
        mean = 1.0 / (SQRT_PI * ex)
        var = 0.5 - sigma * mean - mean * mean
        return TruncatedMoments(
            LOG_HALF_SQRT_PI + math.log(ex) - s * s, mean, var, mean + sigma
        )
    return _laguerre_moments(-sigma)


def theta(x: float) -> float:
    """
    ``Θ(x) = (1 + sqrt(pi) x e^{x^2} erfc(-x)) / (e^{x^2} erfc(-x))``.

    Equivalently ``1/erfcx(-x) + sqrt(pi) x``, which is ``sqrt(pi)`` times the
    shifted mean of the truncated Gaussian. Positive and strictly increasing.
    """
    return SQRT_PI * truncated_gaussian_moments(x).shifted_mean


def inverse_mills(u: float) -> float:
    """Standard-normal hazard ``phi(u)/(1 - Phi(u))``, overflow free."""
    return math.sqrt(2.0 / math.pi) / float(special.erfcx(u / math.sqrt(2.0)))


def log_erfc(t):
    """``ln erfc(t)`` for scalars or arrays, accurate far into the right tail."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t > 0
    out[pos] = np.log(special.erfcx(t[pos])) - t[pos] ** 2
    out[~pos] = np.log(special.erfc(t[~pos]))
    return out if out.ndim else float(out)


def support_window(sigma: float) -> Tuple[float, float, float]:
    """Integration window outside which the truncated weight is below e^-80."""
    start = -sigma
    if start > 0.0:
        return start, start + min(9.0, 40.0 / start), start
    return max(start, -9.0), 9.0, 0.0


def _gauss_legendre(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    panels: int,
    order: int,
):
    if b <= a:
        return 0.0
    nodes, weights = legendre_rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    y = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return np.sum(w * fn(y), axis=-1)


def truncated_gaussian_expect(
    sigma: float,
    fn: Callable[[np.ndarray], np.ndarray],
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    panels: int = 24,
    order: int = 48,
):
    """
    ``E[fn(y); lo <= y <= hi]`` for ``y`` with density ∝ ``exp(-y**2)`` on
    ``[-sigma, inf)``.

    Composite Gauss–Legendre on the window that carries all but ``e^-80`` of
    the mass (``support_window``). The weight is scaled by ``exp(ref**2)`` so
    it never underflows at large negative shifts. ``fn`` may return complex
    values, and may return a stacked ``(..., len(y))`` array to get several
    expectations at once.
    """
    a, b, ref = support_window(sigma)

    def weight(y):
        return np.exp((ref - y) * (ref + y))

    norm = _gauss_legendre(weight, a, b, panels, order)
    lo_ = a if lo is None else max(a, lo)
    hi_ = b if hi is None else min(b, hi)
    num = _gauss_legendre(lambda y: weight(y) * fn(y), lo_, hi_, panels, order)
    return num / norm
