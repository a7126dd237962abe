"""
lattice.py
----------

Momentum lattice Λ* = 2πℤ³ of the unit torus, grouped into shells of equal
kinetic energy p² = 4π²·n with multiplicity r3(n), and the regularised sums
over it.

A triple sum over ℤ³ becomes a single sum over integer shells n = |z|²; the
multiplicities come from an exact convolution of the one-dimensional square
indicator. Sums over a truncated table carry a certified bound on the
discarded tail, from the integral comparison

    Σ_{|z| ≥ R} e^{-a|z|²} ≤ ∫_{s ≥ R-√3} 4π (s + √3/2)² e^{-a s²} ds,

and raise ``AccuracyError`` when the bound exceeds the requested tolerance.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import csv
import io
import logging
import math
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import signal, special

from .common.errors import AccuracyError, DomainError, ResourceError

logger = logging.getLogger(__name__)

FOUR_PI_SQ = 4.0 * math.pi ** 2
HALF_DIAGONAL = math.sqrt(3.0) / 2.0
DEFAULT_SHELL_LIMIT = 20_000_000
DEFAULT_START_N = 64
DEFAULT_TAIL_TOL = 1e-12
LN2 = math.log(2.0)

# Prefactors c with  term(x) <= c * e^{-x}  for x >= ln 2.
_BOSE_PREFACTOR = 2.0
_SINH2_PREFACTOR = 4.0
_LOG_PREFACTOR = 2.0


@lru_cache(maxsize=8)
def r3_counts(n_max: int) -> np.ndarray:
    """
    Number of z ∈ ℤ³ with |z|² = n, for 0 <= n <= n_max.

    Large tables use FFT convolution; the rounded result is verified against
    an exact integer count of lattice points in the ball.
    """
    root = math.isqrt(n_max)
    r1 = np.zeros(n_max + 1, dtype=np.int64)
    r1[0] = 1
    k = np.arange(1, root + 1)
    r1[k * k] = 2

    if n_max < 4096:
        r2 = np.convolve(r1, r1)[: n_max + 1]
        r3 = np.convolve(r2, r1)[: n_max + 1]
        return r3

    r2 = np.rint(signal.fftconvolve(r1, r1)[: n_max + 1]).astype(np.int64)
    r3 = np.rint(signal.fftconvolve(r2, r1)[: n_max + 1]).astype(np.int64)

    # exact check: #{|z|² <= n_max} = Σ_m r2(m) (2⌊√(n_max - m)⌋ + 1)
    rem = n_max - np.arange(n_max + 1, dtype=np.int64)
    s = np.floor(np.sqrt(rem.astype(float))).astype(np.int64)
    s = np.where((s + 1) * (s + 1) <= rem, s + 1, s)
    s = np.where(s * s > rem, s - 1, s)
    ball = int(np.sum(r2 * (2 * s + 1)))
    if ball != int(r3.sum()):
        raise AccuracyError(
            f"shell multiplicities failed the ball count at n_max={n_max}"
        )
    return r3


@lru_cache(maxsize=4096)
def representative(n: int) -> Optional[Tuple[int, int, int]]:
    """One lattice vector (x >= y >= z >= 0) with x² + y² + z² = n, or None."""
    for x in range(math.isqrt(n), -1, -1):
        rem = n - x * x
        if 3 * x * x < n:
            break
        for y in range(min(x, math.isqrt(rem)), -1, -1):
            r = rem - y * y
            if 2 * y * y < rem:
                break
            z = math.isqrt(r)
            if z * z == r and z <= y:
                return (x, y, z)
    return None


@dataclass(frozen=True)
class MomentumShell:
    n: int
    psq: float
    multiplicity: int
    representative: Tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class ShellTable:
    """
    Non-empty shells in ascending order.

    ``truncated`` tables stand for all of Λ* cut at ``cutoff_n`` and carry
    tail certificates; untruncated tables are finite mode sets (used for the
    degenerate one- and two-shell checks) whose sums are exact.
    """

    n: np.ndarray
    multiplicity: np.ndarray
    cutoff_n: int
    truncated: bool = True
    tail_bound: float = 0.0
    built_for: Optional[Tuple[float, float]] = None

    @property
    def psq(self) -> np.ndarray:
        return FOUR_PI_SQ * self.n

    @property
    def cutoff_psq(self) -> float:
        return FOUR_PI_SQ * self.cutoff_n

    @property
    def shells(self) -> List[MomentumShell]:
        return [self.shell(i) for i in range(len(self.n))]

    def shell(self, i: int) -> MomentumShell:
        n = int(self.n[i])
        return MomentumShell(n, FOUR_PI_SQ * n, int(self.multiplicity[i]), representative(n))

    def __len__(self) -> int:
        return len(self.n)

    def has_zero(self) -> bool:
        return len(self.n) > 0 and self.n[0] == 0

    def lattice_points(self) -> int:
        return int(self.multiplicity.sum())

    def subset(self, ns: Iterable[int]) -> "ShellTable":
        """Finite mode set made of the listed shells (no tail)."""
        keep = np.isin(self.n, np.asarray(sorted(set(ns)), dtype=np.int64))
        if not keep.any():
            raise DomainError("subset selects no shells")
        return ShellTable(
            self.n[keep], self.multiplicity[keep], int(self.n[keep][-1]), truncated=False
        )

    def zero_only(self) -> "ShellTable":
        return self.subset([0])

    def with_tail(self, tail: float, beta: float, mu: float) -> "ShellTable":
        return ShellTable(
            self.n, self.multiplicity, self.cutoff_n, self.truncated, tail, (beta, mu)
        )


def build_shells(max_psq: float, shell_limit: int = DEFAULT_SHELL_LIMIT) -> ShellTable:
    """All shells with p² <= max_psq, multiplicities exact, sorted ascending."""
    if not max_psq > 0:
        raise DomainError(f"max_psq must be positive, got {max_psq}")
    n_max = int(math.floor(max_psq / FOUR_PI_SQ * (1.0 + 1e-12)))
    if n_max > shell_limit:
        raise ResourceError(
            f"shell enumeration up to n={n_max} exceeds the limit {shell_limit}"
        )
    counts = r3_counts(n_max)
    n = np.nonzero(counts)[0].astype(np.int64)
    table = ShellTable(n, counts[n], n_max)
    logger.debug("Built %d shells up to n=%d", len(n), n_max)
    return table


@dataclass(frozen=True)
class VhatTable:
    """Interaction coefficients v̂ per shell index n = |z|²; missing shells are 0."""

    values: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for n, v in self.values.items():
            if n < 0 or v < 0 or not math.isfinite(v):
                raise DomainError(f"v̂ entries need n >= 0 and finite v̂ >= 0, got ({n}, {v})")

    @property
    def vhat0(self) -> float:
        return self.values.get(0, 0.0)

    @property
    def max_n(self) -> int:
        return max(self.values) if self.values else 0

    def is_zero(self) -> bool:
        return not any(v > 0 for v in self.values.values())

    def on(self, n: np.ndarray) -> np.ndarray:
        dense = np.zeros(self.max_n + 1)
        for key, v in self.values.items():
            dense[key] = v
        n = np.asarray(n, dtype=np.int64)
        out = np.zeros(n.shape)
        inside = n <= self.max_n
        out[inside] = dense[n[inside]]
        return out

    def at(self, vector: Tuple[int, int, int]) -> float:
        return self.values.get(sum(c * c for c in vector), 0.0)

    def sup_beyond(self, n: int) -> float:
        tail = [v for key, v in self.values.items() if key > n]
        return max(tail) if tail else 0.0


def load_vhat(path: Union[str, Path]) -> VhatTable:
    """Parse ``n value`` lines; ``#`` starts a comment."""
    values: Dict[int, float] = {}
    with Path(path).open("r") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'n value', got {line!r}")
            try:
                values[int(parts[0])] = float(parts[1])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from exc
    logger.info("Loaded v̂ table with %d shells from %s", len(values), path)
    return VhatTable(values)


Weight = Union[None, VhatTable, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def _weights(table: ShellTable, weight: Weight) -> Tuple[np.ndarray, float]:
    """Per-shell weight values and a bound on |weight| beyond the cutoff."""
    if weight is None:
        return np.ones(len(table)), 1.0
    if isinstance(weight, VhatTable):
        return weight.on(table.n), weight.sup_beyond(table.cutoff_n)
    if callable(weight):
        w = np.asarray(weight(table.psq), dtype=float)
    else:
        w = np.asarray(weight, dtype=float)
    if w.shape != table.n.shape:
        raise DomainError("weight array must have one entry per shell")
    return w, float(np.max(np.abs(w))) if len(w) else 0.0


def gaussian_tail(cutoff_n: int, beta: float, mu: float, prefactor: float) -> float:
    """
    Bound on Σ_{|z|² > cutoff_n} prefactor·e^{-β(4π²|z|² - μ)}; +inf when the
    cutoff is too small for the bound to apply.
    """
    R = math.sqrt(cutoff_n + 1)
    Rp = R - 2.0 * HALF_DIAGONAL
    if Rp <= 0 or beta * (FOUR_PI_SQ * R * R - mu) < LN2:
        return math.inf
    a = FOUR_PI_SQ * beta
    erfc_term = float(special.erfc(math.sqrt(a) * Rp))
    i2 = Rp * math.exp(-a * Rp * Rp) / (2 * a) + math.sqrt(math.pi) / (4 * a ** 1.5) * erfc_term
    i0 = math.sqrt(math.pi) / (2 * math.sqrt(a)) * erfc_term
    integral = 4 * math.pi * (2 * i2 + 2 * HALF_DIAGONAL ** 2 * i0)
    return prefactor * math.exp(beta * mu) * integral


def _check_mu(table: ShellTable, beta: float, mu: float, include_zero: bool) -> np.ndarray:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    mask = np.ones(len(table), dtype=bool) if include_zero else table.n > 0
    if mask.any():
        floor = float(table.psq[mask][0])
        if not mu < floor:
            raise DomainError(f"mu={mu} must lie below the lowest included p²={floor}")
    elif include_zero and not mu < 0:
        raise DomainError(f"mu={mu} must be negative when the zero mode is included")
    return mask


def _certify(table, value, tail, tol, what):
    if tol is not None and tail > tol * max(abs(value), 1e-300):
        raise AccuracyError(
            f"{what}: tail bound {tail:.3e} exceeds tolerance {tol:.1e} x |sum| "
            f"at cutoff n={table.cutoff_n}"
        )


def _spectral_sum(table, beta, mu, include_zero, weight, tol, term, prefactor, what):
    mask = _check_mu(table, beta, mu, include_zero)
    w, wsup = _weights(table, weight)
    x = beta * (table.psq[mask] - mu)
    value = float(np.sum(table.multiplicity[mask] * w[mask] * term(x)))
    tail = 0.0
    if table.truncated and wsup > 0:
        tail = wsup * gaussian_tail(table.cutoff_n, beta, mu, prefactor)
    _certify(table, value, tail, tol, what)
    return value


def bose_sum(
    table: ShellTable,
    beta: float,
    mu: float,
    include_zero: bool = True,
    weight: Weight = None,
    tol: Optional[float] = DEFAULT_TAIL_TOL,
) -> float:
    """Σ mult·w(p²)/(e^{β(p²-μ)} - 1) over the included shells."""
    return _spectral_sum(
        table, beta, mu, include_zero, weight, tol,
        lambda x: 1.0 / np.expm1(x), _BOSE_PREFACTOR, "bose_sum",
    )


def sinh2_sum(
    table: ShellTable,
    beta: float,
    mu: float,
    include_zero: bool = True,
    weight: Weight = None,
    tol: Optional[float] = DEFAULT_TAIL_TOL,
) -> float:
    """Σ mult·w(p²)/(4 sinh²(β(p²-μ)/2)), i.e. (1/β)∂/∂μ of ``bose_sum``."""
    return _spectral_sum(
        table, beta, mu, include_zero, weight, tol,
        lambda x: 0.25 / np.sinh(0.5 * x) ** 2, _SINH2_PREFACTOR, "sinh2_sum",
    )


def log_sum(
    table: ShellTable,
    beta: float,
    mu: float,
    include_zero: bool = True,
    weight: Weight = None,
    tol: Optional[float] = DEFAULT_TAIL_TOL,
) -> float:
    """Σ mult·w(p²)·ln(1 - e^{-β(p²-μ)})  (negative)."""
    return _spectral_sum(
        table, beta, mu, include_zero, weight, tol,
        lambda x: np.log(-np.expm1(-x)), _LOG_PREFACTOR, "log_sum",
    )


def equal_volume_radius(table: ShellTable) -> float:
    """Radius of the ball whose volume equals the number of tabulated points."""
    return (3.0 * table.lattice_points() / (4.0 * math.pi)) ** (1.0 / 3.0)


def inverse_power_tail(table: ShellTable, k: float) -> Tuple[float, float]:
    """
    Tail of Σ_{z≠0} |z|^{-2k} beyond the table: (estimate, bound).

    The estimate integrates from the equal-volume radius; the bound is the
    integral comparison over shifted unit cubes.
    """
    if not table.truncated:
        return 0.0, 0.0
    rho = equal_volume_radius(table)
    estimate = 4 * math.pi * rho ** (3 - 2 * k) / (2 * k - 3)
    Rp = math.sqrt(table.cutoff_n + 1) - 2.0 * HALF_DIAGONAL
    if Rp <= 0:
        return estimate, math.inf
    c2 = 2 * HALF_DIAGONAL ** 2
    bound = 4 * math.pi * (
        2 * Rp ** (3 - 2 * k) / (2 * k - 3) + c2 * Rp ** (1 - 2 * k) / (2 * k - 1)
    )
    return estimate, bound


def _vhat_beyond(table: ShellTable, vhat: VhatTable, k: float) -> float:
    """Σ over the v̂ support beyond the table, counted with r3(n)."""
    beyond = sorted(n for n, v in vhat.values.items() if n > table.cutoff_n and v > 0)
    if not beyond:
        return 0.0
    n = np.asarray(beyond, dtype=np.int64)
    r3 = r3_counts(int(n[-1]))[n]
    return float(np.sum(r3 * vhat.on(n) / (FOUR_PI_SQ * n) ** k))


def inverse_power_sum_with_bound(
    table: ShellTable, k: float, weight: Weight = None
) -> Tuple[float, float]:
    """
    (Σ_{p≠0} mult·w(p²)/p^{2k}, bound on its error).

    Beyond a truncated table a v̂ table is summed exactly over its support;
    other weights get sup|w| times the smooth tail estimate, certified by
    sup|w| times the integral bound.
    """
    if not k > 1.5:
        raise DomainError(f"k must exceed 3/2 for summability on ℤ³, got {k}")
    mask = table.n > 0
    w, wsup = _weights(table, weight)
    value = float(np.sum(table.multiplicity[mask] * w[mask] / table.psq[mask] ** k))
    if not table.truncated:
        return value, 0.0
    if isinstance(weight, VhatTable):
        return value + _vhat_beyond(table, weight, k), 0.0
    if wsup == 0:
        return value, 0.0
    estimate, bound = inverse_power_tail(table, k)
    scale = wsup / FOUR_PI_SQ ** k
    logger.debug("inverse_power_sum tail estimate %.3e (bound %.3e)",
                 scale * estimate, scale * bound)
    return value + scale * estimate, scale * bound


def inverse_power_sum(
    table: ShellTable, k: float, weight: Weight = None, tol: Optional[float] = None
) -> float:
    """
    Σ_{p≠0} mult·w(p²)/p^{2k}, tail included; raises ``AccuracyError`` when
    the tail certificate exceeds ``tol`` times the sum.
    """
    value, bound = inverse_power_sum_with_bound(table, k, weight)
    _certify(table, value, bound, tol, "inverse_power_sum")
    return value


def certified_table(
    beta: float,
    mu: float,
    rel_tol: float = DEFAULT_TAIL_TOL,
    start_n: int = DEFAULT_START_N,
    shell_limit: int = DEFAULT_SHELL_LIMIT,
) -> ShellTable:
    """
    Smallest table, doubling the integer radius from ``start_n``, whose Bose
    tail at (β, μ) is below ``rel_tol`` times the partial occupancy sum.
    Certifying at μ = 0 covers every μ <= 0.
    """
    n_cut = start_n
    while True:
        table = build_shells(FOUR_PI_SQ * n_cut, shell_limit)
        terms = table.multiplicity[table.n > 0] / np.expm1(beta * (table.psq[table.n > 0] - mu))
        partial = float(np.sum(terms))
        tail = gaussian_tail(table.cutoff_n, beta, mu, _SINH2_PREFACTOR)
        if tail <= rel_tol * partial:
            logger.debug("Certified table at n=%d for beta=%.4g (tail %.2e)", n_cut, beta, tail)
            return table.with_tail(tail, beta, mu)
        if 4 * n_cut > shell_limit:
            raise ResourceError(
                f"cannot certify tail {rel_tol:.1e} at beta={beta:.4g} within "
                f"{shell_limit} shells"
            )
        n_cut *= 4


def check_summability(table: ShellTable, vhat: VhatTable) -> bool:
    """
    Validate Σ (1+|p|) v̂(p) < ∞ on the data: warn (never fail) when the
    outer half of the table's radius still carries over 10% of the sum.
    """
    w = vhat.on(table.n) * (1.0 + np.sqrt(table.psq))
    total = float(np.sum(table.multiplicity * w))
    if total == 0:
        return True
    outer = table.n > table.cutoff_n // 4
    share = float(np.sum(table.multiplicity[outer] * w[outer])) / total
    if share > 0.1 and vhat.max_n >= table.cutoff_n // 4:
        logger.warning(
            "v̂ tail looks non-summable: outer half of the radius carries %.1f%%", 100 * share
        )
        return False
    return True


def shells_csv(table: ShellTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "psq", "multiplicity"])
    for n, m in zip(table.n, table.multiplicity):
        writer.writerow([int(n), repr(FOUR_PI_SQ * float(n)), int(m)])
    return buf.getvalue()
