"""
regime.py
---------

Regime classification for the ideal-gas, condensate and free-energy theories.

Every asymptotic statement the toolkit evaluates splits on a comparison of
the condensate occupation with a power of the particle number:

- Phase: β/β_c below, inside or above a window around 1
- Condensate theory: M against N^{5/6 ± ε}
- Limit law of the condensate number: N0 against 1 and N^{5/6}
- Grand-potential branch: N0 against η^{5/6}

The crossover constants are not known, so comparisons are made on exponents
(ln value / ln N) with configurable bands, and each decision is kept in a
bounded history for the run report.
"""

from collections import deque
import logging
import math
from typing import Any, Dict

logger = logging.getLogger(__name__)


class PhaseRegime:
    """Regime classification and tracking."""

    # Phase labels
    CONDENSED = "condensed"
    NON_CONDENSED = "non-condensed"
    CRITICAL = "critical-window"

    # Condensate-theory labels (M against N^{5/6})
    INTERACTING = "interacting"
    CROSSOVER = "crossover"
    NON_INTERACTING = "non-interacting"

    # Limit laws of the rescaled condensate number
    LAW_NORMAL = "normal"
    LAW_TRUNCATED = "truncated_gaussian"
    LAW_EXPONENTIAL = "exponential_shifted"
    LAW_GEOMETRIC = "geometric"

    # Grand-potential branches
    THETA_INTERACTING = "theta_interacting"
    THETA_IDEAL = "theta_ideal"

    CONDENSATE_EXPONENT = 5.0 / 6.0

    def __init__(
        self,
        phase_window: float = 0.05,
        regime_eps: float = 0.05,
        log_band: float = 0.05,
        history: int = 1000,
    ):
        """
        Args:
            phase_window: half-width of the critical window in β/β_c
            regime_eps: ε in the exponent thresholds N^{5/6 ± ε}
            log_band: exponent distance below which a decision is flagged as
                lying in a crossover band
            history: number of decisions kept for statistics
        """
        self.phase_window = phase_window
        self.regime_eps = regime_eps
        self.log_band = log_band
        self.regime_history: deque = deque(maxlen=history)

    @staticmethod
    def exponent(value: float, base: float) -> float:
        """``ln(value) / ln(base)``; -inf for value <= 0."""
        if value <= 0:
            return -math.inf
        if base <= 1:
            return math.inf
        return math.log(value) / math.log(base)

    def _record(self, kind: str, label: str, **fields: Any) -> Dict[str, Any]:
        result = {"kind": kind, "regime": label, **fields}
        self.regime_history.append(result)
        logger.debug(f"Regime {kind}: {label} {fields}")
        return result

    def classify_phase(self, beta: float, beta_c: float) -> Dict[str, Any]:
        """Condensed above ``1 + window``, non-condensed below ``1 - window``."""
        ratio = beta / beta_c
        if ratio > 1.0 + self.phase_window:
            label = self.CONDENSED
        elif ratio < 1.0 - self.phase_window:
            label = self.NON_CONDENSED
        else:
            label = self.CRITICAL
        return self._record("phase", label, ratio=ratio)

    def classify_condensate(self, M: float, N: float) -> Dict[str, Any]:
        """Interacting for M >= N^{5/6+ε}, non-interacting for M <= N^{5/6-ε}."""
        e = self.exponent(M, N)
        if e >= self.CONDENSATE_EXPONENT + self.regime_eps:
            label = self.INTERACTING
        elif e <= self.CONDENSATE_EXPONENT - self.regime_eps:
            label = self.NON_INTERACTING
        else:
            label = self.CROSSOVER
            logger.warning(
                "M = %.6g sits in the crossover band around N^{5/6} (N = %.6g)", M, N
            )
        return self._record("condensate", label, exponent=e)

    def classify_limit_law(self, N0: float, N: float) -> Dict[str, Any]:
        """
        Pick the limit law of the rescaled condensate number:
        geometric for N0 = O(1), shifted exponential for 1 << N0 << N^{5/6},
        truncated Gaussian for N0 ~ N^{5/6}, normal for N0 >> N^{5/6}.
        """
        e = self.exponent(N0, N)
        lo, hi = self.regime_eps, self.CONDENSATE_EXPONENT
        if e < lo:
            label = self.LAW_GEOMETRIC
        elif e <= hi - self.regime_eps:
            label = self.LAW_EXPONENTIAL
        elif e < hi + self.regime_eps:
            label = self.LAW_TRUNCATED
        else:
            label = self.LAW_NORMAL
        margin = min(abs(e - b) for b in (lo, hi - self.regime_eps, hi + self.regime_eps))
        crossover = margin < self.log_band
        if crossover:
            logger.warning(
                "N0 = %.6g is within %.3f of a limit-law boundary (label %s)",
                N0,
                margin,
                label,
            )
        return self._record("limit_law", label, exponent=e, crossover=crossover)

    def classify_theta_branch(self, N0: float, eta: float) -> Dict[str, Any]:
        """Grand-potential branch: N0 >= η^{5/6} or not."""
        e = self.exponent(N0, eta)
        label = self.THETA_INTERACTING if e >= self.CONDENSATE_EXPONENT else self.THETA_IDEAL
        crossover = abs(e - self.CONDENSATE_EXPONENT) < self.log_band
        if crossover:
            logger.warning("N0 = %.6g is close to eta^{5/6} (eta = %.6g)", N0, eta)
        return self._record("theta_bec", label, exponent=e, crossover=crossover)

    def get_regime_statistics(self) -> Dict[str, Any]:
        """
        Get statistics about the recorded decisions.

        Returns:
            Dictionary with the number of decisions and, per kind, the
            percentage share of each label
        """
        if not self.regime_history:
            return {}

        total = len(self.regime_history)
        stats: Dict[str, Any] = {"total_samples": total}
        by_kind: Dict[str, Dict[str, int]] = {}
        for r in self.regime_history:
            counts = by_kind.setdefault(r["kind"], {})
            counts[r["regime"]] = counts.get(r["regime"], 0) + 1
        for kind, counts in sorted(by_kind.items()):
            n = sum(counts.values())
            for label, count in sorted(counts.items()):
                stats[f"{kind}.{label}_pct"] = count / n * 100
        return stats
