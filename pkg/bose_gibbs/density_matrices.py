"""
density_matrices.py
-------------------

Predicted reduced density matrices of the mean-field Bose gas.

* one_pdm: eigenvalues of the 1-pdm per shell (Ñ0 and γ_p when condensed,
  ideal occupancies otherwise);
* two_pdm: normal-ordered 2- and 4-point elements from a small pattern
  language, e.g. ``"ad(0) ad(0) a(p) a(-p)"``;
* variances: Var(𝒩0) and Var(𝒩+).

Condensed values are those of the reference state ∫|z⟩⟨z| ⊗ G^Bog(z) g(z)dz:
each zero-mode operator contributes |z|, the excitations are quasi-free with
⟨a†_k a_k⟩ = γ_k and ⟨a_k a_{-k}⟩ = α_k after the phase average, and any
pattern that changes the particle number or the momentum vanishes. The error
bands of the large-N statements are attached as metadata only.
"""

from dataclasses import dataclass, field
import logging
import math
import re
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bogoliubov import BogoliubovSpectrum
from .common.errors import DomainError, RegimeMismatchError, UnsupportedPatternError
from .lattice import FOUR_PI_SQ
from .regime import PhaseRegime

logger = logging.getLogger(__name__)

CONDENSED = PhaseRegime.CONDENSED
NON_CONDENSED = PhaseRegime.NON_CONDENSED

Vector = Tuple[int, int, int]
ZERO: Vector = (0, 0, 0)

DEFAULT_BINDINGS: Dict[str, Vector] = {
    "p": (1, 0, 0),
    "q": (0, 1, 0),
    "r": (0, 0, 1),
    "s": (1, 1, 0),
}

MAX_OPERATORS = 4

# exponent of N in the error band of each prediction line
ORDER_BANDS: Dict[str, Dict[str, float]] = {
    CONDENSED: {
        "zero_four_point": 5.0 / 3.0 - 1.0 / 12.0,
        "pair_transfer": 5.0 / 3.0 - 1.0 / 96.0,
        "zero_excitation": 5.0 / 3.0 - 1.0 / 96.0,
        "three_one": 3.0 / 2.0,
        "excitation_four_point": 4.0 / 3.0 - 1.0 / 96.0,
        "var_n_plus": 4.0 / 3.0 - 1.0 / 96.0,
        "one_pdm": 2.0 / 3.0,
    },
    NON_CONDENSED: {
        "zero_four_point": -1.0 / 144.0,
        "pair_transfer": -1.0 / 144.0,
        "zero_excitation": -1.0 / 144.0,
        "three_one": -1.0 / 144.0,
        "excitation_four_point": -1.0 / 144.0,
        "var_n_plus": 4.0 / 3.0 - 1.0 / 144.0,
        "one_pdm": -1.0 / 96.0,
    },
}

_TOKEN = re.compile(r"\s*(ad|a)\(\s*([^()]*?)\s*\)\s*")
_SYMBOL = re.compile(r"^(-?)([a-z]\w*)$")


# ---------------------------------------------------------------------------
# Pattern language
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    creation: bool
    label: str
    momentum: Vector

    @property
    def is_zero(self) -> bool:
        return self.momentum == ZERO

    def __str__(self) -> str:
        return f"{'ad' if self.creation else 'a'}({self.label})"


def _negate(v: Vector) -> Vector:
    return (-v[0], -v[1], -v[2])


def _resolve(label: str, bindings: Dict[str, Vector]) -> Vector:
    if label == "0":
        return ZERO
    match = _SYMBOL.match(label)
    if match:
        sign, name = match.groups()
        if name not in bindings:
            raise UnsupportedPatternError(f"unbound momentum label {name!r}")
        vec = tuple(int(c) for c in bindings[name])
        return _negate(vec) if sign else vec
    parts = label.strip("()[] ").replace(",", " ").split()
    if len(parts) == 3:
        try:
            return tuple(int(c) for c in parts)
        except ValueError:
            pass
    raise UnsupportedPatternError(f"cannot read momentum label {label!r}")


def parse_pattern(
    pattern: str, bindings: Optional[Dict[str, Vector]] = None
) -> List[Operator]:
    """
    Parse ``"ad(0) ad(p) a(q) a(-r)"``. Labels are ``0``, a (signed) symbol
    bound in ``bindings`` or an integer triple such as ``(1,0,-1)``.
    Creation operators must precede annihilation operators.
    """
    bindings = {**DEFAULT_BINDINGS, **(bindings or {})}
    ops: List[Operator] = []
    pos = 0
    for match in _TOKEN.finditer(pattern):
        if match.start() != pos:
            break
        kind, label = match.groups()
        ops.append(Operator(kind == "ad", label, _resolve(label, bindings)))
        pos = match.end()
    if pos != len(pattern) or not ops:
        raise UnsupportedPatternError(f"malformed pattern {pattern!r}")
    if len(ops) > MAX_OPERATORS:
        raise UnsupportedPatternError(
            f"patterns have at most {MAX_OPERATORS} operators, got {len(ops)}"
        )
    seen_annihilation = False
    for op in ops:
        if op.creation and seen_annihilation:
            raise UnsupportedPatternError(f"pattern {pattern!r} is not normal-ordered")
        seen_annihilation |= not op.creation
    return ops


def _momentum_balance(ops: Sequence[Operator]) -> Vector:
    total = np.zeros(3, dtype=np.int64)
    for op in ops:
        total += np.asarray(op.momentum) * (1 if op.creation else -1)
    return tuple(int(c) for c in total)


def _number_balance(ops: Sequence[Operator]) -> int:
    return sum(1 if op.creation else -1 for op in ops)


# ---------------------------------------------------------------------------
# Inputs of the predictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorInputs:
    """
    Everything a prediction is built from.

    Args:
        regime: CONDENSED or NON_CONDENSED
        n0_first: E|z|² = Ñ0 (condensed) or N0 (non-condensed)
        n0_second: E|z|⁴, used by the zero-mode four-point line
        gamma: ⟨a†_k a_k⟩ for a nonzero momentum vector k
        alpha: ⟨a_k a_{-k}⟩ for a nonzero momentum vector k (0 when non-condensed)
    """

    regime: str
    n0_first: float
    n0_second: float
    gamma: Callable[[Vector], float]
    alpha: Callable[[Vector], float] = field(default=lambda k: 0.0)
    N: Optional[float] = None

    def occupation(self, k: Vector) -> float:
        return self.n0_first if k == ZERO else self.gamma(k)

    def zero_moment(self, order: int) -> float:
        """E|z|^{2·order} for order 0, 1, 2."""
        if order == 0:
            return 1.0
        if order == 1:
            return self.n0_first
        if order == 2:
            return self.n0_second
        raise UnsupportedPatternError(f"no zero-mode moment of order {order}")


def reference_regime(spectrum: BogoliubovSpectrum) -> str:
    phase = spectrum.phase
    if phase == PhaseRegime.CRITICAL:
        raise RegimeMismatchError(
            "the state sits in the critical window; pass the regime explicitly"
        )
    return phase


def _check_regime(spectrum: BogoliubovSpectrum, regime: Optional[str]) -> str:
    if regime is None:
        return reference_regime(spectrum)
    if regime not in (CONDENSED, NON_CONDENSED):
        raise DomainError(f"regime must be {CONDENSED!r} or {NON_CONDENSED!r}, got {regime!r}")
    if spectrum.phase not in (regime, PhaseRegime.CRITICAL):
        raise RegimeMismatchError(
            f"spectrum was built for the {spectrum.phase} phase, not {regime}"
        )
    return regime


def _shell_lookup(spectrum: BogoliubovSpectrum, values: np.ndarray) -> Callable[[Vector], float]:
    def lookup(k: Vector) -> float:
        return float(values[spectrum.index_of(sum(c * c for c in k))])

    return lookup


def inputs_from_spectrum(
    spectrum: BogoliubovSpectrum, regime: Optional[str] = None
) -> CorrelatorInputs:
    regime = _check_regime(spectrum, regime)
    st = spectrum.base
    if regime == NON_CONDENSED:
        beta, mu0 = st.beta, st.mu0

        def occupancy(k: Vector) -> float:
            return 1.0 / math.expm1(beta * (FOUR_PI_SQ * sum(c * c for c in k) - mu0))

        return CorrelatorInputs(
            regime=regime,
            n0_first=st.N0,
            n0_second=2.0 * st.N0 ** 2,
            gamma=occupancy,
            N=st.N,
        )

    n0 = spectrum.N_tilde_0
    if spectrum.vhat0 > 0:
        second = n0 * n0 + st.N / (st.beta * spectrum.vhat0)
    else:
        # without interaction the condensate law is exponential
        second = 2.0 * n0 * n0
    return CorrelatorInputs(
        regime=regime,
        n0_first=n0,
        n0_second=second,
        gamma=_shell_lookup(spectrum, spectrum.gamma),
        alpha=_shell_lookup(spectrum, spectrum.alpha),
        N=st.N,
    )


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorPrediction:
    pattern: str
    labels: Tuple[str, ...]
    value: float
    regime: str
    provenance: str
    order_exponent: Optional[float] = None

    @property
    def order_band(self) -> Optional[str]:
        if self.order_exponent is None:
            return None
        return f"N^{self.order_exponent:.6g}"

    def to_dict(self) -> Dict:
        return {
            "pattern": self.pattern,
            "labels": list(self.labels),
            "value": self.value,
            "regime": self.regime,
            "provenance": self.provenance,
            "order_band": self.order_band,
        }


@dataclass(frozen=True)
class OnePdmTable:
    n: np.ndarray
    multiplicity: np.ndarray
    eigenvalue: np.ndarray
    zero_value: float
    total: float
    residual: float
    regime: str


def one_pdm(spectrum: BogoliubovSpectrum, regime: Optional[str] = None) -> OnePdmTable:
    """
    1-pdm eigenvalue per shell. Condensed: Ñ0 at p = 0 and γ_p elsewhere.
    Non-condensed: N0 and the ideal occupancies at μ0.
    """
    regime = _check_regime(spectrum, regime)
    st = spectrum.base
    if regime == CONDENSED:
        zero, values = spectrum.N_tilde_0, spectrum.gamma
    else:
        zero = st.N0
        values = 1.0 / np.expm1(st.beta * (spectrum.psq - st.mu0))
    total = zero + float(np.sum(spectrum.multiplicity * values))
    residual = abs(total - st.N) / st.N
    logger.debug("1-pdm (%s): total %.12g vs N=%.6g", regime, total, st.N)
    return OnePdmTable(
        n=spectrum.n,
        multiplicity=spectrum.multiplicity,
        eigenvalue=values,
        zero_value=zero,
        total=total,
        residual=residual,
        regime=regime,
    )


def _line_name(ops: Sequence[Operator]) -> str:
    zeros = sum(op.is_zero for op in ops)
    if len(ops) == 2:
        return "one_pdm"
    if zeros == 4:
        return "zero_four_point"
    if zeros in (1, 3):
        return "three_one"
    if zeros == 0:
        return "excitation_four_point"
    zero_creations = sum(op.is_zero and op.creation for op in ops)
    return "zero_excitation" if zero_creations == 1 else "pair_transfer"


def _closed_form(ops: Sequence[Operator], inputs: CorrelatorInputs) -> float:
    """Line-by-line closed forms of the normal-ordered 2- and 4-point elements."""
    if len(ops) == 2:
        k, l_ = ops[0].momentum, ops[1].momentum
        if ops[0].creation and not ops[1].creation and k == l_:
            return inputs.occupation(k)
        return 0.0

    p, q, r, s = (op.momentum for op in ops)
    g = inputs.occupation

    if inputs.regime == NON_CONDENSED:
        return (float(p == r and q == s) + float(p == s and q == r)) * g(p) * g(q)

    zeros = [op.is_zero for op in ops]
    if all(zeros):
        return inputs.zero_moment(2)
    if sum(zeros) % 2:
        return 0.0
    if not any(zeros):
        pairing = float(p == _negate(q) and r == _negate(s)) * inputs.alpha(p) * inputs.alpha(r)
        hopping = (float(p == r and q == s) + float(p == s and q == r)) * g(p) * g(q)
        return pairing + hopping
    if zeros == [True, True, False, False]:
        # a0† a0† a_r a_s
        return inputs.n0_first * float(r == _negate(s)) * inputs.alpha(r)
    if zeros == [False, False, True, True]:
        return inputs.n0_first * float(p == _negate(q)) * inputs.alpha(p)
    # one zero creation and one zero annihilation: Ñ0 δ γ
    k = next(op.momentum for op in ops if op.creation and not op.is_zero)
    l_ = next(op.momentum for op in ops if not op.creation and not op.is_zero)
    return inputs.n0_first * float(k == l_) * g(k)


def two_pdm(
    spectrum: Optional[BogoliubovSpectrum],
    pattern: str,
    regime: Optional[str] = None,
    bindings: Optional[Dict[str, Vector]] = None,
    inputs: Optional[CorrelatorInputs] = None,
) -> CorrelatorPrediction:
    """
    Predicted value of a normal-ordered 2- or 4-point element.

    Momentum- or number-violating patterns predict exactly 0. The inputs
    come from ``spectrum`` unless ``inputs`` is given.
    """
    ops = parse_pattern(pattern, bindings)
    if inputs is None:
        if spectrum is None:
            raise DomainError("two_pdm needs a spectrum or explicit inputs")
        inputs = inputs_from_spectrum(spectrum, regime)
    labels = tuple(str(op) for op in ops)

    if len(ops) % 2:
        return CorrelatorPrediction(pattern, labels, 0.0, inputs.regime, "odd_pattern")
    if _momentum_balance(ops) != ZERO:
        return CorrelatorPrediction(pattern, labels, 0.0, inputs.regime, "momentum_violation")
    if _number_balance(ops) != 0:
        return CorrelatorPrediction(pattern, labels, 0.0, inputs.regime, "number_violation")

    line = _line_name(ops)
    value = _closed_form(ops, inputs)
    return CorrelatorPrediction(
        pattern=pattern,
        labels=labels,
        value=value,
        regime=inputs.regime,
        provenance=line,
        order_exponent=ORDER_BANDS[inputs.regime].get(line),
    )


def wick_contraction_value(
    ops: Union[Sequence[Operator], str], inputs: CorrelatorInputs
) -> float:
    """
    Independent evaluation by explicit contraction sums.

    Condensed: the zero-mode operators give E|z|^{#zero} and the remaining
    operators are summed over all pairings with ⟨a†_k a_l⟩ = δ γ_k and
    ⟨a_k a_l⟩ = ⟨a†_k a†_l⟩ = δ_{k,-l} α_k. Non-condensed: all operators,
    the zero mode included, are paired with the ideal occupancies.
    """
    if isinstance(ops, str):
        ops = parse_pattern(ops)
    if _momentum_balance(ops) != ZERO or _number_balance(ops) != 0:
        return 0.0

    if inputs.regime == CONDENSED:
        zero_count = sum(op.is_zero for op in ops)
        if zero_count % 2:
            return 0.0
        radial = inputs.zero_moment(zero_count // 2)
        rest = [op for op in ops if not op.is_zero]
    else:
        radial, rest = 1.0, list(ops)

    def contract(a: Operator, b: Operator) -> float:
        if a.creation and not b.creation:
            return inputs.occupation(a.momentum) if a.momentum == b.momentum else 0.0
        if a.creation == b.creation and inputs.regime == CONDENSED:
            return inputs.alpha(a.momentum) if a.momentum == _negate(b.momentum) else 0.0
        return 0.0

    def pairings(items: List[Operator]) -> float:
        if not items:
            return 1.0
        head, tail = items[0], items[1:]
        total = 0.0
        for i, partner in enumerate(tail):
            c = contract(head, partner)
            if c:
                total += c * pairings(tail[:i] + tail[i + 1:])
        return total

    if len(rest) % 2:
        return 0.0
    return radial * pairings(rest)


def random_patterns(count: int, rng: np.random.Generator, size: int = 4) -> List[str]:
    """Random normal-ordered patterns over the labels 0, ±p, ±q."""
    labels = ["0", "p", "-p", "q", "-q"]
    out = []
    for _ in range(count):
        n_create = int(rng.integers(0, size + 1))
        picks = rng.choice(labels, size=size)
        ops = [f"ad({x})" for x in picks[:n_create]] + [f"a({x})" for x in picks[n_create:]]
        out.append(" ".join(ops))
    return out


def wick_consistency(
    inputs: CorrelatorInputs, count: int = 200, seed: int = 0
) -> Dict[str, float]:
    """Compare the closed forms with the contraction sums on random patterns."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    mismatches = 0
    for pattern in random_patterns(count, rng):
        closed = two_pdm(None, pattern, inputs=inputs).value
        summed = wick_contraction_value(pattern, inputs)
        gap = abs(closed - summed)
        worst = max(worst, gap)
        if gap > 1e-12 * max(1.0, abs(summed)):
            mismatches += 1
            logger.warning("Wick mismatch on %s: %.6g vs %.6g", pattern, closed, summed)
    return {"count": count, "mismatches": mismatches, "worst": worst}


# ---------------------------------------------------------------------------
# Particle-number variances
# ---------------------------------------------------------------------------


def variances(spectrum: BogoliubovSpectrum, regime: Optional[str] = None) -> Dict[str, float]:
    """
    Var(𝒩0) and Var(𝒩+). Condensed: N/(βv̂0) and Σ(α² + γ² + γ).
    Non-condensed: N0² + N0 and Σ n(1 + n).
    """
    regime = _check_regime(spectrum, regime)
    st = spectrum.base
    mult = spectrum.multiplicity
    if regime == CONDENSED:
        g, a = spectrum.gamma, spectrum.alpha
        var_plus = float(np.sum(mult * (a * a + g * g + g)))
        if spectrum.vhat0 > 0:
            var_zero = st.N / (st.beta * spectrum.vhat0)
        else:
            n0 = spectrum.N_tilde_0
            var_zero = n0 * n0 + n0
    else:
        occ = 1.0 / np.expm1(st.beta * (spectrum.psq - st.mu0))
        var_plus = float(np.sum(mult * occ * (1.0 + occ)))
        var_zero = st.N0 ** 2 + st.N0
    return {
        "regime": regime,
        "var_N0": var_zero,
        "var_Nplus": var_plus,
        "var_Nplus_band": ORDER_BANDS[regime]["var_n_plus"],
    }
