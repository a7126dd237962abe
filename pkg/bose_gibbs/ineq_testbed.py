"""
ineq_testbed.py
---------------

Finite-dimensional checks of the trace inequalities behind the correlation
bounds: the Duhamel two-point function, the two-sided Falk–Bruch bound and
its pointwise key estimate, convexity of t ↦ Z''(t) for Z(t) = Tr e^{-A+tB},
the second-order bound Tr[B²Γ0] <= a e^a + ¼Tr([[B,A],B]Γ0), the higher-order
bounds with a dominating X, and the trace comparison of two states.

Everything is evaluated in the eigenbasis of H = A - tB with log-shifted
weights, so nothing overflows for matrices with spread-out spectra. Checks
return report dicts; only constant-free inequalities count as violations,
the higher-order conclusions are bounded-ratio diagnostics.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize, special

from .common.errors import DomainError

logger = logging.getLogger(__name__)

MAX_DIM = 12
HERMITIAN_TOL = 1e-12
COMMUTE_TOL = 1e-10
DEGENERACY_TOL = 1e-12
SLACK_TOL = 1e-9
SUP_GRID = 101
SUP_INFLATION = 1.01
STAHL_GRID = np.linspace(-0.95, 0.95, 39)
S_GRID = np.linspace(0.0, 1.0, 21)
FD_STEP = 5e-3
RATIO_CEILING = 1e3
LOG_RATIO_BINS = np.linspace(-8.0, 4.0, 25)


def comm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def _herm(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def _norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, 2)) if x.size else 0.0


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """GUE-style matrix with E|H_ij|² = 1/d."""
    m = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0 * d)
    return (m + m.conj().T) / math.sqrt(2.0)


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Trace-one Wishart matrix."""
    r = d if rank is None else rank
    w = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    g = w @ w.conj().T
    return g / np.trace(g).real


def random_commuting_triple(
    d: int, rng: np.random.Generator, nonnegative: bool = False
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Block-diagonal A, B with X = c_j on block j, c_j >= 1 + ‖B_j‖, so X
    commutes with both and ±B <= X. ``nonnegative`` shifts every B block to
    B_j >= 0.
    """
    k = int(rng.integers(1, d)) if d > 1 else 1
    sizes = [k, d - k] if d > 1 else [1]
    a_blocks, b_blocks, x_diag = [], [], []
    for size in sizes:
        a_blocks.append(random_hermitian(size, rng))
        b = random_hermitian(size, rng)
        if nonnegative:
            b = b - linalg.eigvalsh(b)[0] * np.eye(size)
        b_blocks.append(b)
        x_diag.append(np.full(size, 1.0 + _norm(b) + float(rng.random())))
    A = linalg.block_diag(*a_blocks)
    B = linalg.block_diag(*b_blocks)
    return A, B, np.diag(np.concatenate(x_diag))


@dataclass(frozen=True)
class HermitianPair:
    """
    Args:
        A, B: Hermitian d×d matrices, 2 <= d <= 12
        X: optional positive matrix commuting with A and B, with ±B <= X
    """

    A: np.ndarray
    B: np.ndarray
    X: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def validate(self) -> "HermitianPair":
        if self.A.shape != self.B.shape or self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise DomainError(
                f"A and B must be square and equal-sized, got {self.A.shape}, {self.B.shape}"
            )
        if not 2 <= self.dim <= MAX_DIM:
            raise DomainError(f"dimension must lie in [2, {MAX_DIM}], got {self.dim}")
        for name, m in (("A", self.A), ("B", self.B)):
            if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * max(1.0, _norm(m)):
                raise DomainError(f"{name} is not Hermitian")
        if self.X is not None:
            X = self.X
            if X.shape != self.A.shape or np.max(np.abs(X - X.conj().T)) > HERMITIAN_TOL:
                raise DomainError("X must be Hermitian and of the same size as A")
            if _norm(comm(self.A, X)) + _norm(comm(self.B, X)) >= COMMUTE_TOL * max(1.0, _norm(X)):
                raise DomainError("X must commute with A and B")
            if linalg.eigvalsh(X)[0] < 1.0 - 1e-12:
                raise DomainError("X must satisfy X >= 1")
            for sign in (1.0, -1.0):
                if linalg.eigvalsh(_herm(X - sign * self.B))[0] < -1e-10:
                    raise DomainError("±B <= X does not hold")
        return self


def _log_mean(lam: np.ndarray, logw: np.ndarray, scale: float) -> np.ndarray:
    """Logarithmic mean (w_a - w_b)/(ln w_a - ln w_b) of all weight pairs; w_a on the diagonal."""
    d = np.abs(lam[:, None] - lam[None, :])
    big = np.exp(np.maximum(logw[:, None], logw[None, :]))
    degenerate = d < DEGENERACY_TOL * scale
    safe = np.where(degenerate, 1.0, d)
    phi = np.where(degenerate, 1.0, -np.expm1(-safe) / safe)
    return big * phi


class GibbsFamily:
    """
    Γ_t = e^{-A+tB}/Z(t) for a Hermitian pair, with eigendecompositions
    cached per t.
    """

    def __init__(self, A: np.ndarray, B: np.ndarray):
        self.A = np.asarray(A, dtype=complex)
        self.B = np.asarray(B, dtype=complex)
        self.scale = max(1.0, _norm(self.A), _norm(self.B))
        self._cache: Dict[float, Tuple[np.ndarray, np.ndarray, np.ndarray, float]] = {}

    def eigen(self, t: float):
        """(λ, V, ln w, ln Z) of H = A - tB, w the normalised Gibbs weights."""
        t = float(t)
        if t not in self._cache:
            lam, V = linalg.eigh(_herm(self.A - t * self.B))
            shifted = -(lam - lam[0])
            log_sum = float(special.logsumexp(shifted))
            self._cache[t] = (lam, V, shifted - log_sum, log_sum - lam[0])
        return self._cache[t]

    def rotate(self, op: np.ndarray, t: float) -> np.ndarray:
        _, V, _, _ = self.eigen(t)
        return V.conj().T @ op @ V

    def log_z(self, t: float) -> float:
        return self.eigen(t)[3]

    def state(self, t: float) -> np.ndarray:
        _, V, logw, _ = self.eigen(t)
        return (V * np.exp(logw)) @ V.conj().T

    def expect(self, op: np.ndarray, t: float) -> float:
        """Re Tr[op Γ_t]."""
        _, _, logw, _ = self.eigen(t)
        return float(np.real(np.diagonal(self.rotate(op, t)) @ np.exp(logw)))

    def mean_b(self, t: float) -> float:
        return self.expect(self.B, t)

    def duhamel(self, t: float) -> float:
        """∫₀¹ Tr[B e^{-sH} B e^{-(1-s)H}] ds / Z in the eigenbasis."""
        lam, _, logw, _ = self.eigen(t)
        bm = self.rotate(self.B, t)
        return float(np.sum(np.abs(bm) ** 2 * _log_mean(lam, logw, self.scale)))

    def two_point(self, s: float, t: float, left: Optional[np.ndarray] = None) -> complex:
        """Tr[P e^{-sH} B e^{-(1-s)H}]/Z with P = ``left`` (default B)."""
        _, _, logw, _ = self.eigen(t)
        bm = self.rotate(self.B, t)
        pm = bm if left is None else self.rotate(left, t)
        weights = np.exp(s * logw[None, :] + (1.0 - s) * logw[:, None])
        return complex(np.sum(pm * bm.T * weights))

    def double_commutator(self, t: float) -> float:
        """Tr([[B,A],B]Γ_t) in the eigen form Σ|B_ab|²(λ_b - λ_a)(w_a - w_b)."""
        lam, _, logw, _ = self.eigen(t)
        bm = self.rotate(self.B, t)
        w = np.exp(logw)
        gaps = (lam[None, :] - lam[:, None]) * (w[:, None] - w[None, :])
        return float(np.sum(np.abs(bm) ** 2 * gaps))

    def z_ratio(self, t: float, t0: float = 0.0) -> float:
        return math.exp(self.log_z(t) - self.log_z(t0))

    def dz_ratio(self, t: float) -> float:
        """Z'(t)/Z(0)."""
        return self.mean_b(t) * self.z_ratio(t)

    def d2z_ratio(self, t: float) -> float:
        """Z''(t)/Z(0)."""
        return self.duhamel(t) * self.z_ratio(t)

    def sup_mean_b(self, grid: int = SUP_GRID) -> Tuple[float, float]:
        """
        sup_{|t|<=1} |Tr BΓ_t| on a grid, refined by a bounded scalar search
        around the grid maximum. Returns (sup, t*).
        """
        ts = np.linspace(-1.0, 1.0, grid)
        vals = np.array([abs(self.mean_b(t)) for t in ts])
        i = int(np.argmax(vals))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
        best, t_best = float(vals[i]), float(ts[i])
        if hi > lo:
            res = optimize.minimize_scalar(lambda t: -abs(self.mean_b(t)), bounds=(lo, hi),
                                           method="bounded", options={"xatol": 1e-10})
            if -res.fun > best:
                best, t_best = float(-res.fun), float(res.x)
        return best, t_best


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _slack_report(lhs: float, rhs: float, scale: float, **extra) -> Dict:
    slack = rhs - lhs
    return {"lhs": lhs, "rhs": rhs, "slack": slack,
            "passed": bool(slack >= -SLACK_TOL * scale), **extra}


def duhamel(A: np.ndarray, B: np.ndarray, t: float = 0.0) -> float:
    return GibbsFamily(A, B).duhamel(t)


def duhamel_quadrature(A: np.ndarray, B: np.ndarray, t: float = 0.0, nodes: int = 64) -> float:
    """The same integral by Gauss–Legendre in s with scipy matrix exponentials."""
    H = _herm(np.asarray(A) - t * np.asarray(B))
    shift = linalg.eigvalsh(H)[0]
    H = H - shift * np.eye(len(H))
    z = float(np.trace(linalg.expm(-H)).real)
    x, w = special.roots_legendre(nodes)
    s_nodes = 0.5 * (x + 1.0)
    total = 0.0
    for s, weight in zip(s_nodes, 0.5 * w):
        total += weight * np.trace(B @ linalg.expm(-s * H) @ B @ linalg.expm(-(1.0 - s) * H)).real
    return float(total / z)


def check_falk_bruch(A: np.ndarray, B: np.ndarray, t: float = 0.0) -> Dict:
    """0 <= Tr[B²Γ] - duhamel <= ¼Tr([[B,A],B]Γ), with the eigen form cross-checked."""
    fam = GibbsFamily(A, B)
    tr_b2 = fam.expect(B @ B, t)
    duh = fam.duhamel(t)
    gap = tr_b2 - duh
    rhs_direct = 0.25 * fam.expect(comm(comm(B, A), B), t)
    rhs_eigen = 0.25 * fam.double_commutator(t)
    scale = max(1.0, tr_b2)
    lower_ok = gap >= -SLACK_TOL * scale
    upper_ok = gap <= rhs_eigen + SLACK_TOL * scale
    return {
        "tr_b2": tr_b2,
        "duhamel": duh,
        "gap": gap,
        "rhs": rhs_eigen,
        "rhs_direct": rhs_direct,
        "eigen_form_error": abs(rhs_direct - rhs_eigen),
        "slack": min(gap, rhs_eigen - gap),
        "passed": bool(lower_ok and upper_ok and abs(rhs_direct - rhs_eigen) <= 1e-10 * scale),
    }


def check_key_estimate(
    A: np.ndarray, B: np.ndarray, s_grid: Sequence[float] = S_GRID, t: float = 0.0
) -> Dict:
    """
    f(s) = Tr[B e^{-sH} B e^{-(1-s)H}]/Z: 0 <= f(0) - f(s) <= ¼Tr([[B,H],B]Γ),
    f convex on the grid and symmetric about ½.
    """
    fam = GibbsFamily(A, B)
    s = np.asarray(s_grid, dtype=float)
    f = np.array([fam.two_point(si, t).real for si in s])
    f_rev = np.array([fam.two_point(1.0 - si, t).real for si in s])
    bound = 0.25 * fam.double_commutator(t)
    drop = f[0] - f
    scale = max(1.0, abs(f[0]))
    second = f[:-2] - 2.0 * f[1:-1] + f[2:]
    slack = float(min(drop.min(), (bound - drop).min()))
    symmetry = float(np.max(np.abs(f - f_rev)))
    convex = float(second.min()) if second.size else 0.0
    return {
        "f0": float(f[0]),
        "f_half": float(np.interp(0.5, s, f)),
        "bound": bound,
        "slack": slack,
        "symmetry_error": symmetry,
        "min_second_difference": convex,
        "passed": bool(slack >= -SLACK_TOL * scale and symmetry <= 1e-10 * scale
                       and convex >= -SLACK_TOL * scale),
    }


def check_stahl(A: np.ndarray, B: np.ndarray, grid: Sequence[float] = STAHL_GRID) -> Dict:
    """
    Z'' >= 0 and convex on ``grid``, then the chain
    Z''(0) <= ½(Z'(1) - Z'(-1)) <= sup|Tr BΓ_t|Z(t) <= a e^a Z(0), all over Z(0).
    """
    fam = GibbsFamily(A, B)
    ts = np.asarray(grid, dtype=float)
    if ts.size and (ts.min() <= -1.0 or ts.max() >= 1.0):
        raise DomainError("Stahl grid must lie inside (-1, 1)")
    d2 = np.array([fam.d2z_ratio(t) for t in ts])
    second = d2[:-2] - 2.0 * d2[1:-1] + d2[2:]
    a, _ = fam.sup_mean_b()
    a_used = SUP_INFLATION * a
    sup_ts = np.linspace(-1.0, 1.0, SUP_GRID)
    sup_term = max(abs(fam.mean_b(t)) * fam.z_ratio(t) for t in sup_ts)
    chain = [fam.d2z_ratio(0.0), 0.5 * (fam.dz_ratio(1.0) - fam.dz_ratio(-1.0)),
             sup_term, a_used * math.exp(a_used)]
    link_slack = [chain[i + 1] - chain[i] for i in range(3)]
    scale = max(1.0, chain[-1])
    slack = float(min(d2.min(), second.min() if second.size else 0.0, *link_slack))
    return {
        "min_d2z": float(d2.min()),
        "min_second_difference": float(second.min()) if second.size else 0.0,
        "chain": chain,
        "link_slack": link_slack,
        "a": a_used,
        "slack": slack,
        "passed": bool(d2.min() >= -SLACK_TOL * scale
                       and (not second.size or second.min() >= -SLACK_TOL * scale)
                       and min(link_slack) >= -SLACK_TOL * scale),
    }


def check_derivatives(A: np.ndarray, B: np.ndarray, t: float = 0.0, step: float = FD_STEP) -> Dict:
    """Z' and Z'' from the eigenbasis against 5-point finite differences of Z."""
    fam = GibbsFamily(A, B)
    z = [fam.z_ratio(t + k * step, t) for k in (-2, -1, 0, 1, 2)]
    fd1 = (z[0] - 8 * z[1] + 8 * z[3] - z[4]) / (12 * step)
    fd2 = (-z[0] + 16 * z[1] - 30 * z[2] + 16 * z[3] - z[4]) / (12 * step ** 2)
    d1 = fam.mean_b(t)
    d2 = fam.duhamel(t)
    rel1 = abs(fd1 - d1) / max(abs(d1), 1.0)
    rel2 = abs(fd2 - d2) / max(abs(d2), 1.0)
    return {"dz": d1, "dz_fd": fd1, "d2z": d2, "d2z_fd": fd2,
            "relative_error": max(rel1, rel2), "passed": bool(max(rel1, rel2) <= 1e-6)}


def check_second_order_bound(A: np.ndarray, B: np.ndarray) -> Dict:
    """
    Tr[B²Γ0] <= a e^a + ¼Tr([[B,A],B]Γ0) with a = 1.01·sup_{|t|<=1}|Tr BΓ_t|,
    plus e^{-a} <= Z(t)/Z(0) <= e^a on the sup grid and the proof chain
    Tr[B²Γ0] - ¼Tr(...) <= duhamel(0) <= a e^a.
    """
    fam = GibbsFamily(A, B)
    a, t_star = fam.sup_mean_b()
    a_used = SUP_INFLATION * a
    tr_b2 = fam.expect(B @ B, 0.0)
    quarter = 0.25 * fam.double_commutator(0.0)
    rhs = a_used * math.exp(a_used) + quarter
    scale = max(1.0, rhs)
    report = _slack_report(tr_b2, rhs, scale, a=a_used, t_star=t_star)

    ts = np.linspace(-1.0, 1.0, SUP_GRID)
    log_ratio = np.array([fam.log_z(t) - fam.log_z(0.0) for t in ts])
    gronwall_slack = float(a_used - np.max(np.abs(log_ratio)))
    duh = fam.duhamel(0.0)
    chain_slack = min(duh - (tr_b2 - quarter), a_used * math.exp(a_used) - duh)
    report.update(
        gronwall_slack=gronwall_slack,
        chain_slack=chain_slack,
        passed=bool(report["passed"] and gronwall_slack >= -SLACK_TOL
                    and chain_slack >= -SLACK_TOL * scale),
    )
    report["slack"] = min(report["slack"], gronwall_slack, chain_slack)
    return report


def _power(X: np.ndarray, exponent: float) -> np.ndarray:
    lam, V = linalg.eigh(_herm(X))
    return (V * lam ** exponent) @ V.conj().T


def commutator_identity_error(A: np.ndarray, B: np.ndarray, k: int) -> float:
    """‖[B^k,[B^k,A]] - Σ_{i,j<k} B^{i+j}[B,[B,A]]B^{2k-2-i-j}‖, relative."""
    powers = [np.eye(len(B), dtype=complex)]
    for _ in range(2 * k):
        powers.append(powers[-1] @ B)
    lhs = comm(powers[k], comm(powers[k], A))
    D = comm(B, comm(B, A))
    rhs = sum(powers[i + j] @ D @ powers[2 * k - 2 - i - j] for i in range(k) for j in range(k))
    scale = max(1.0, _norm(B) ** (2 * k) * _norm(A))
    return float(_norm(lhs - rhs) / scale)


def check_higher_order_bound(
    A: np.ndarray,
    B: np.ndarray,
    X: Optional[np.ndarray] = None,
    k_max: int = 4,
    alpha: float = 0.0,
    ceiling: float = RATIO_CEILING,
    t_grid: int = 21,
    s_grid: Sequence[float] = (0.0, 0.25, 0.5),
) -> Dict:
    """
    Higher moments Tr[B^kΓ0] against a dominating X (default (1+‖B‖)·I).

    Hard parts: the double-commutator expansion of [B^k,[B^k,A]] and the
    constant-free mixed estimate
    |Re Tr[B^ℓ e^{-sA} B e^{-(1-s)A}]/Z - Tr[B^{ℓ+1}Γ0]|
        <= ¼√|Tr([B,[B,A]]X^qΓ0)|·√|Tr([B^ℓ,[B^ℓ,A]]X^{-q}Γ0)|.
    Soft parts: the ratios
    Tr[B^kΓ0] / (e^{2a} sup_t{1 + b²Tr[X^{k-2+2α}Γ_t]}) for even k and, when
    B >= 0, Tr[B^kΓ0] / (e^{2a} sup_t(1 + Σ_ℓ b|Tr([B,[B,A]]X^{α+ℓ-3}Γ_t)|)),
    compared with ``ceiling``. b is the smallest constant with
    ±[[B,A],B] <= bX^α.
    """
    if X is None:
        X = (1.0 + _norm(B)) * np.eye(len(B))
    HermitianPair(np.asarray(A), np.asarray(B), np.asarray(X)).validate()
    fam = GibbsFamily(A, B)
    C = comm(comm(B, A), B)
    D = -C
    x_half = _power(X, -0.5 * alpha)
    b = float(np.max(np.abs(linalg.eigvalsh(_herm(x_half @ C @ x_half))))) if _norm(C) else 0.0
    x_alpha = _power(X, alpha)
    hypothesis = min(linalg.eigvalsh(_herm(b * x_alpha - C))[0],
                     linalg.eigvalsh(_herm(b * x_alpha + C))[0])

    identity = {k: commutator_identity_error(A, B, k) for k in range(1, k_max + 1)}

    mixed_slack = math.inf
    bl = np.eye(len(B), dtype=complex)
    for ell in range(1, k_max):
        bl = bl @ B
        moment = fam.expect(bl @ B, 0.0)
        dl = comm(bl, comm(bl, A))
        for q in sorted({0.0, alpha}):
            first = abs(fam.expect(D @ _power(X, q), 0.0))
            second = abs(fam.expect(dl @ _power(X, -q), 0.0))
            bound = 0.25 * math.sqrt(first) * math.sqrt(second)
            for s in s_grid:
                dev = abs(fam.two_point(s, 0.0, left=bl).real - moment)
                mixed_slack = min(mixed_slack, bound - dev)

    a, _ = fam.sup_mean_b()
    a_used = SUP_INFLATION * a
    ts = np.linspace(-1.0, 1.0, t_grid)
    ratios: Dict[str, float] = {}
    bk = np.eye(len(B), dtype=complex)
    nonnegative = linalg.eigvalsh(_herm(B))[0] >= -HERMITIAN_TOL
    for k in range(1, k_max + 1):
        bk = bk @ B
        lhs = fam.expect(bk, 0.0)
        if k % 2 == 0:
            xp = _power(X, k - 2 + 2 * alpha)
            sup = max(1.0 + b * b * fam.expect(xp, t) for t in ts)
            ratios[f"even_k{k}"] = lhs / (math.exp(2 * a_used) * sup)
        if nonnegative:
            weights = [_power(X, alpha + ell - 3) for ell in range(1, k + 1)]
            sup = max(1.0 + sum(b * abs(fam.expect(D @ w, t)) for w in weights) for t in ts)
            ratios[f"nonneg_k{k}"] = lhs / (math.exp(2 * a_used) * sup)

    scale = max(1.0, _norm(B) ** (2 * k_max))
    identity_ok = max(identity.values()) <= 1e-10
    mixed_ok = mixed_slack >= -SLACK_TOL * scale
    flagged = {name: r for name, r in ratios.items() if r >= ceiling}
    if flagged:
        logger.warning("Higher-order ratios above ceiling %.3g: %s", ceiling, flagged)
    return {
        "b": b,
        "alpha": alpha,
        "hypothesis_slack": float(hypothesis),
        "identity_error": identity,
        "mixed_slack": float(mixed_slack),
        "ratios": ratios,
        "flags": sorted(flagged),
        "slack": float(mixed_slack),
        "passed": bool(identity_ok and mixed_ok and hypothesis >= -1e-9 * max(1.0, b)),
    }


def check_trace_comparison(
    G: np.ndarray, G2: np.ndarray, B: np.ndarray, theta: float = 2.0,
    ceiling: float = RATIO_CEILING,
) -> Dict:
    """
    |Tr B(G - G')| <= 2√(Tr B²(G + G'))·√(Tr|G - G'|) at θ = 2; for other
    θ > 1 the ratio to (Tr|B|^θ(G + G'))^{1/θ}(Tr|G - G'|)^{1-1/θ} is reported.
    """
    if not theta > 1:
        raise DomainError(f"theta must exceed 1, got {theta}")
    for name, g in (("G", G), ("G'", G2)):
        if linalg.eigvalsh(_herm(g))[0] < -1e-12 * max(1.0, _norm(g)):
            raise DomainError(f"{name} must be non-negative")
    diff = G - G2
    lhs = abs(np.trace(B @ diff))
    trace_norm = float(np.sum(np.abs(linalg.eigvalsh(_herm(diff)))))
    if theta == 2.0:
        rhs = 2.0 * math.sqrt(max(np.trace(B @ B @ (G + G2)).real, 0.0)) * math.sqrt(trace_norm)
        scale = max(1.0, rhs)
        return _slack_report(float(lhs), rhs, scale, theta=theta, trace_norm=trace_norm)
    lam, V = linalg.eigh(_herm(B))
    abs_pow = (V * np.abs(lam) ** theta) @ V.conj().T
    moment = max(np.trace(abs_pow @ (G + G2)).real, 0.0)
    denom = moment ** (1.0 / theta) * trace_norm ** (1.0 - 1.0 / theta)
    ratio = float(lhs / denom) if denom > 0 else 0.0
    return {"lhs": float(lhs), "theta": theta, "ratio": ratio, "trace_norm": trace_norm,
            "slack": 0.0, "passed": True, "flagged": bool(ratio >= ceiling)}


def _summary(A: np.ndarray, B: np.ndarray) -> Dict[str, np.ndarray]:
    fam = GibbsFamily(A, B)
    # grid sup only; the refined search may stop at a different iterate
    a = max(abs(fam.mean_b(t)) for t in np.linspace(-1.0, 1.0, SUP_GRID))
    return {
        "state": fam.state(0.0),
        "state_t": fam.state(0.5),
        "tr_b2": np.array(fam.expect(B @ B, 0.0)),
        "duhamel": np.array(fam.duhamel(0.0)),
        "double_commutator": np.array(fam.double_commutator(0.0)),
        "a": np.array(a),
        "z_ratio": np.array([fam.z_ratio(t) for t in (-1.0, 1.0)]),
    }


def check_scale_covariance(A: np.ndarray, B: np.ndarray, c: float = 3.7) -> Dict:
    """(A + cI, B) leaves Γ_t and every normalised reported quantity unchanged."""
    first = _summary(A, B)
    second = _summary(A + c * np.eye(len(A)), B)
    errors = {k: float(np.max(np.abs(first[k] - second[k]))) for k in first}
    scale = max(1.0, max(float(np.max(np.abs(v))) for v in first.values()))
    worst = max(errors.values())
    return {"errors": errors, "worst": worst, "slack": -worst,
            "passed": bool(worst <= 1e-12 * scale * max(1.0, abs(c)))}


# ---------------------------------------------------------------------------
# Ensemble
# ---------------------------------------------------------------------------

HARD_CHECKS = (
    "falk_bruch", "key_estimate", "stahl", "derivatives", "second_order",
    "trace_comparison", "commuting_higher_order", "higher_order", "scale_covariance",
)


def evaluate_pair(d: int, seed: np.random.SeedSequence, oracle: bool = False,
                  ceiling: float = RATIO_CEILING) -> Dict[str, Dict]:
    """Run every check on one seeded random pair of dimension ``d``."""
    rng = np.random.default_rng(seed)
    A = random_hermitian(d, rng)
    B = random_hermitian(d, rng)
    results = {
        "falk_bruch": check_falk_bruch(A, B),
        "key_estimate": check_key_estimate(A, B),
        "stahl": check_stahl(A, B),
        "derivatives": check_derivatives(A, B),
        "second_order": check_second_order_bound(A, B),
        "higher_order": check_higher_order_bound(A, B, ceiling=ceiling),
        "scale_covariance": check_scale_covariance(A, B),
    }
    G, G2 = random_density(d, rng), random_density(d, rng)
    results["trace_comparison"] = check_trace_comparison(G, G2, B)
    results["trace_comparison_theta3"] = check_trace_comparison(G, G2, B, theta=3.0,
                                                                ceiling=ceiling)
    Ac, Bc, Xc = random_commuting_triple(d, rng, nonnegative=True)
    results["commuting_higher_order"] = check_higher_order_bound(Ac, Bc, Xc, alpha=1.0,
                                                                 ceiling=ceiling)
    if oracle:
        closed = GibbsFamily(A, B).duhamel(0.0)
        quad = duhamel_quadrature(A, B)
        err = abs(closed - quad) / max(1.0, abs(closed))
        results["duhamel_quadrature"] = {"error": err, "slack": -err, "passed": bool(err <= 1e-10)}
    return results


def init_worker(level: int):
    """Worker initializer: carry the parent's log level into the process."""
    logging.getLogger("bose_gibbs").setLevel(level)


def run_one(task: Tuple[int, int, np.random.SeedSequence, bool, float]):
    index, d, seed, oracle, ceiling = task
    return index, d, evaluate_pair(d, seed, oracle=oracle, ceiling=ceiling)


def _aggregate(records: List[Tuple[int, int, Dict[str, Dict]]]) -> Dict:
    checks: Dict[str, Dict] = {}
    ratios: Dict[str, List[float]] = {}
    counterexamples: List[Dict] = []
    for index, d, results in records:
        for name, rep in results.items():
            entry = checks.setdefault(
                name, {"evaluated": 0, "violations": 0, "worst_slack": math.inf, "flags": 0}
            )
            entry["evaluated"] += 1
            entry["worst_slack"] = min(entry["worst_slack"], float(rep.get("slack", 0.0)))
            if not rep["passed"]:
                entry["violations"] += 1
                if len(counterexamples) < 10:
                    counterexamples.append({"index": index, "dim": d, "check": name,
                                            "slack": rep.get("slack")})
            if rep.get("flags") or rep.get("flagged"):
                entry["flags"] += 1
            for key, value in rep.get("ratios", {}).items():
                ratios.setdefault(f"{name}.{key}", []).append(value)
            if "ratio" in rep:
                ratios.setdefault(name, []).append(rep["ratio"])
    histograms = {}
    for name, values in sorted(ratios.items()):
        arr = np.asarray(values, dtype=float)
        logs = np.log10(np.clip(arr[arr > 0], 10.0 ** LOG_RATIO_BINS[0], None))
        counts, edges = np.histogram(logs, bins=LOG_RATIO_BINS)
        histograms[name] = {"log10_edges": edges.tolist(), "counts": counts.tolist(),
                            "max": float(arr.max()) if arr.size else 0.0}
    violations = sum(c["violations"] for c in checks.values())
    worst = min((c["worst_slack"] for c in checks.values()), default=0.0)
    return {
        "checks": checks,
        "violations": violations,
        "worst_slack": worst,
        "ratio_histograms": histograms,
        "counterexamples": counterexamples,
        "passed": violations == 0,
    }


def run_ensemble(
    dims: Iterable[int],
    count: int,
    seed: int,
    workers: int = 0,
    oracle_count: int = 10,
    ceiling: float = RATIO_CEILING,
) -> Dict:
    """
    ``count`` seeded random pairs per dimension. Each pair has its own
    SeedSequence child, and results are gathered back into submission order,
    so the report does not depend on ``workers`` (0 or 1 runs in-process).
    """
    dims = list(dims)
    if not dims or min(dims) < 2 or max(dims) > MAX_DIM:
        raise DomainError(f"dimensions must lie in [2, {MAX_DIM}], got {dims}")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    children = np.random.SeedSequence(seed).spawn(len(dims) * count)
    tasks = [
        (i, d, children[i], (i % count) < oracle_count, ceiling)
        for i, d in enumerate(d for d in dims for _ in range(count))
    ]
    records: List = [None] * len(tasks)
    total = len(tasks)
    if workers and workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=init_worker,
            initargs=(logging.getLogger("bose_gibbs").level,),
        ) as executor:
            futures = [executor.submit(run_one, task) for task in tasks]
            for done, fut in enumerate(as_completed(futures), 1):
                index, d, results = fut.result()
                records[index] = (index, d, results)
                if done % max(1, total // 10) == 0:
                    logger.info("Progress: %d/%d (%.1f%%)", done, total, done / total * 100)
    else:
        for task in tasks:
            index, d, results = run_one(task)
            records[index] = (index, d, results)
    report = _aggregate(records)
    report.update(dims=dims, count=count, seed=seed)
    logger.info("Inequality ensemble: %d pairs, %d violations, worst slack %.3e",
                total, report["violations"], report["worst_slack"])
    return report
