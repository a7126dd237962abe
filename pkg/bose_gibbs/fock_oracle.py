"""
fock_oracle.py
--------------

Brute-force truncated Fock space over a handful of momentum modes.

Builds coherent states, thermal Bogoliubov pair states and the reference
state ∫|z⟩⟨z| ⊗ G^Bog(z) g(z)dz on a (zero mode + one ±p pair) space, and
reads ground-truth correlators off them for the formula modules.

Basis vectors are occupation tuples in C order over the mode list, so with
modes (0, p, -p) and cutoff M the index is n0·(M+1)² + n_p·(M+1) + n_{-p}.
Operators are scipy.sparse CSR matrices; matrix exponentials go through
Hermitian eigendecompositions.
"""

from dataclasses import dataclass
from functools import cached_property, reduce
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse, special, stats

from .bogoliubov import BogoliubovMode, mode_from_coefficients
from .common.errors import DomainError, ResourceError, TruncationError
from .condensate import continuous_theory
from .density_matrices import CONDENSED, CorrelatorInputs, two_pdm
from .distributions import Mixing, PointMass
from .lattice import VhatTable

logger = logging.getLogger(__name__)

Vector = Tuple[int, int, int]
ZERO: Vector = (0, 0, 0)

DEFAULT_DIM_LIMIT = 4096
SPARSE_DIM_LIMIT = 1 << 16
ONSAGER_DIM_LIMIT = 1024
MAX_MODES = 5
COHERENT_PAD = 40
PAIR_PAD = 12
STATE_FLOOR = -1e-10


def _ladder(n_max: int) -> sparse.csr_matrix:
    """Single-mode annihilation operator on occupations 0..n_max."""
    return sparse.diags(
        np.sqrt(np.arange(1, n_max + 1, dtype=float)), offsets=1,
        shape=(n_max + 1, n_max + 1), format="csr",
    )


def _dagger(op):
    return op.conj().T.tocsr()


class TruncatedFock:
    """
    Fock space of a few modes with per-mode occupation cutoffs.

    Args:
        modes: momentum vectors (integer triples); (0, 0, 0) is the zero mode
        cutoffs: n_max per mode, or one value for all
        dim_limit: largest dimension handed to a dense eigensolver
        sparse_only: admit dimensions up to SPARSE_DIM_LIMIT for spaces that
            only carry sparse, number-conserving states
    """

    def __init__(
        self,
        modes: Sequence[Vector],
        cutoffs: Union[int, Sequence[int]],
        dim_limit: int = DEFAULT_DIM_LIMIT,
        sparse_only: bool = False,
    ):
        self.modes: Tuple[Vector, ...] = tuple(tuple(int(c) for c in m) for m in modes)
        if not self.modes or len(set(self.modes)) != len(self.modes):
            raise DomainError(f"modes must be distinct and non-empty, got {modes}")
        if len(self.modes) > MAX_MODES:
            raise DomainError(f"at most {MAX_MODES} modes, got {len(self.modes)}")
        if isinstance(cutoffs, int):
            cutoffs = [cutoffs] * len(self.modes)
        self.cutoffs = tuple(int(c) for c in cutoffs)
        if len(self.cutoffs) != len(self.modes) or min(self.cutoffs) < 1:
            raise DomainError(f"need one cutoff >= 1 per mode, got {cutoffs}")
        self.shape = tuple(c + 1 for c in self.cutoffs)
        self.dim = int(np.prod(self.shape))
        self.dim_limit = dim_limit
        self.sparse_only = sparse_only
        ceiling = max(dim_limit, SPARSE_DIM_LIMIT) if sparse_only else dim_limit
        if self.dim > ceiling:
            raise ResourceError(f"Fock dimension {self.dim} exceeds the limit {ceiling}")
        self._ops: Dict[Vector, sparse.csr_matrix] = {}

    @classmethod
    def pair_space(
        cls,
        n_zero: int,
        n_pair: int,
        p: Vector = (1, 0, 0),
        dim_limit: int = DEFAULT_DIM_LIMIT,
        sparse_only: bool = False,
    ) -> "TruncatedFock":
        minus = tuple(-c for c in p)
        return cls([ZERO, p, minus], [n_zero, n_pair, n_pair], dim_limit=dim_limit,
                   sparse_only=sparse_only)

    def __repr__(self) -> str:
        return f"TruncatedFock(modes={self.modes}, cutoffs={self.cutoffs}, dim={self.dim})"

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, n_modes) occupation numbers of every basis vector."""
        return np.stack(np.unravel_index(np.arange(self.dim), self.shape), axis=1)

    @cached_property
    def total_occupation(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def has_mode(self, mode: Vector) -> bool:
        return tuple(mode) in self.modes

    def mode_index(self, mode: Vector) -> int:
        mode = tuple(int(c) for c in mode)
        if mode not in self.modes:
            raise DomainError(f"mode {mode} is not part of {self}")
        return self.modes.index(mode)

    def index(self, occupations: np.ndarray) -> np.ndarray:
        """Basis index of occupation rows shaped (..., n_modes)."""
        occ = np.asarray(occupations)
        return np.ravel_multi_index(tuple(np.moveaxis(occ, -1, 0)), self.shape)

    def annihilation(self, mode: Vector) -> sparse.csr_matrix:
        k = self.mode_index(mode)
        key = self.modes[k]
        if key not in self._ops:
            factors = [sparse.identity(s, format="csr") for s in self.shape]
            factors[k] = _ladder(self.cutoffs[k])
            self._ops[key] = reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors)
        return self._ops[key]

    def creation(self, mode: Vector) -> sparse.csr_matrix:
        return _dagger(self.annihilation(mode))

    def number(self, mode: Vector) -> sparse.csr_matrix:
        k = self.mode_index(mode)
        return sparse.diags(self.occupations[:, k].astype(float), format="csr")

    def total_number(self) -> sparse.csr_matrix:
        return sparse.diags(self.total_occupation.astype(float), format="csr")

    def top_level_mask(self, modes: Optional[Sequence[Vector]] = None) -> np.ndarray:
        """Basis vectors with some mode (of ``modes``) at its cutoff."""
        idx = range(len(self.modes)) if modes is None else [self.mode_index(m) for m in modes]
        mask = np.zeros(self.dim, dtype=bool)
        for k in idx:
            mask |= self.occupations[:, k] == self.cutoffs[k]
        return mask


def commutator_defect(space: TruncatedFock, mode: Vector) -> Dict[str, float]:
    """
    [a, a†] - 1 off and on the top occupation level of ``mode``. The first is
    exactly zero; the second is the truncation artifact -(n_max + 1).
    """
    a = space.annihilation(mode)
    defect = (a @ _dagger(a) - _dagger(a) @ a - sparse.identity(space.dim)).tocsr()
    top = space.top_level_mask([mode])
    diag = defect.diagonal()
    off_diag = abs(defect - sparse.diags(diag)).max() if defect.nnz else 0.0
    return {
        "off_top": float(max(np.max(np.abs(diag[~top]), initial=0.0), off_diag)),
        "top": float(np.min(diag[top])),
    }


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class OracleState:
    """A trace-normalised state on a truncated space, mixed (``rho``) or pure (``vector``)."""

    space: TruncatedFock
    rho: Optional[sparse.csr_matrix] = None
    vector: Optional[np.ndarray] = None
    truncation: float = 0.0
    label: str = ""

    def density(self) -> sparse.csr_matrix:
        if self.rho is not None:
            return self.rho
        v = sparse.csr_matrix(self.vector.reshape(-1, 1))
        return (v @ _dagger(v)).tocsr()

    def expect(self, op) -> complex:
        """Tr[op ρ]."""
        if self.vector is not None:
            return complex(np.vdot(self.vector, op @ self.vector))
        return complex(op.multiply(self.rho.T).sum())

    def trace(self) -> float:
        if self.vector is not None:
            return float(np.vdot(self.vector, self.vector).real)
        return float(self.rho.diagonal().sum().real)

    def number_commutator(self) -> float:
        """max |[ρ, 𝒩]_{ij}|."""
        n = self.space.total_occupation
        if self.vector is not None:
            nz = np.nonzero(np.abs(self.vector) > 0)[0]
            v = np.abs(self.vector[nz])
            return float(np.max(np.outer(v, v) * np.abs(n[nz][:, None] - n[nz][None, :])))
        coo = self.rho.tocoo()
        if not coo.nnz:
            return 0.0
        return float(np.max(np.abs(coo.data * (n[coo.col] - n[coo.row]))))

    def hermiticity_error(self) -> float:
        if self.vector is not None:
            return 0.0
        diff = self.rho - _dagger(self.rho)
        return float(abs(diff).max()) if diff.nnz else 0.0

    def eigenvalues(self) -> np.ndarray:
        if self.vector is not None:
            return np.concatenate(([self.trace()], np.zeros(self.space.dim - 1)))
        return _hermitian_eigenvalues(self.rho, self.space)

    def check(self, floor: float = STATE_FLOOR, trace_tol: float = 1e-10) -> Dict[str, float]:
        eig = self.eigenvalues()
        report = {
            "trace": self.trace(),
            "min_eigenvalue": float(np.min(eig)),
            "hermiticity": self.hermiticity_error(),
            "number_commutator": self.number_commutator(),
            "truncation": self.truncation,
        }
        report["passed"] = bool(
            abs(report["trace"] - 1.0) <= trace_tol
            and report["min_eigenvalue"] > floor
            and report["hermiticity"] <= 1e-12
        )
        return report


def _hermitian_eigenvalues(matrix: sparse.spmatrix, space: TruncatedFock) -> np.ndarray:
    """Eigenvalues, block by block in the particle number when ``matrix`` conserves it."""
    n = space.total_occupation
    coo = matrix.tocoo()
    conserving = not coo.nnz or np.all(n[coo.row] == n[coo.col])
    if conserving:
        csr = matrix.tocsr()
        out = []
        for value in np.unique(n):
            idx = np.nonzero(n == value)[0]
            block = csr[idx][:, idx].toarray()
            out.append(linalg.eigvalsh(block))
        return np.concatenate(out)
    if space.dim > space.dim_limit:
        raise ResourceError(f"dense eigensolve of dimension {space.dim} above the limit")
    return linalg.eigvalsh(matrix.toarray())


def _embed_zero_mode(space: TruncatedFock, amplitudes: np.ndarray) -> np.ndarray:
    k0 = space.mode_index(ZERO)
    occ = np.zeros((len(amplitudes), len(space.modes)), dtype=np.int64)
    occ[:, k0] = np.arange(len(amplitudes))
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(occ)] = amplitudes
    return vec


def coherent_state(space: TruncatedFock, z: complex) -> OracleState:
    """
    exp(z a0† - z̄ a0)Ω on the zero mode, the other modes empty.

    The unitary is built on a padded single-mode space and projected back,
    then renormalised; the Poisson mass above the cutoff is the truncation
    certificate.
    """
    k0 = space.mode_index(ZERO)
    n_max = space.cutoffs[k0]
    x = abs(z) ** 2
    if x > n_max / 4.0:
        raise TruncationError(f"|z|² = {x:.4g} is above n_max/4 = {n_max / 4:.4g}")
    d = n_max + 1 + COHERENT_PAD
    a = _ladder(d - 1).toarray()
    generator = z * a.conj().T - np.conj(z) * a
    w, V = linalg.eigh(1j * generator)
    column = V @ (np.exp(-1j * w) * np.conj(V[0, :]))
    amp = column[: n_max + 1]
    amp = amp / np.linalg.norm(amp)
    leak = float(stats.poisson.sf(n_max, x))
    logger.debug("Coherent state |z|²=%.4g on n_max=%d, leak %.2e", x, n_max, leak)
    return OracleState(space, vector=_embed_zero_mode(space, amp), truncation=leak,
                       label="coherent")


def coherent_eigen_error(state: OracleState, z: complex) -> float:
    """max |(a0 ψ - zψ)_n| over basis vectors below the zero-mode cutoff."""
    space = state.space
    k0 = space.mode_index(ZERO)
    below = space.occupations[:, k0] < space.cutoffs[k0]
    residual = space.annihilation(ZERO) @ state.vector - z * state.vector
    return float(np.max(np.abs(residual[below])))


def _pair_modes(space: TruncatedFock) -> Tuple[Vector, Vector]:
    others = [m for m in space.modes if m != ZERO]
    if len(others) != 2 or others[1] != tuple(-c for c in others[0]):
        raise DomainError(f"expected one ±p pair besides the zero mode, got {others}")
    return others[0], others[1]


def _pair_gibbs(
    pair_space: TruncatedFock, beta: float, A: float, B: float, phase: complex = 1.0
) -> Tuple[np.ndarray, float]:
    """
    e^{-βH}/Z for H = A(n_p + n_{-p}) + B(φ² a_p† a_{-p}† + φ̄² a_p a_{-p}),
    φ = phase/|phase|.

    H is diagonalised PAIR_PAD levels above the cutoffs and the Gibbs matrix
    is projected back, so a coarser space sees the projection of a finer
    one. Returns the renormalised projection and the mass projected away.
    """
    p, m = pair_space.modes
    padded = TruncatedFock([p, m], [c + PAIR_PAD for c in pair_space.cutoffs],
                           dim_limit=max(pair_space.dim_limit, DEFAULT_DIM_LIMIT))
    ap, am = padded.annihilation(p), padded.annihilation(m)
    ph2 = (phase / abs(phase)) ** 2
    H = A * (_dagger(ap) @ ap + _dagger(am) @ am) + B * (
        ph2 * (_dagger(ap) @ _dagger(am)) + np.conj(ph2) * (ap @ am)
    )
    w, V = linalg.eigh(H.toarray())
    weights = np.exp(-beta * (w - w[0]))
    weights /= weights.sum()
    full = (V * weights) @ V.conj().T

    occ = padded.occupations
    inside = np.all(occ <= np.asarray(pair_space.cutoffs), axis=1)
    src = np.nonzero(inside)[0]
    dst = pair_space.index(occ[inside])
    rho = np.zeros((pair_space.dim, pair_space.dim), dtype=full.dtype)
    rho[np.ix_(dst, dst)] = full[np.ix_(src, src)]
    kept = float(np.real(np.trace(rho)))
    return rho / kept, 1.0 - kept


def thermal_bog_state(
    space: TruncatedFock,
    pair: Tuple[Vector, Vector],
    beta: float,
    A: float,
    B: float,
    phase: complex = 1.0,
) -> OracleState:
    """
    Gibbs state of the two-mode Bogoliubov Hamiltonian on the ±p pair of
    ``space``. Tr[a_p† a_p ·] = γ and Tr[a_p a_{-p} ·] = φ²α with φ = phase/|phase|.
    """
    if not A > B >= 0 or not beta > 0:
        raise DomainError(f"need A > B >= 0 and beta > 0, got A={A}, B={B}, beta={beta}")
    p, m = (tuple(int(c) for c in v) for v in pair)
    if m != tuple(-c for c in p):
        raise DomainError(f"pair modes must be ±p, got {p}, {m}")
    cuts = [space.cutoffs[space.mode_index(p)], space.cutoffs[space.mode_index(m)]]
    mode = mode_from_coefficients(A - B, B, beta)
    if mode.gamma > min(cuts) / 4.0:
        raise TruncationError(f"occupation {mode.gamma:.4g} is above n_max/4 = {min(cuts) / 4:.4g}")
    pair_space = TruncatedFock([p, m], cuts, dim_limit=space.dim_limit)
    rho, tail = _pair_gibbs(pair_space, beta, A, B, phase)
    logger.debug("Thermal pair state A=%.4g B=%.4g beta=%.4g, projected mass %.2e",
                 A, B, beta, tail)
    return OracleState(pair_space, rho=sparse.csr_matrix(rho), truncation=tail,
                       label="thermal_pair")


def reference_state(
    space: TruncatedFock,
    mixing: Mixing,
    mode: Optional[BogoliubovMode] = None,
    drop: float = 1e-18,
) -> OracleState:
    """
    Γ = ∫|z⟩⟨z| ⊗ G^Bog(z) g(z)dz, z = √x e^{iθ}, x drawn from ``mixing``.

    The θ-average is done exactly: with G^Bog(θ) = D_θ G^Bog(0) D_θ†,
    D_θ = e^{iθ𝒩+}, it keeps the entries with n0 + 𝒩+ = n0' + 𝒩+' and
    leaves K[n0, n0'] = E[e^{-x} x^{(n0+n0')/2}]/√(n0! n0'!) in front of
    them. The result is block diagonal in the particle number and stored
    sparse.
    """
    k0 = space.mode_index(ZERO)
    n0 = space.cutoffs[k0]
    if mixing.mean > n0 / 4.0:
        raise TruncationError(f"condensate mean {mixing.mean:.4g} is above n_max/4 = {n0 / 4:.4g}")

    kk = np.arange(2 * n0 + 1, dtype=float)
    radial = np.real(np.asarray(mixing.expect(
        lambda x: np.exp(special.xlogy(0.5 * kk[:, None], x[None, :]) - x[None, :])
    )))
    lf = special.gammaln(np.arange(n0 + 1) + 1.0)
    m_idx = np.arange(n0 + 1)
    K = radial[m_idx[:, None] + m_idx[None, :]] * np.exp(-0.5 * (lf[:, None] + lf[None, :]))

    if len(space.modes) == 1:
        G0, tail = np.ones((1, 1)), 0.0
        pair_occ = np.zeros((1, 0), dtype=np.int64)
        pair_idx: List[int] = []
    else:
        if mode is None:
            raise DomainError("a ±p pair needs the Bogoliubov mode it carries")
        p, m = _pair_modes(space)
        pair_idx = [space.mode_index(p), space.mode_index(m)]
        pair_space = TruncatedFock([p, m], [space.cutoffs[i] for i in pair_idx],
                                   dim_limit=space.dim_limit)
        G0, tail = _pair_gibbs(pair_space, mode.beta, mode.A, mode.B)
        pair_occ = pair_space.occupations

    if pair_occ.shape[1]:
        n_pair = pair_occ.sum(axis=1)
        charge = pair_occ[:, 0] - pair_occ[:, 1]
    else:
        n_pair = charge = np.zeros(1, dtype=np.int64)
    # G^Bog conserves momentum, so only equal n_p - n_{-p} entries survive
    keep = (np.abs(G0) > drop * np.abs(G0).max()) & (charge[:, None] == charge[None, :])
    S, T = np.nonzero(keep)
    g_vals = G0[S, T]
    shift = n_pair[S] - n_pair[T]
    m_col = m_idx[:, None] + shift[None, :]
    ok = (m_col >= 0) & (m_col <= n0)
    mi, li = np.nonzero(ok)
    mj = m_col[mi, li]

    def full_index(zero_occ: np.ndarray, pair_rows: np.ndarray) -> np.ndarray:
        occ = np.zeros((len(zero_occ), len(space.modes)), dtype=np.int64)
        occ[:, k0] = zero_occ
        for j, k in enumerate(pair_idx):
            occ[:, k] = pair_occ[pair_rows, j]
        return space.index(occ)

    rows = full_index(mi, S[li])
    cols = full_index(mj, T[li])
    data = K[mi, mj] * g_vals[li]
    gamma = sparse.csr_matrix((data, (rows, cols)), shape=(space.dim, space.dim))
    trace = float(np.real(gamma.diagonal().sum()))
    gamma = gamma / trace
    leak = 1.0 - trace
    logger.info(
        "Reference state on %s: mixing mean %.4g, zero-mode leak %.2e, pair tail %.2e, nnz %d",
        space.cutoffs, mixing.mean, leak, tail, gamma.nnz,
    )
    return OracleState(space, rho=gamma.tocsr(), truncation=abs(leak) + tail, label="reference")


# ---------------------------------------------------------------------------
# Correlators
# ---------------------------------------------------------------------------

ORACLE_PATTERNS = {
    "n0": "ad(0) a(0)",
    "n0_sq": "ad(0) ad(0) a(0) a(0)",
    "n0_np": "ad(0) ad(p) a(0) a(p)",
    "pair_transfer": "ad(0) ad(0) a(p) a(-p)",
    "pp_pp": "ad(p) ad(p) a(p) a(p)",
    "pair_pair": "ad(p) ad(-p) a(p) a(-p)",
}


def _pattern_operators(space: TruncatedFock, p: Vector) -> Dict[str, sparse.csr_matrix]:
    """The operators behind ORACLE_PATTERNS that fit on ``space``."""
    minus = tuple(-c for c in p)
    ap, am = space.annihilation(p), space.annihilation(minus)
    ops: Dict[str, sparse.csr_matrix] = {}
    if space.has_mode(ZERO):
        a0 = space.annihilation(ZERO)
        d0 = _dagger(a0)
        ops["n0"] = d0 @ a0
        ops["n0_sq"] = d0 @ d0 @ a0 @ a0
        ops["n0_np"] = d0 @ _dagger(ap) @ a0 @ ap
        ops["pair_transfer"] = d0 @ d0 @ ap @ am
    ops["pp_pp"] = _dagger(ap) @ _dagger(ap) @ ap @ ap
    ops["pair_pair"] = _dagger(ap) @ _dagger(am) @ ap @ am
    return ops


def oracle_correlators(state: OracleState, p: Vector = (1, 0, 0)) -> Dict[str, complex]:
    """
    The six condensed 2-pdm lines, ⟨𝒩+⟩, Var(𝒩+), γ_p and ⟨a_p a_{-p}⟩ of a
    state; zero-mode lines are skipped when the space has no zero mode.
    """
    space = state.space
    minus = tuple(-c for c in p)
    np_, nm = space.number(p), space.number(minus)

    def real(op) -> float:
        return float(np.real(state.expect(op)))

    out: Dict[str, complex] = {name: real(op) for name, op in _pattern_operators(space, p).items()}
    n_plus = np_ + nm
    mean_plus = real(n_plus)
    out["n_plus"] = mean_plus
    out["var_n_plus"] = real(n_plus @ n_plus) - mean_plus ** 2
    out["gamma_p"] = real(np_)
    out["pair_amplitude"] = state.expect(space.annihilation(p) @ space.annihilation(minus))
    return out


def truncation_certificates(
    fine: OracleState, coarse: TruncatedFock, p: Vector = (1, 0, 0)
) -> Dict[str, float]:
    """
    Per-line bounds on |⟨O⟩_coarse - ⟨O⟩_fine| when the coarse state is
    PρP/(1 - t), ρ the fine state, P the projection onto the coarse cutoffs
    and t = Tr[ρQ], Q = 1 - P.

    Cauchy-Schwarz on the two off-block pieces of Tr[ρO] - Tr[PρPO] gives
        (√(t⟨O†QO⟩) + √(t⟨POQO†P⟩) + t|⟨O⟩|) / (1 - t),
    every expectation taken in the fine state. The weight O†O carries the
    degree of O.
    """
    space = fine.space
    if set(space.modes) != set(coarse.modes):
        raise DomainError(f"{coarse} and {space} carry different modes")
    limits = np.array([coarse.cutoffs[coarse.mode_index(m)] for m in space.modes])
    if np.any(limits > np.asarray(space.cutoffs)):
        raise DomainError(f"{coarse} is not coarser than {space}")
    outside = np.any(space.occupations > limits, axis=1)
    Q = sparse.diags(outside.astype(float), format="csr")
    P = sparse.diags((~outside).astype(float), format="csr")

    def real(op) -> float:
        return max(float(np.real(fine.expect(op))), 0.0)

    t = real(Q)
    if t >= 1.0:
        raise TruncationError(f"the fine state has no mass below the cutoffs {coarse.cutoffs}")
    out: Dict[str, float] = {}
    for name, op in _pattern_operators(space, p).items():
        dag = _dagger(op)
        inward = real(dag @ Q @ op)
        outward = real(P @ op @ Q @ dag @ P)
        out[name] = (math.sqrt(t * inward) + math.sqrt(t * outward)
                     + t * abs(fine.expect(op))) / (1.0 - t)
    logger.debug("Truncation certificates %s -> %s (t=%.2e): %s",
                 space.cutoffs, coarse.cutoffs, t, out)
    return out


def predicted_correlators(
    mixing: Mixing, mode: BogoliubovMode, p: Vector = (1, 0, 0)
) -> Dict[str, float]:
    """The same lines from the closed forms of ``density_matrices``."""
    second = mixing.variance + mixing.mean ** 2
    inputs = CorrelatorInputs(
        regime=CONDENSED,
        n0_first=mixing.mean,
        n0_second=second,
        gamma=lambda k: mode.gamma,
        alpha=lambda k: mode.alpha,
    )
    out = {
        name: two_pdm(None, pattern, bindings={"p": p}, inputs=inputs).value
        for name, pattern in ORACLE_PATTERNS.items()
    }
    out["n_plus"] = 2.0 * mode.gamma
    out["var_n_plus"] = 2.0 * (mode.alpha ** 2 + mode.gamma ** 2 + mode.gamma)
    out["gamma_p"] = mode.gamma
    return out


# ---------------------------------------------------------------------------
# Operator inequalities
# ---------------------------------------------------------------------------


def onsager_check(
    space: TruncatedFock,
    vhat: Union[VhatTable, Callable[[Vector], float]],
    eta: float,
    dim_limit: int = ONSAGER_DIM_LIMIT,
    floor: float = -1e-9,
) -> Dict[str, float]:
    """
    Smallest eigenvalue of 𝒱_η - v̂(0)𝒩²/(2η) + v(0)𝒩/(2η) on the truncated
    space, with 𝒱_η = (1/2η) Σ v̂(r) a†_{p+r} a†_{q-r} a_q a_p over the
    transfers between included modes and v(0) = Σ v̂(r) over those transfers.
    """
    if space.dim > dim_limit:
        raise ResourceError(f"Onsager check needs dim <= {dim_limit}, got {space.dim}")
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    v = vhat.at if isinstance(vhat, VhatTable) else vhat
    modes = [np.asarray(m) for m in space.modes]
    included = set(space.modes)
    transfers = sorted({tuple(int(c) for c in k - l) for k in modes for l in modes})
    for r in transfers:
        if v(r) != v(tuple(-c for c in r)):
            logger.warning("v̂ is not even on transfer %s; the check assumes it is", r)

    V = sparse.csr_matrix((space.dim, space.dim))
    for p in space.modes:
        for q in space.modes:
            for r in transfers:
                coef = v(r)
                if coef == 0:
                    continue
                out1 = tuple(a + b for a, b in zip(p, r))
                out2 = tuple(a - b for a, b in zip(q, r))
                if out1 not in included or out2 not in included:
                    continue
                V = V + coef * (space.creation(out1) @ space.creation(out2)
                                @ space.annihilation(q) @ space.annihilation(p))
    V = V / (2.0 * eta)
    N = space.total_number()
    vhat0 = v(ZERO)
    v0_sum = float(sum(v(r) for r in transfers))
    op = V - vhat0 * (N @ N) / (2.0 * eta) + v0_sum * N / (2.0 * eta)
    dense = op.toarray()
    min_eig = float(linalg.eigvalsh(0.5 * (dense + dense.conj().T))[0])
    logger.info("Onsager check on %s: min eigenvalue %.3e", space, min_eig)
    return {
        "min_eigenvalue": min_eig,
        "passed": min_eig >= floor,
        "vhat0": vhat0,
        "v0_transfers": v0_sum,
        "eta": eta,
        "dim": space.dim,
        "interaction_norm": float(abs(V).max()) if V.nnz else 0.0,
    }


def _trace_norm(diff: sparse.spmatrix, space: TruncatedFock) -> float:
    return float(np.sum(np.abs(_hermitian_eigenvalues(diff, space))))


def trace_comparison_on_states(
    first: OracleState, second: OracleState, op: sparse.spmatrix
) -> Dict[str, float]:
    """|Tr[B(G - G')]| <= 2 √(Tr[B²(G + G')]) √(Tr|G - G'|) for B = ``op``."""
    if first.space is not second.space and first.space.shape != second.space.shape:
        raise DomainError("states live on different spaces")
    G, H = first.density(), second.density()
    diff = (G - H).tocsr()
    lhs = abs(complex(op.multiply(diff.T).sum()))
    op2 = op @ op
    second_moment = float(np.real(op2.multiply((G + H).T).sum()))
    norm = _trace_norm(diff, first.space)
    rhs = 2.0 * math.sqrt(max(second_moment, 0.0)) * math.sqrt(norm)
    return {"lhs": lhs, "rhs": rhs, "trace_norm": norm, "passed": lhs <= rhs * (1 + 1e-12) + 1e-14}


# ---------------------------------------------------------------------------
# Cross-check battery
# ---------------------------------------------------------------------------


def _entry(name: str, oracle: float, predicted: float, tol: float) -> Dict:
    deviation = abs(oracle - predicted)
    return {
        "name": name,
        "oracle": oracle,
        "predicted": predicted,
        "deviation": deviation,
        "tolerance": tol,
        "passed": bool(deviation <= tol),
    }


def run_battery(
    n_zero: int = 20,
    n_pair: int = 20,
    beta: float = 1.0,
    h: float = 1.0,
    mu: float = 2.0,
    A: float = 5.0,
    B: float = 4.0,
    tol: float = 1e-5,
    convergence: bool = True,
    seed: int = 0,
    dim_limit: int = DEFAULT_DIM_LIMIT,
) -> Dict:
    """
    Every oracle cross-check on toy parameters: reference-state correlators
    against the closed forms, the thermal pair state against γ and α, the
    coherent state, the pairing phase, the Onsager bound, the trace
    comparison inequality and cutoff convergence.
    """
    checks: List[Dict] = []
    p: Vector = (1, 0, 0)
    mixing = continuous_theory(beta, h, mu)
    mode = mode_from_coefficients(A - B, B, beta)

    space = TruncatedFock.pair_space(n_zero, n_pair, p, dim_limit=dim_limit, sparse_only=True)
    ref = reference_state(space, mixing, mode)
    state_report = ref.check()
    checks.append({"name": "reference_state", "passed": state_report["passed"]
                   and state_report["number_commutator"] < 1e-8, **state_report})

    bound = max(tol, ref.truncation)
    oracle = oracle_correlators(ref, p)
    predicted = predicted_correlators(mixing, mode, p)
    for name, value in predicted.items():
        checks.append(_entry(f"reference.{name}", oracle[name], value, bound))

    thermal = thermal_bog_state(space, (p, tuple(-c for c in p)), beta, A, B)
    t_corr = oracle_correlators(thermal, p)
    t_bound = max(1e-6, thermal.truncation)
    checks.append(_entry("thermal.gamma", t_corr["gamma_p"], mode.gamma, t_bound))
    checks.append(_entry("thermal.alpha", float(np.real(t_corr["pair_amplitude"])),
                         mode.alpha, t_bound))
    theta = 0.7
    rotated = thermal_bog_state(space, (p, tuple(-c for c in p)), beta, A, B,
                                phase=np.exp(1j * theta))
    amp = oracle_correlators(rotated, p)["pair_amplitude"]
    checks.append(_entry("thermal.pairing_phase", abs(amp - np.exp(2j * theta) * mode.alpha),
                         0.0, t_bound))

    zero_space = TruncatedFock([ZERO], [24])
    z = math.sqrt(2.0) * np.exp(0.3j)
    coh = coherent_state(zero_space, z)
    checks.append(_entry("coherent.mean", float(np.real(coh.expect(zero_space.number(ZERO)))),
                         abs(z) ** 2, 1e-8))
    checks.append(_entry("coherent.eigen", coherent_eigen_error(coh, z), 0.0, 1e-8))

    rng = np.random.default_rng(seed)
    small = TruncatedFock.pair_space(4, 4, p)
    table = VhatTable({0: float(rng.random()), 1: float(rng.random()), 4: float(rng.random())})
    ons = onsager_check(small, table, eta=1.0)
    checks.append({"name": "onsager", **ons})

    point = reference_state(space, PointMass(mixing.mean), mode)
    comparison = trace_comparison_on_states(ref, point, space.total_number())
    checks.append({"name": "trace_comparison", **comparison})

    if convergence:
        half = TruncatedFock.pair_space(max(n_zero // 2, 4), max(n_pair // 2, 4), p,
                                        dim_limit=dim_limit, sparse_only=True)
        coarse = reference_state(half, mixing, mode)
        c_corr = oracle_correlators(coarse, p)
        certificates = truncation_certificates(ref, half, p)
        for name in ORACLE_PATTERNS:
            checks.append(_entry(f"convergence.{name}", c_corr[name], oracle[name],
                                 max(tol, certificates[name])))

    passed = all(c["passed"] for c in checks)
    worst = max((c.get("deviation", 0.0) for c in checks), default=0.0)
    logger.info("Oracle battery: %d checks, passed=%s, worst deviation %.2e",
                len(checks), passed, worst)
    return {"passed": passed, "worst_deviation": worst, "checks": checks}
