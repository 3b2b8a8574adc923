"""Mixing rates, their closed-form maxima, and the bound evaluators.

The mixing rate of an ensemble under a set of Hamiltonians is the time
derivative at t = 0 of the entropy of the evolving expected state,

    rate(E, H) = d/dt S(rho(t))|_0 = i * sum_x p(x) Tr(H_x [rho_x, ln rho]),

with rho the expected state and ln taken on its support. Maximizing each
term independently over -I <= H_x <= I gives the exact closed form

    max_rate(E) = sum_x p(x) * ||[rho_x, ln rho]||_1,

achieved by H_x = I - 2 P_neg where P_neg projects onto the negative
eigenspace of i[rho_x, ln rho]. A central finite difference of the entropy
serves as the independent oracle for the analytic derivative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import hermitian as hm
from .ensembles import (
    DensityMatrix,
    Ensemble,
    Hamiltonian,
    HamiltonianSet,
    average_entropy,
    binary_entropy,
    evolve,
    expected_state,
    shannon_entropy,
    von_neumann_entropy,
)
from .errors import (
    BadDistribution,
    DegenerateState,
    DimMismatch,
    DomainError,
    NotBinary,
    RankDeficient,
)

DEFAULT_RANK_TOL = 1e-12
DEFAULT_FD_STEP = 1e-4
IMAG_TOL = 1e-9
SUPPORT_LEAK_TOL = 1e-8


def _log_expected(E: Ensemble, rank_tol: float):
    """ln rho on its support, plus the kernel projector for leak checks."""
    rho = expected_state(E)
    w, V = hm.eig_hermitian(rho.matrix)
    cut = rank_tol * float(w[-1])
    supp = w > cut
    lw = np.zeros_like(w)
    lw[supp] = np.log(w[supp])
    ln_rho = hm.hermitian_part(hm.reconstruct(lw, V))
    Vk = V[:, ~supp]
    P_ker = Vk @ Vk.conj().T if Vk.shape[1] else None
    return ln_rho, P_ker, rho


def _check_support(E: Ensemble, P_ker) -> None:
    if P_ker is None:
        return
    for i, s in enumerate(E.states):
        leak = float(np.real(np.trace(P_ker @ s.matrix)))
        if leak > SUPPORT_LEAK_TOL:
            raise DegenerateState(
                f"member {i} leaks {leak:.3e} outside the support of rho"
            )


def _require_matching(E: Ensemble, H: HamiltonianSet) -> None:
    if len(H) != len(E):
        raise DimMismatch("need one Hamiltonian per ensemble member")
    if any(h.dim != E.dim for h in H.hams):
        raise DimMismatch("Hamiltonian dimension differs from ensemble dimension")


def mixing_rate(
    E: Ensemble,
    H: HamiltonianSet,
    rank_tol: float = DEFAULT_RANK_TOL,
    _ln_rho: Optional[np.ndarray] = None,
) -> float:
    """Analytic entropy derivative i * sum_x p(x) Tr(H_x [rho_x, ln rho]).

    `_ln_rho` lets a caller that evaluates many Hamiltonian sets against one
    ensemble reuse the support logarithm of the expected state.
    """
    _require_matching(E, H)
    if _ln_rho is None:
        ln_rho, P_ker, _ = _log_expected(E, rank_tol)
        _check_support(E, P_ker)
    else:
        ln_rho = _ln_rho
    total = 0j
    for p, s, h in zip(E.probabilities, E.states, H.hams):
        total += p * np.trace(h.matrix @ hm.commutator(s.matrix, ln_rho))
    val = 1j * total
    assert abs(val.imag) <= IMAG_TOL, f"imaginary residue {val.imag:.3e}"
    return float(val.real)


def fd_mixing_rate(
    E: Ensemble,
    H: HamiltonianSet,
    h: float = DEFAULT_FD_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    """Central finite difference [S(rho(h)) - S(rho(-h))] / 2h."""
    if h <= 0:
        raise DomainError("finite-difference step must be positive")
    _require_matching(E, H)
    w_min = float(np.linalg.eigvalsh(expected_state(E).matrix)[0])
    if w_min < 1e3 * rank_tol:
        raise RankDeficient(
            f"expected state eigenvalue {w_min:.3e} too small for finite differences"
        )
    s_plus = von_neumann_entropy(expected_state(evolve(E, H, h)))
    s_minus = von_neumann_entropy(expected_state(evolve(E, H, -h)))
    return (s_plus - s_minus) / (2.0 * h)


def fd_mixing_rate_richardson(
    E: Ensemble,
    H: HamiltonianSet,
    h: float = DEFAULT_FD_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    """Richardson-extrapolated central difference (oracle mode), error O(h^4)."""
    d1 = fd_mixing_rate(E, H, h, rank_tol)
    d2 = fd_mixing_rate(E, H, h / 2.0, rank_tol)
    return (4.0 * d2 - d1) / 3.0


def optimal_hamiltonians(E: Ensemble, rank_tol: float = DEFAULT_RANK_TOL) -> HamiltonianSet:
    """The maximizing Hamiltonians H_x = I - 2 P_neg(i[rho_x, ln rho]).

    Each H_x is a difference of complementary projectors (plus identity on
    the kernel of the commutator), so H_x^2 = I and ||H_x|| = 1, and
    mixing_rate(E, result) = +max_mixing_rate(E).
    """
    ln_rho, P_ker, _ = _log_expected(E, rank_tol)
    _check_support(E, P_ker)
    hams = []
    for s in E.states:
        A = hm.hermitian_part(1j * hm.commutator(s.matrix, ln_rho))
        tol = rank_tol * max(1.0, hm.frobenius(A))
        P_pos, P_neg = hm.spectral_sign_projectors(A, tol)
        hams.append(Hamiltonian(np.eye(E.dim) - 2.0 * P_neg, normalized=True))
    return HamiltonianSet(hams)


def max_mixing_rate(E: Ensemble, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Closed-form maximum sum_x p(x) ||[rho_x, ln rho]||_1 over -I <= H_x <= I."""
    ln_rho, P_ker, _ = _log_expected(E, rank_tol)
    _check_support(E, P_ker)
    total = 0.0
    for p, s in zip(E.probabilities, E.states):
        A = hm.hermitian_part(1j * hm.commutator(s.matrix, ln_rho))
        total += p * hm.trace_norm(A)
    return total


def binary_max_rate(E: Ensemble, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Two-member closed form p * ||[rho_1, ln rho]||_1 (only rho_2 evolves)."""
    if len(E) != 2:
        raise NotBinary(f"binary rate needs exactly 2 members, got {len(E)}")
    ln_rho, P_ker, _ = _log_expected(E, rank_tol)
    _check_support(E, P_ker)
    A = hm.hermitian_part(1j * hm.commutator(E.states[0].matrix, ln_rho))
    p = float(E.probabilities[0])
    return p * hm.trace_norm(A)


def bound_theorem_binary(p: float) -> float:
    """Dimension-independent binary bound 4 sqrt(p (1-p))."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p!r} outside [0, 1]")
    return 4.0 * math.sqrt(p * (1.0 - p))


def bound_theorem_general(probs: Sequence[float]) -> float:
    """General bound 4 * sum_{x != x0} sum_{y != x} sqrt(p_x p_y).

    x0 is the index of the largest probability; ties break to the lowest
    index (the bound value is tie-invariant).
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p <= 0) or abs(float(np.sum(p)) - 1.0) > 1e-10:
        raise BadDistribution("probabilities must be positive and sum to 1")
    x0 = int(np.argmax(p))
    sqrt_p = np.sqrt(p)
    total = 0.0
    for x in range(p.size):
        if x == x0:
            continue
        total += sqrt_p[x] * (np.sum(sqrt_p) - sqrt_p[x])
    return 4.0 * float(total)


@dataclass(frozen=True)
class StmPoint:
    """One time slice of the total-mixing sandwich check."""

    t: float
    entropy: float
    lower: float
    upper: float
    ok: bool


def stm_check(
    E: Ensemble, H: HamiltonianSet, ts: Sequence[float], slack: float = 1e-9
) -> list[StmPoint]:
    """Check avg_entropy(E) <= S(rho(t)) <= avg_entropy(E) + S(X) at each t."""
    _require_matching(E, H)
    lower = average_entropy(E)
    upper = lower + shannon_entropy(E.probabilities)
    out = []
    for t in ts:
        s = von_neumann_entropy(expected_state(evolve(E, H, float(t))))
        ok = (lower - slack <= s) and (s <= upper + slack)
        out.append(StmPoint(float(t), s, lower, upper, ok))
    return out


def ak_gap(A, B, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[float, float]:
    """The two sides of the commutator/entropy functional for f = ln.

    Returns (||[B, ln(A+B)]||_1, F(a+b) - F(a) - F(b)) for PSD A, B with
    a = Tr A, b = Tr B and F(x) = x ln x - x; the difference of F values
    reduces to (a+b) ln(a+b) - a ln a - b ln b (0 ln 0 := 0).
    """
    A = hm.require_hermitian(A)
    B = hm.require_hermitian(B)
    if A.shape != B.shape:
        raise DimMismatch("A and B must have equal dimensions")
    C = A + B
    w = np.linalg.eigvalsh(C)
    if w[0] <= rank_tol * max(float(w[-1]), 0.0):
        raise DomainError("A + B is rank-deficient beyond tolerance")
    ln_C = hm.matrix_fn(C, np.log)
    lhs = hm.trace_norm(hm.hermitian_part(1j * hm.commutator(B, ln_C)))
    alpha = float(np.real(np.trace(A)))
    beta = float(np.real(np.trace(B)))

    def xlnx(v: float) -> float:
        return v * math.log(v) if v > 0 else 0.0

    rhs_unit = xlnx(alpha + beta) - xlnx(alpha) - xlnx(beta)
    return lhs, rhs_unit


@dataclass(frozen=True)
class RateReport:
    """Rates, bounds and diagnostics for one ensemble/Hamiltonian pair."""

    mixing_rate_at_H: float
    max_rate: float
    binary_max_rate: Optional[float]
    bound_thm: float
    bound_conjecture: float
    fd_residual: Optional[float]
    ratio_thm: Optional[float]
    ratio_conjecture: Optional[float]

    def to_json(self) -> bytes:
        obj = {
            "mixing_rate_at_H": self.mixing_rate_at_H,
            "max_rate": self.max_rate,
            "binary_max_rate": self.binary_max_rate,
            "bound_thm": self.bound_thm,
            "bound_conjecture": self.bound_conjecture,
            "fd_residual": self.fd_residual,
            "ratio_thm": self.ratio_thm,
            "ratio_conjecture": self.ratio_conjecture,
        }
        return json.dumps(obj).encode("utf-8")


def _ratio(num: float, den: float) -> Optional[float]:
    return num / den if den > 0 else None


def rate_report(
    E: Ensemble,
    H: Optional[HamiltonianSet] = None,
    fd_step: float = DEFAULT_FD_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> RateReport:
    """Evaluate all rates and bounds for E; H defaults to the maximizers."""
    if H is None:
        H = optimal_hamiltonians(E, rank_tol)
    rate = mixing_rate(E, H, rank_tol)
    mx = max_mixing_rate(E, rank_tol)
    binary = binary_max_rate(E, rank_tol) if len(E) == 2 else None
    bound_thm = bound_theorem_general(E.probabilities)
    bound_conj = shannon_entropy(E.probabilities)
    try:
        fd = fd_mixing_rate_richardson(E, H, fd_step, rank_tol)
        fd_residual = abs(rate - fd)
    except RankDeficient:
        fd_residual = None  # oracle refuses near-singular expected states
    if binary is not None:
        ratio_thm = _ratio(binary, bound_theorem_binary(float(E.probabilities[0])))
        ratio_conj = _ratio(binary, bound_conj)
    else:
        ratio_thm = _ratio(mx, bound_thm)
        ratio_conj = _ratio(mx, bound_conj)
    return RateReport(
        mixing_rate_at_H=rate,
        max_rate=mx,
        binary_max_rate=binary,
        bound_thm=bound_thm,
        bound_conjecture=bound_conj,
        fd_residual=fd_residual,
        ratio_thm=ratio_thm,
        ratio_conjecture=ratio_conj,
    )
