"""Bipartite states with local ancillas, entangling rates, and the reduction
from entangling rates to binary mixing rates.

The scene is a pure state on four factors a ⊗ A ⊗ B ⊗ b (ancilla, Alice,
Bob, ancilla) with row-major index composition. An interaction Hamiltonian
acts on A ⊗ B only; the entangling rate is the time derivative at t = 0 of
the entanglement entropy S(rho_aA) along Psi(t) = (I_a ⊗ e^{-iHt} ⊗ I_b) Psi.

The reduction builds the two-member ensemble {(1 - 1/d_B^2, mu),
(1/d_B^2, rho_aAB)} whose expected state is rho_aA ⊗ I_B/d_B, so that the
binary mixing rate under the lifted Hamiltonian equals d_B^{-2} times the
entangling rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import hermitian as hm
from .ensembles import (
    DensityMatrix,
    Ensemble,
    Hamiltonian,
    HamiltonianSet,
    matrix_from_json,
    matrix_to_json,
    _load_json,
)
from .errors import (
    BadSubset,
    Degenerate,
    DimMismatch,
    DimOrder,
    DomainError,
    IllConditioned,
    InvariantViolation,
    ParseError,
    PositivityViolation,
)
from .rates import DEFAULT_FD_STEP, DEFAULT_RANK_TOL, IMAG_TOL, mixing_rate

NORM_TOL = 1e-10


@dataclass(frozen=True)
class PureState:
    """A unit vector on a ⊗ A ⊗ B ⊗ b with recorded factor dimensions."""

    amplitudes: np.ndarray
    dims: tuple[int, int, int, int]

    def __init__(self, amplitudes, dims):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in dims)
        if len(dims) != 4 or any(d < 1 for d in dims):
            raise DimMismatch(f"need four factor dimensions >= 1, got {dims}")
        if v.size != math.prod(dims):
            raise DimMismatch(
                f"amplitude length {v.size} != product of dims {math.prod(dims)}"
            )
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm {norm!r} differs from 1")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)


@dataclass(frozen=True)
class BipartiteOperator:
    """Hermitian operator on A ⊗ B; `normalized` asserts operator norm <= 1."""

    matrix: np.ndarray
    dims: tuple[int, int]
    normalized: bool = False

    def __init__(self, matrix, dims, normalized=False):
        dims = tuple(int(d) for d in dims)
        A = hm.require_hermitian(matrix)
        if len(dims) != 2 or A.shape[0] != dims[0] * dims[1]:
            raise DimMismatch(f"matrix of dim {A.shape[0]} does not factor as {dims}")
        if normalized:
            norm = float(np.max(np.abs(np.linalg.eigvalsh(A))))
            if norm > 1.0 + NORM_TOL:
                raise InvariantViolation(f"operator norm {norm!r} exceeds 1")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "normalized", normalized)


def partial_trace(M, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not in `keep`.

    `dims` lists the factor dimensions in row-major order; `keep` is the set
    of factor indices to retain (order preserved as in `dims`).
    """
    dims = [int(d) for d in dims]
    A = np.asarray(M, dtype=complex)
    total = math.prod(dims)
    if A.shape != (total, total):
        raise DimMismatch(f"matrix shape {A.shape} != ({total}, {total})")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise BadSubset(f"keep indices {keep} out of range for {len(dims)} factors")
    if not keep:
        raise BadSubset("must keep at least one factor")
    n = len(dims)
    T = A.reshape(dims + dims)
    # Assign one einsum axis letter per row index; traced factors share the
    # letter with their column index, kept factors get a fresh column letter.
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = []
    nxt = n
    out = []
    for i in range(n):
        if i in keep:
            col.append(letters[nxt])
            nxt += 1
        else:
            col.append(row[i])
    out = [row[i] for i in keep] + [col[i] for i in keep]
    spec = "".join(row) + "".join(col) + "->" + "".join(out)
    d_keep = math.prod(dims[i] for i in keep)
    return np.einsum(spec, T).reshape(d_keep, d_keep)


def _density(psi: PureState) -> np.ndarray:
    return np.outer(psi.amplitudes, psi.amplitudes.conj())


def _entropy_psd(M: np.ndarray) -> float:
    w = np.clip(np.linalg.eigvalsh(hm.hermitian_part(M)), 0.0, None)
    nz = w[w > 0]
    return float(-np.sum(nz * np.log(nz)))


def entanglement_entropy(psi: PureState) -> float:
    """S(rho_aA) — the entanglement across the aA | Bb cut."""
    rho_aA = partial_trace(_density(psi), psi.dims, (0, 1))
    return _entropy_psd(rho_aA)


def _check_interaction(psi: PureState, H: BipartiteOperator) -> None:
    if H.dims != (psi.dims[1], psi.dims[2]):
        raise DimMismatch(
            f"Hamiltonian factors {H.dims} do not match state factors "
            f"{(psi.dims[1], psi.dims[2])}"
        )


def lift_to_aAB(H: BipartiteOperator, d_a: int) -> np.ndarray:
    """Embed H_AB on a ⊗ A ⊗ B as I_a ⊗ H_AB."""
    return np.kron(np.eye(d_a), H.matrix)


def evolve_pure(psi: PureState, H: BipartiteOperator, t: float) -> PureState:
    """(I_a ⊗ e^{-iHt} ⊗ I_b) Psi."""
    _check_interaction(psi, H)
    d_a, _, _, d_b = psi.dims
    U = hm.matrix_fn(H.matrix, lambda w: np.exp(-1j * t * w))
    U_full = np.kron(np.kron(np.eye(d_a), U), np.eye(d_b))
    return PureState(U_full @ psi.amplitudes, psi.dims)


def entangling_rate(
    psi: PureState, H: BipartiteOperator, rank_tol: float = DEFAULT_RANK_TOL
) -> float:
    """Analytic derivative i Tr(H_lift [rho_aAB, ln(rho_aA) ⊗ I_B])."""
    _check_interaction(psi, H)
    d_a, d_A, d_B, _ = psi.dims
    rho_full = _density(psi)
    rho_aAB = partial_trace(rho_full, psi.dims, (0, 1, 2))
    rho_aA = partial_trace(rho_full, psi.dims, (0, 1))
    L = np.kron(hm.support_log(rho_aA, rank_tol), np.eye(d_B))
    H_lift = lift_to_aAB(H, d_a)
    val = 1j * np.trace(H_lift @ hm.commutator(rho_aAB, L))
    assert abs(val.imag) <= IMAG_TOL, f"imaginary residue {val.imag:.3e}"
    return float(val.real)


def fd_entangling_rate(
    psi: PureState,
    H: BipartiteOperator,
    h: float = DEFAULT_FD_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    """Central finite difference of the entanglement entropy at t = 0."""
    if h <= 0:
        raise DomainError("finite-difference step must be positive")
    _check_interaction(psi, H)
    rho_aA = partial_trace(_density(psi), psi.dims, (0, 1))
    w = np.linalg.eigvalsh(rho_aA)
    nonzero = w[w > rank_tol * max(float(w[-1]), 0.0)]
    if nonzero.size and float(nonzero[0]) < 1e3 * rank_tol:
        raise IllConditioned(
            f"smallest nonzero eigenvalue {float(nonzero[0]):.3e} of rho_aA "
            "too small for a stable entropy derivative"
        )
    e_plus = entanglement_entropy(evolve_pure(psi, H, h))
    e_minus = entanglement_entropy(evolve_pure(psi, H, -h))
    return (e_plus - e_minus) / (2.0 * h)


def fd_entangling_rate_richardson(
    psi: PureState,
    H: BipartiteOperator,
    h: float = DEFAULT_FD_STEP,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    d1 = fd_entangling_rate(psi, H, h, rank_tol)
    d2 = fd_entangling_rate(psi, H, h / 2.0, rank_tol)
    return (4.0 * d2 - d1) / 3.0


def bravyi_mu(psi: PureState) -> DensityMatrix:
    """The complementary state mu with
    rho_aA ⊗ I_B/d_B = (1 - d_B^{-2}) mu + d_B^{-2} rho_aAB.

    Requires 2 <= d_B <= d_A. mu is guaranteed to exist as a state; a
    negative eigenvalue beyond -1e-9 signals numerical corruption.
    """
    d_a, d_A, d_B, _ = psi.dims
    if d_B == 1:
        raise Degenerate("reduction degenerates at dim(B) = 1")
    if d_B > d_A:
        raise DimOrder(f"requires dim(B) <= dim(A), got B={d_B}, A={d_A}")
    rho_full = _density(psi)
    rho_aAB = partial_trace(rho_full, psi.dims, (0, 1, 2))
    rho_aA = partial_trace(rho_full, psi.dims, (0, 1))
    weight = 1.0 - d_B ** -2
    mu = (np.kron(rho_aA, np.eye(d_B) / d_B) - d_B ** -2 * rho_aAB) / weight
    w = np.linalg.eigvalsh(hm.hermitian_part(mu))
    if float(w[0]) < -1e-9:
        raise PositivityViolation(f"mu has eigenvalue {float(w[0]):.3e}")
    tr = float(np.real(np.trace(mu)))
    if abs(tr - 1.0) > 1e-9:
        raise PositivityViolation(f"mu has trace {tr!r}")
    recon = weight * mu + d_B ** -2 * rho_aAB
    target = np.kron(rho_aA, np.eye(d_B) / d_B)
    assert hm.frobenius(recon - target) <= 1e-10, "reconstruction identity failed"
    return DensityMatrix(mu)


def sie_to_sim(
    psi: PureState, H: BipartiteOperator, rank_tol: float = DEFAULT_RANK_TOL
) -> tuple[Ensemble, Hamiltonian, float]:
    """Entangling-to-mixing reduction: the ensemble
    {(1 - d_B^{-2}, mu), (d_B^{-2}, rho_aAB)},
    the lifted Hamiltonian I_a ⊗ H_AB, and the residual
    |binary mixing rate - d_B^{-2} * entangling rate|.
    """
    _check_interaction(psi, H)
    d_a, _, d_B, _ = psi.dims
    mu = bravyi_mu(psi)
    rho_aAB = DensityMatrix(partial_trace(_density(psi), psi.dims, (0, 1, 2)))
    E2 = Ensemble([1.0 - d_B ** -2, d_B ** -2], [mu, rho_aAB])
    H_lift = Hamiltonian(lift_to_aAB(H, d_a), normalized=H.normalized)
    zero = Hamiltonian(np.zeros_like(H_lift.matrix))
    lam = mixing_rate(E2, HamiltonianSet([zero, H_lift]), rank_tol)
    gam = entangling_rate(psi, H, rank_tol)
    residual = abs(lam - d_B ** -2 * gam)
    return E2, H_lift, residual


@dataclass(frozen=True)
class StePoint:
    """One time slice of the small-total-entangling check."""

    t: float
    entanglement: float
    bound: float
    ok: bool


def ste_check(
    psi: PureState,
    H: BipartiteOperator,
    ts: Sequence[float],
    slack: float = 1e-9,
) -> list[StePoint]:
    """Check E(Psi(t)) <= E(Psi(0)) + 2 ln min(d_A, d_B) at each t."""
    _check_interaction(psi, H)
    e0 = entanglement_entropy(psi)
    bound = e0 + 2.0 * math.log(min(psi.dims[1], psi.dims[2]))
    out = []
    for t in ts:
        e_t = entanglement_entropy(evolve_pure(psi, H, float(t)))
        out.append(StePoint(float(t), e_t, bound, e_t <= bound + slack))
    return out


# --- JSON wire format -------------------------------------------------------
#
# PureState:         {"dims": [da, dA, dB, db], "amplitudes": [[re, im], ...]}
# BipartiteOperator: {"dims": [dA, dB], "hamiltonian": M} with M a d x d
#                    row-major array of [re, im] pairs, d = dA * dB.


def parse_pure_state(text) -> PureState:
    obj = _load_json(text)
    try:
        dims = [int(d) for d in obj["dims"]]
        raw = np.asarray(obj["amplitudes"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"pure-state JSON missing or malformed field: {exc}") from exc
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ParseError("amplitudes must be a list of [re, im] pairs")
    return PureState(raw[:, 0] + 1j * raw[:, 1], dims)


def serialize_pure_state(psi: PureState) -> bytes:
    obj = {
        "dims": list(psi.dims),
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }
    return json.dumps(obj).encode("utf-8")


def parse_bipartite_operator(text, normalized: bool = False) -> BipartiteOperator:
    obj = _load_json(text)
    try:
        dA, dB = (int(d) for d in obj["dims"])
        raw = obj["hamiltonian"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"operator JSON missing or malformed field: {exc}") from exc
    M = matrix_from_json(raw, dA * dB, "hamiltonian")
    return BipartiteOperator(M, (dA, dB), normalized)


def serialize_bipartite_operator(H: BipartiteOperator) -> bytes:
    obj = {"dims": list(H.dims), "hamiltonian": matrix_to_json(H.matrix)}
    return json.dumps(obj).encode("utf-8")
