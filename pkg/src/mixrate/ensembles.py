"""Validated quantum states, Hamiltonians, ensembles, entropies and evolution.

An ensemble pairs probabilities p(x) with density matrices rho_x of one
shared dimension. The expected state is the convex combination
rho = sum_x p(x) rho_x, and each member may evolve under its own Hamiltonian,
rho(t) = sum_x p(x) exp(-i H_x t) rho_x exp(i H_x t).

All values are immutable after construction; every function here is pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hermitian as hm
from .errors import (
    BadDistribution,
    DimMismatch,
    DomainError,
    InvariantViolation,
    NonHermitian,
    ParseError,
)

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
PROB_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """A quantum state: Hermitian, positive semi-definite, unit trace.

    Validation symmetrizes the input, floors eigenvalues in [-1e-10, 0) at
    zero and renormalizes the trace when within tolerance; anything further
    off is rejected.
    """

    matrix: np.ndarray

    def __post_init__(self):
        A = hm.require_hermitian(self.matrix)
        w, V = np.linalg.eigh(A)
        if w[0] < -PSD_TOL:
            raise InvariantViolation(f"not PSD (min eigenvalue {w[0]:.3e})")
        tr = float(np.sum(w))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"trace {tr!r} differs from 1")
        w = np.clip(w, 0.0, None)
        w /= np.sum(w)
        object.__setattr__(self, "matrix", hm.hermitian_part(hm.reconstruct(w, V)))
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Hamiltonian:
    """A Hermitian observable; `normalized` asserts operator norm <= 1."""

    matrix: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        A = hm.require_hermitian(self.matrix)
        if self.normalized:
            norm = float(np.max(np.abs(np.linalg.eigvalsh(A)))) if A.size else 0.0
            if norm > 1.0 + 1e-10:
                raise InvariantViolation(f"operator norm {norm!r} exceeds 1")
        object.__setattr__(self, "matrix", A)
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Ensemble:
    """Probabilities p(x) paired with states rho_x on one Hilbert space.

    Zero-probability members are stripped at construction; the remaining
    probabilities must be positive and sum to 1 within 1e-10.
    """

    probabilities: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __init__(self, probabilities, states):
        p = np.asarray(probabilities, dtype=float)
        states = tuple(states)
        if p.ndim != 1 or p.size != len(states):
            raise DimMismatch("probabilities and states must have equal length")
        if np.any(p < 0):
            raise BadDistribution("negative probability")
        if abs(float(np.sum(p)) - 1.0) > PROB_TOL:
            raise BadDistribution(f"probabilities sum to {float(np.sum(p))!r}")
        keep = p > 0
        p, states = p[keep], tuple(s for s, k in zip(states, keep) if k)
        if not states:
            raise BadDistribution("ensemble has no members with positive probability")
        dim = states[0].dim
        if any(s.dim != dim for s in states):
            raise DimMismatch("all ensemble states must share one dimension")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim


@dataclass(frozen=True)
class HamiltonianSet:
    """One Hamiltonian per ensemble member, all of one dimension."""

    hams: tuple[Hamiltonian, ...] = field(default_factory=tuple)

    def __init__(self, hams):
        hams = tuple(hams)
        if hams and any(h.dim != hams[0].dim for h in hams):
            raise DimMismatch("all Hamiltonians must share one dimension")
        object.__setattr__(self, "hams", hams)

    def __len__(self) -> int:
        return len(self.hams)


def expected_state(E: Ensemble) -> DensityMatrix:
    """The expected density operator rho = sum_x p(x) rho_x."""
    acc = np.zeros((E.dim, E.dim), dtype=complex)
    for p, s in zip(E.probabilities, E.states):
        acc += p * s.matrix
    return DensityMatrix(acc)


def _entropy_from_eigenvalues(w: np.ndarray, dim: int) -> float:
    w = np.clip(np.real(w), 0.0, 1.0)
    nz = w[w > 0]
    s = float(-np.sum(nz * np.log(nz)))
    return min(max(s, 0.0), math.log(dim))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -Tr(rho ln rho) in nats, with 0 ln 0 := 0."""
    w = np.linalg.eigvalsh(rho.matrix)
    return _entropy_from_eigenvalues(w, rho.dim)


def shannon_entropy(probs: Sequence[float]) -> float:
    """-sum p ln p of a probability vector (nats)."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or np.any(p <= 0) or abs(float(np.sum(p)) - 1.0) > PROB_TOL:
        raise BadDistribution("probabilities must be positive and sum to 1")
    return float(-np.sum(p * np.log(p)))


def binary_entropy(p: float) -> float:
    """-p ln p - (1-p) ln(1-p), with the endpoint convention S(0) = S(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy undefined at p={p!r}")
    out = 0.0
    if 0.0 < p < 1.0:
        out = -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)
    return out


def average_entropy(E: Ensemble) -> float:
    """sum_x p(x) S(rho_x) — the ensemble's average member entropy."""
    return float(
        sum(p * von_neumann_entropy(s) for p, s in zip(E.probabilities, E.states))
    )


def unitary_at(H: Hamiltonian, t: float) -> np.ndarray:
    """exp(-i H t), computed exactly through the spectrum of H."""
    return hm.matrix_fn(H.matrix, lambda w: np.exp(-1j * t * w))


def evolve(E: Ensemble, H: HamiltonianSet, t: float) -> Ensemble:
    """Conjugate each member by its own unitary exp(-i H_x t)."""
    if len(H) != len(E):
        raise DimMismatch("need one Hamiltonian per ensemble member")
    if H.hams and H.hams[0].dim != E.dim:
        raise DimMismatch("Hamiltonian dimension differs from ensemble dimension")
    states = []
    for s, h in zip(E.states, H.hams):
        U = unitary_at(h, t)
        states.append(DensityMatrix(U @ s.matrix @ U.conj().T))
    return Ensemble(E.probabilities, states)


# --- JSON wire format -------------------------------------------------------
#
# Ensemble:        {"dim": d, "probabilities": [p1, ...], "states": [M1, ...]}
# Hamiltonian set: {"dim": d, "hamiltonians": [H1, ...]}
# where each matrix is a d x d row-major array of [re, im] pairs.


def matrix_to_json(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(obj, dim: int, what: str) -> np.ndarray:
    try:
        A = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: not a numeric array") from exc
    if A.shape != (dim, dim, 2):
        raise ParseError(f"{what}: expected shape ({dim}, {dim}, 2), got {A.shape}")
    return A[..., 0] + 1j * A[..., 1]


def _load_json(text) -> dict:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    return obj


def parse_ensemble(text) -> Ensemble:
    """Parse the ensemble JSON schema; reports the offending member on failure."""
    obj = _load_json(text)
    try:
        dim = int(obj["dim"])
        probs = [float(p) for p in obj["probabilities"]]
        raw_states = list(obj["states"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"ensemble JSON missing or malformed field: {exc}") from exc
    if len(probs) != len(raw_states):
        raise ParseError("probabilities and states have different lengths")
    states = []
    for i, raw in enumerate(raw_states):
        try:
            states.append(DensityMatrix(matrix_from_json(raw, dim, f"state {i}")))
        except InvariantViolation as exc:
            raise InvariantViolation(exc.which, index=i) from exc
        except NonHermitian as exc:
            raise InvariantViolation(str(exc), index=i) from exc
    try:
        return Ensemble(probs, states)
    except (BadDistribution, DimMismatch) as exc:
        raise InvariantViolation(str(exc)) from exc


def serialize_ensemble(E: Ensemble) -> bytes:
    obj = {
        "dim": E.dim,
        "probabilities": [float(p) for p in E.probabilities],
        "states": [matrix_to_json(s.matrix) for s in E.states],
    }
    return json.dumps(obj).encode("utf-8")


def parse_hamiltonian_set(text, normalized: bool = False) -> HamiltonianSet:
    """Parse the Hamiltonian-set JSON schema."""
    obj = _load_json(text)
    try:
        dim = int(obj["dim"])
        raw = list(obj["hamiltonians"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"hamiltonian JSON missing or malformed field: {exc}") from exc
    hams = []
    for i, entry in enumerate(raw):
        try:
            hams.append(
                Hamiltonian(matrix_from_json(entry, dim, f"hamiltonian {i}"), normalized)
            )
        except InvariantViolation as exc:
            raise InvariantViolation(exc.which, index=i) from exc
        except NonHermitian as exc:
            raise InvariantViolation(str(exc), index=i) from exc
    return HamiltonianSet(hams)


def serialize_hamiltonian_set(H: HamiltonianSet) -> bytes:
    if not H.hams:
        raise DimMismatch("cannot serialize an empty Hamiltonian set")
    obj = {
        "dim": H.hams[0].dim,
        "hamiltonians": [matrix_to_json(h.matrix) for h in H.hams],
    }
    return json.dumps(obj).encode("utf-8")
