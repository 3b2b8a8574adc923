"""Dense complex Hermitian linear algebra.

Eigendecomposition, matrix functions through the spectrum, the trace norm,
commutators, spectral sign projectors, and a quadrature identity for the
logarithm. Everything else in the package is built on these primitives.

Matrices are plain ``numpy.ndarray`` of complex128. All operations are pure.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import DimMismatch, DomainError, NoConvergence, NonHermitian

HERM_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Eigenvalues (ascending, real) and a unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(M) -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def frobenius(M) -> float:
    return float(np.linalg.norm(np.asarray(M)))


def hermitian_part(M: np.ndarray) -> np.ndarray:
    """(M + M†)/2 — absorbs roundoff from arithmetic on Hermitian data."""
    return (M + M.conj().T) / 2


def require_hermitian(M, tol: float = HERM_TOL) -> np.ndarray:
    """Validate ‖M − M†‖_F ≤ tol·max(1, ‖M‖_F) and return the symmetrized matrix."""
    A = as_matrix(M)
    dev = frobenius(A - A.conj().T)
    if dev > tol * max(1.0, frobenius(A)):
        raise NonHermitian(f"Hermiticity residual {dev:.3e} exceeds tolerance")
    return hermitian_part(A)


def eig_hermitian(M) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Satisfies ‖M − V diag(λ) V†‖_F ≤ 1e-10·max(1, ‖M‖_F) and
    ‖V†V − I‖_F ≤ 1e-10.
    """
    A = require_hermitian(M)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(w, V)


def reconstruct(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    """V diag(w) V† without forming the diagonal matrix."""
    return (V * w) @ V.conj().T


def matrix_fn(M, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Evaluate f on a Hermitian matrix through its spectrum: V diag(f(λ)) V†.

    `f` is applied to the eigenvalue array elementwise and may be
    complex-valued (e.g. λ ↦ exp(iλ) yields a unitary). The result is
    re-symmetrized when f is real on the spectrum.
    """
    w, V = eig_hermitian(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w))
    if fw.shape != w.shape:
        raise DomainError("f must map the eigenvalue array elementwise")
    if not np.all(np.isfinite(fw)):
        raise DomainError("f undefined (non-finite) at some eigenvalue")
    out = reconstruct(fw, V)
    if fw.dtype.kind != "c":
        out = hermitian_part(out)
    return out


def support_log(M, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Logarithm of a PSD matrix restricted to its support, zero on the kernel.

    Eigenvalues λ ≤ rank_tol·λ_max are treated as kernel. An eigenvalue below
    −rank_tol·λ_max means the input was not PSD.
    """
    if rank_tol <= 0:
        raise DomainError("rank_tol must be positive")
    w, V = eig_hermitian(M)
    wmax = float(w[-1]) if w.size else 0.0
    cut = rank_tol * wmax
    if np.any(w < -cut):
        raise DomainError(f"matrix has a negative eigenvalue {w[0]:.3e}")
    lw = np.zeros_like(w)
    supp = w > cut
    lw[supp] = np.log(w[supp])
    return hermitian_part(reconstruct(lw, V))


def trace_norm(M) -> float:
    """‖M‖₁ = Σ|λ_i| for Hermitian M."""
    A = require_hermitian(M)
    return float(np.sum(np.abs(np.linalg.eigvalsh(A))))


def commutator(A, B) -> np.ndarray:
    """AB − BA. Anti-Hermitian when both arguments are Hermitian."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise DimMismatch(f"commutator of shapes {A.shape} and {B.shape}")
    return A @ B - B @ A


def spectral_sign_projectors(M, zero_tol: float = DEFAULT_RANK_TOL):
    """Projectors onto the strictly positive / strictly negative eigenspaces.

    Eigenvalues within [−zero_tol, zero_tol] belong to neither projector.
    Returns (P_pos, P_neg), both Hermitian idempotents with P_pos·P_neg = 0.
    """
    w, V = eig_hermitian(M)
    Vp = V[:, w > zero_tol]
    Vn = V[:, w < -zero_tol]
    P_pos = Vp @ Vp.conj().T
    P_neg = Vn @ Vn.conj().T
    return hermitian_part(P_pos), hermitian_part(P_neg)


def log_integral_check(x: float, upper_cutoff: float, n_points: int) -> float:
    """Quadrature estimate of ∫₀^cutoff (1/(1+t) − 1/(x+t)) dt.

    The integral converges to ln x as cutoff → ∞. The half-line is mapped to
    (0, 1) via t = u/(1−u) and integrated by the composite midpoint rule, so
    the truncation at `upper_cutoff` is the only systematic error for large
    `n_points`.
    """
    if x <= 0:
        raise DomainError("log integral requires x > 0")
    if upper_cutoff <= 0 or n_points < 1:
        raise DomainError("cutoff and n_points must be positive")
    u_max = upper_cutoff / (1.0 + upper_cutoff)
    h = u_max / n_points
    u = (np.arange(n_points) + 0.5) * h
    t = u / (1.0 - u)
    g = (1.0 / (1.0 + t) - 1.0 / (x + t)) / (1.0 - u) ** 2
    return float(np.sum(g) * h)
