"""Dense symmetric linear algebra used by the solvers.

Matrices are plain ``numpy.ndarray`` objects. The Cholesky factor is built
by bordering: the factor of the leading ``k x k`` block is extended one row
at a time, which is the march-style ordering that lets a Gram matrix grow
incrementally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite, ZeroVector

PIVOT_RTOL = 1e-12


def as_symmetric(A, name="A"):
    """Return ``A`` as a float array after checking it is square, finite and symmetric."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} is not exactly symmetric")
    return A


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T`` equal to the factored matrix."""

    lower: np.ndarray

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


@dataclass(frozen=True)
class EigenSummary:
    lambda_min: float
    lambda_max: float

    @property
    def condition(self) -> float:
        if self.lambda_min <= 0:
            return float("inf")
        return self.lambda_max / self.lambda_min


def cholesky_decompose(A) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix as ``L L^T``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot drops to ``1e-12 * max(diag(A))`` or below. For kernel
        matrices this usually means duplicated (or nearly duplicated) samples.
    """
    A = as_symmetric(A)
    n = A.shape[0]
    threshold = PIVOT_RTOL * max(float(np.max(np.diag(A))), 0.0)
    L = np.zeros_like(A)
    for k in range(n):
        if k > 0:
            row = scipy.linalg.solve_triangular(
                L[:k, :k], A[:k, k], lower=True, check_finite=False
            )
            L[k, :k] = row
            pivot = A[k, k] - row @ row
        else:
            pivot = A[0, 0]
        if not pivot > threshold:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at index {k} is below {threshold:.3e}", pivot_index=k
            )
        L[k, k] = np.sqrt(pivot)
    return CholeskyFactor(L)


def solve_spd(factor: CholeskyFactor, b) -> np.ndarray:
    """Solve ``A x = b`` given the Cholesky factor of ``A``."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] != factor.n:
        raise DimensionMismatch(f"rhs has shape {b.shape}, expected ({factor.n},)")
    z = scipy.linalg.solve_triangular(factor.lower, b, lower=True, check_finite=False)
    return scipy.linalg.solve_triangular(factor.lower, z, lower=True, trans="T", check_finite=False)


def extreme_eigenvalues(A) -> EigenSummary:
    """Smallest and largest eigenvalue of a symmetric matrix.

    Uses the full symmetric eigenvalue decomposition (Householder
    tridiagonalisation followed by implicit-shift QR). Power-type iterations
    are avoided since the smallest eigenvalue of an RBF Gram matrix can be
    many orders of magnitude below the largest.
    """
    A = as_symmetric(A)
    try:
        w = scipy.linalg.eigvalsh(A, driver="ev", check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenSummary(float(w[0]), float(w[-1]))


def normalize_unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > 1e-300:
        raise ZeroVector("cannot normalise a zero vector")
    return v / norm
