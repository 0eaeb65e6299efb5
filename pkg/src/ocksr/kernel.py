"""RBF kernel evaluation, Gram matrices and feature preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateData, DimensionMismatch, DuplicateSamples, ZeroSample
from .linalg import extreme_eigenvalues

DUPLICATE_ATOL = 1e-12


@dataclass(frozen=True)
class KernelParams:
    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix over the training samples.

    ``matrix`` holds ``spectral_scale * K`` where ``K`` is the raw RBF Gram
    matrix, so ``raw()`` recovers ``K`` after a spectral rescale.
    """

    params: KernelParams
    matrix: np.ndarray
    spectral_scale: float = 1.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def raw(self) -> np.ndarray:
        return self.matrix / self.spectral_scale


def as_samples(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-d sample matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    return X


def rbf_kernel(x, z, params: KernelParams) -> float:
    """``exp(-||x - z||^2 / (2 sigma^2))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if x.shape != z.shape:
        raise DimensionMismatch(f"vectors of shape {x.shape} and {z.shape}")
    diff = x - z
    return float(np.exp(-(diff @ diff) / (2.0 * params.sigma**2)))


def _rbf_from_sqdist(sqdist, sigma):
    return np.exp(-sqdist / (2.0 * sigma**2))


def gram_matrix(X, params: KernelParams) -> GramMatrix:
    """Gram matrix of ``X`` under the RBF kernel.

    Raises ``DuplicateSamples`` when two rows are closer than 1e-12, since
    the resulting matrix is singular.
    """
    X = as_samples(X)
    sq = cdist(X, X, "sqeuclidean")
    n = X.shape[0]
    iu = np.triu_indices(n, k=1)
    close = np.sqrt(sq[iu]) < DUPLICATE_ATOL
    if np.any(close):
        pairs = [(int(i), int(j)) for i, j in zip(iu[0][close], iu[1][close])]
        raise DuplicateSamples(f"duplicate samples at index pairs {pairs[:10]}", pairs=pairs)
    K = _rbf_from_sqdist(sq, params.sigma)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return GramMatrix(params=params, matrix=K, spectral_scale=1.0)


def cross_kernel(train, test, params: KernelParams) -> np.ndarray:
    """Kernel values between test rows and training rows, shape ``(n_test, n_train)``."""
    train = as_samples(train, "train")
    test = as_samples(test, "test")
    if train.shape[1] != test.shape[1]:
        raise DimensionMismatch(
            f"train has {train.shape[1]} features but test has {test.shape[1]}"
        )
    return _rbf_from_sqdist(cdist(test, train, "sqeuclidean"), params.sigma)


def median_bandwidth(X) -> KernelParams:
    """Median pairwise Euclidean distance as the RBF bandwidth."""
    X = as_samples(X)
    if X.shape[0] < 2:
        raise DegenerateData("median bandwidth needs at least two samples")
    sigma = float(np.median(pdist(X)))
    if not sigma >= 1e-12:
        raise DegenerateData(f"median pairwise distance {sigma:.3e} is degenerate")
    return KernelParams(sigma)


def normalize_features(X) -> np.ndarray:
    """Scale each sample to unit l2 norm."""
    X = as_samples(X)
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(~(norms > 1e-300))
    if bad.size:
        raise ZeroSample(f"rows {bad.tolist()[:10]} have zero norm")
    return X / norms[:, None]


def spectral_rescale(G: GramMatrix) -> GramMatrix:
    """Divide the Gram matrix by its largest eigenvalue."""
    lam_max = extreme_eigenvalues(G.matrix).lambda_max
    M = G.matrix / lam_max
    return replace(G, matrix=0.5 * (M + M.T), spectral_scale=G.spectral_scale / lam_max)
