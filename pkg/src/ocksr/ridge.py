"""Tikhonov-regularised kernel regression and its regularisation parameter.

The regularised problem is ``min ||K a - y||^2 + delta a^T K a`` whose
minimiser solves ``(K + delta I) a = y``. ``delta = 0`` gives the plain
one-class spectral regression baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpectrum, ZeroVector
from .kernel import GramMatrix, spectral_rescale
from .linalg import EigenSummary, cholesky_decompose, extreme_eigenvalues, solve_spd

DELTA_MODES = ("explicit", "optimal_general", "optimal_normalized")


@dataclass(frozen=True)
class RidgeConfig:
    """Regularisation settings.

    ``delta`` is only read in ``explicit`` mode. ``delta_floor`` replaces a
    computed optimum that is not strictly positive.
    """

    delta: float = 0.0
    delta_mode: str = "optimal_normalized"
    delta_floor: float = 1e-8

    def __post_init__(self):
        if self.delta_mode not in DELTA_MODES:
            raise ValueError(f"delta_mode must be one of {DELTA_MODES}, got {self.delta_mode!r}")
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ValueError(f"delta must be finite and >= 0, got {self.delta!r}")
        if not self.delta_floor > 0:
            raise ValueError("delta_floor must be positive")


@dataclass(frozen=True)
class Coefficients:
    alpha: np.ndarray
    unit_norm: bool = False

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ValueError("alpha must be a finite 1-d vector")
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.alpha.shape[0]


def _matrix(G):
    return G.matrix if isinstance(G, GramMatrix) else np.asarray(G, dtype=float)


def ridge_step(G, y, delta: float) -> Coefficients:
    """Solve ``(K + delta I) alpha = y``; the result is not normalised."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    K = _matrix(G)
    A = K + delta * np.eye(K.shape[0])
    return Coefficients(solve_spd(cholesky_decompose(A), y))


def delta_opt_general(es: EigenSummary, floor: float = 1e-8) -> tuple[float, bool]:
    """Sensitivity-optimal ``delta`` from the extreme eigenvalues of ``K``.

    Returns ``(delta, floored)``; ``floored`` is True when the closed form
    was not strictly positive (or was 0/0 at condition number 1) and
    ``floor`` was substituted.
    """
    lam = es.lambda_min
    if not lam > 0:
        raise InvalidSpectrum(f"lambda_min must be positive, got {lam!r}")
    c = es.condition
    h = (c + 1.0) / (2.0 * np.sqrt(c))
    with np.errstate(divide="ignore", invalid="ignore"):
        value = lam * (c - h) / (h - 1.0)
    if not (np.isfinite(value) and value > 0):
        return floor, True
    return float(value), False


def delta_opt_normalized(lambda_min: float, floor: float = 1e-8) -> tuple[float, bool]:
    """Sensitivity-optimal ``delta`` for a normalised kernel matrix, ``0 < lambda_min <= 1``."""
    lam = float(lambda_min)
    if not 0 < lam <= 1:
        raise InvalidSpectrum(f"lambda_min must lie in (0, 1], got {lam!r}")
    value = 1.0 / (1.0 + lam) - lam * (2.0 - np.sqrt(lam)) / 2.0
    if not value > 0:
        return floor, True
    return float(value), False


def sensitivity(alpha_prime, alpha) -> float:
    """Relative deviation ``||alpha' - alpha|| / ||alpha'||``."""
    ap = np.asarray(getattr(alpha_prime, "alpha", alpha_prime), dtype=float)
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    denom = np.linalg.norm(ap)
    if not denom > 0:
        raise ZeroVector("alpha_prime has zero norm")
    return float(np.linalg.norm(ap - a) / denom)


def resolve_delta(G: GramMatrix, cfg: RidgeConfig):
    """Pick the Gram matrix and ``delta`` a Tikhonov fit should use.

    Returns ``(G_used, delta, notes)``. In ``optimal_normalized`` mode the
    Gram matrix is first rescaled to unit spectral norm so that its
    eigenvalues lie in ``(0, 1]``.
    """
    notes = []
    if cfg.delta_mode == "explicit":
        return G, float(cfg.delta), notes
    if cfg.delta_mode == "optimal_general":
        delta, floored = delta_opt_general(extreme_eigenvalues(G.matrix), cfg.delta_floor)
        G_used = G
    else:
        G_used = spectral_rescale(G)
        lam_min = extreme_eigenvalues(G_used.matrix).lambda_min
        delta, floored = delta_opt_normalized(min(lam_min, 1.0), cfg.delta_floor)
    if floored:
        notes.append(f"delta floor {cfg.delta_floor:g} substituted ({cfg.delta_mode})")
    return G_used, delta, notes


def fit_ocksr_baseline(G, y) -> Coefficients:
    """Unregularised solution ``K^{-1} y`` with fixed labels."""
    K = _matrix(G)
    return Coefficients(solve_spd(cholesky_decompose(K), y))
