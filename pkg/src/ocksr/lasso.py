"""Least-angle regression with the lasso modification on a kernel design.

The design matrix is the Gram matrix ``K`` itself, used column-wise without
re-standardisation, and the objective is

    ||K a - y||^2 + delta * sum_i |a_i|.

Along the path the active correlations ``c = K^T (y - K a)`` share the
common magnitude ``C``; the lasso penalty implied at that point is
``delta = 2 C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyPath, NotPositiveDefinite, NumericalBreakdown
from .linalg import cholesky_decompose, solve_spd
from .ridge import Coefficients

_TINY = 1e-14


@dataclass(frozen=True)
class Breakpoint:
    active: tuple
    alpha: np.ndarray
    correlation: float

    @property
    def delta(self) -> float:
        return 2.0 * self.correlation

    @property
    def nnz(self) -> int:
        return len(self.active)


@dataclass(frozen=True)
class LarsPath:
    breakpoints: list
    n: int
    drops: int = 0

    def __len__(self):
        return len(self.breakpoints)


@dataclass(frozen=True)
class SparsityTarget:
    level: float

    def __post_init__(self):
        if not 0 <= self.level < 1:
            raise ValueError(f"sparsity level must lie in [0, 1), got {self.level!r}")

    def nonzeros(self, n: int) -> int:
        return n - int(round(self.level * n))


@dataclass(frozen=True)
class KKTReport:
    passed: bool
    gradient: np.ndarray
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _matrix(G):
    return G.matrix if hasattr(G, "matrix") else np.asarray(G, dtype=float)


def _active_solution(KA, y, signs, C):
    """Coefficients on the active set with every active correlation equal to ``C * sign``.

    Solves ``KA^T KA a = KA^T y - C s``; recomputing this at every breakpoint
    keeps the path free of accumulated drift.
    """
    gram = KA.T @ KA
    return solve_spd(cholesky_decompose(0.5 * (gram + gram.T)), KA.T @ y - C * signs)


def lars_path(G, y, max_active=None, delta_min: float = 0.0) -> LarsPath:
    """Lasso solution path computed by least-angle regression.

    Each breakpoint records the solution at the end of a path segment:
    its support is exactly the active set and its correlation ``C`` is
    strictly smaller than the previous one. The first breakpoint is the
    zero solution; the path stops once ``max_active`` variables are active
    and the next event would add another one, or when ``C`` reaches zero
    (the unregularised solution ``K^{-1} y``). A positive ``delta_min``
    ends the path early at the solution for that penalty.
    """
    K = _matrix(G)
    y = np.asarray(y, dtype=float)
    n = K.shape[0]
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({n},)")
    if max_active is None:
        max_active = n
    if not 1 <= max_active <= n:
        raise ValueError(f"max_active must lie in [1, {n}], got {max_active}")
    C_stop = 0.5 * float(delta_min)

    alpha = np.zeros(n)
    corr = K.T @ y
    C = float(np.max(np.abs(corr)))
    breakpoints = [Breakpoint((), alpha.copy(), C)]
    if C <= max(_TINY, C_stop):
        return LarsPath(breakpoints, n)

    active: list[int] = []
    signs = np.zeros(0)
    drops = 0
    to_add = int(np.argmax(np.abs(corr)))

    for _ in range(8 * n + 8):
        if to_add is not None:
            if len(active) >= max_active:
                break
            active.append(to_add)
            signs = np.append(signs, np.sign(corr[to_add]))
        KA = K[:, active]
        gram = KA.T @ KA
        try:
            w = solve_spd(cholesky_decompose(0.5 * (gram + gram.T)), signs)
        except NotPositiveDefinite as exc:
            raise NumericalBreakdown(f"direction solve failed: {exc}", active) from exc
        a = K.T @ (KA @ w)

        # step to the next entry event
        gamma = C
        to_add = None
        inactive = np.ones(n, dtype=bool)
        inactive[active] = False
        for j in np.flatnonzero(inactive):
            for num, den in ((C - corr[j], 1.0 - a[j]), (C + corr[j], 1.0 + a[j])):
                if den > _TINY:
                    g = num / den
                    if _TINY < g < gamma:
                        gamma, to_add = g, int(j)

        # lasso modification: an active coefficient crossing zero leaves the set
        drop = None
        coef = alpha[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            crossing = -coef / w
        for pos, g in enumerate(crossing):
            if np.isfinite(g) and _TINY < g < gamma:
                gamma, drop, to_add = float(g), pos, None

        stop = C - gamma <= C_stop
        if stop:
            gamma, drop, to_add = C - C_stop, None, None
        C_new = C - gamma
        if drop is not None:
            del active[drop]
            signs = np.delete(signs, drop)
            drops += 1
        alpha = np.zeros(n)
        if active:
            if not stop and C_new <= _TINY * max(1.0, C):
                C_new = 0.0
            try:
                alpha[active] = _active_solution(K[:, active], y, signs, C_new)
            except NotPositiveDefinite as exc:
                raise NumericalBreakdown(f"active solve failed: {exc}", active) from exc
        corr = K.T @ (y - K @ alpha)
        C = C_new
        breakpoints.append(Breakpoint(tuple(active), alpha.copy(), C))
        if stop or C == 0.0 or (to_add is None and drop is None):
            break
        if drop is not None:
            to_add = None
    else:
        raise NumericalBreakdown("LARS iteration budget exhausted", active)

    return LarsPath(breakpoints, n, drops)


def select_by_sparsity(path: LarsPath, target: SparsityTarget, n: int | None = None):
    """Pick the path solution with ``n - round(level * n)`` nonzeros.

    Among breakpoints with the requested cardinality the least regularised
    one (last along the path) is returned. If the cardinality never occurs,
    the nearest smaller one is used and flagged.

    Returns ``(Coefficients, Breakpoint, skipped)``.
    """
    if not path.breakpoints:
        raise EmptyPath("path has no breakpoints")
    n = path.n if n is None else n
    want = target.nonzeros(n)
    for bp in reversed(path.breakpoints):
        if bp.nnz == want:
            return Coefficients(bp.alpha.copy()), bp, False
    smaller = [bp for bp in path.breakpoints if bp.nnz < want]
    if not smaller:
        raise EmptyPath(f"no path solution with at most {want} nonzeros")
    best = max(smaller, key=lambda bp: bp.nnz)
    for bp in reversed(smaller):
        if bp.nnz == best.nnz:
            return Coefficients(bp.alpha.copy()), bp, True
    raise AssertionError("unreachable")


def lasso_objective(G, y, alpha, delta: float) -> float:
    K = _matrix(G)
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    if y.shape != (K.shape[0],) or alpha.shape != (K.shape[1],):
        raise DimensionMismatch("inconsistent dimensions between K, y and alpha")
    r = K @ alpha - y
    return float(r @ r + delta * np.sum(np.abs(alpha)))


def kkt_check(G, y, alpha, delta: float, tol: float = 1e-6) -> KKTReport:
    """Stationarity certificate for the lasso objective.

    Passes iff ``|g_j| <= delta + tol`` for every coordinate and
    ``g_j = -sign(a_j) delta`` (within ``tol``) on the support, where
    ``g = 2 K^T (K a - y)``.
    """
    K = _matrix(G)
    alpha = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    g = 2.0 * K.T @ (K @ alpha - np.asarray(y, dtype=float))
    violations = []
    for j, (gj, aj) in enumerate(zip(g, alpha)):
        if abs(gj) > delta + tol:
            violations.append((j, "bound", float(gj)))
        elif aj != 0 and abs(gj + np.sign(aj) * delta) > tol:
            violations.append((j, "support", float(gj)))
    return KKTReport(not violations, g, violations)
