"""Alternating minimisation over coefficients and responses.

Every variant repeats two steps: solve the regularised regression for the
current responses ``y`` and normalise the solution to unit norm, then
refresh the responses from the model (``y = K a``, or the binarised
``SR(K a)`` when the number of contaminations is known).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidCounts, ZeroVector
from .kernel import GramMatrix
from .lasso import SparsityTarget, lars_path, select_by_sparsity
from .linalg import cholesky_decompose, normalize_unit, solve_spd
from .ridge import Coefficients, RidgeConfig, resolve_delta


@dataclass(frozen=True)
class StopRule:
    tol: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class FitReport:
    """Per-iteration diagnostics of an alternating fit.

    ``descent_trace`` holds, for iteration ``t``, the objective values
    ``(P(a_t, y_t), P(a_raw, y_t), P(a_next, y_t), P(a_next, y_next))``
    evaluated with that iteration's penalty, where ``a_raw`` is the exact
    regression solution before normalisation and ``a_next`` its
    normalised version. ``a_0`` is the zero vector.
    """

    iterations: int = 0
    error_trace: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    descent_trace: list = field(default_factory=list)
    delta_used: float = 0.0
    converged: bool = False
    notes: list = field(default_factory=list)
    gram_scale: float = 1.0

    @property
    def final_error(self) -> float:
        return self.error_trace[-1] if self.error_trace else float("nan")


def _matrix(G):
    return G.matrix if isinstance(G, GramMatrix) else np.asarray(G, dtype=float)


def _alpha(a):
    return np.asarray(getattr(a, "alpha", a), dtype=float)


def init_labels(n: int, n_neg: int = 0) -> np.ndarray:
    """Ones for the first ``n - n_neg`` samples, zeros for the rest."""
    if not 0 <= n_neg < n:
        raise InvalidCounts(f"need 0 <= n_neg < n, got n={n}, n_neg={n_neg}")
    y = np.ones(n)
    y[n - n_neg:] = 0.0
    return y


def update_labels(G, alpha) -> np.ndarray:
    K = _matrix(G)
    a = _alpha(alpha)
    if a.shape != (K.shape[1],):
        raise DimensionMismatch(f"alpha has shape {a.shape}, expected ({K.shape[1]},)")
    return K @ a


def sr_update(responses, n0: int) -> np.ndarray:
    """Zero the ``n0`` smallest responses and set the rest to one.

    Ties are broken by index: among equal responses the smaller index is
    zeroed first.
    """
    r = np.asarray(responses, dtype=float)
    n = r.shape[0]
    if not 0 <= n0 <= n:
        raise InvalidCounts(f"need 0 <= n0 <= n, got n={n}, n0={n0}")
    y = np.ones(n)
    y[np.argsort(r, kind="stable")[:n0]] = 0.0
    return y


def _objective(K, a, y, penalty):
    r = K @ a - y
    return float(r @ r + penalty(a))


def _alternate(K, y0, solve, stop, relabel=None):
    """Generic loop; ``solve(y)`` returns ``(a_raw, penalty, delta, notes)``."""
    report = FitReport()
    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (K.shape[0],):
        raise DimensionMismatch(f"y0 has shape {y.shape}, expected ({K.shape[0]},)")
    a = np.zeros(K.shape[0])
    seen = set()
    last_key = None
    for _ in range(stop.max_iter):
        a_raw, penalty, delta, notes = solve(y)
        for note in notes:
            if note not in report.notes:
                report.notes.append(note)
        try:
            a_next = normalize_unit(a_raw)
        except ZeroVector as exc:
            raise ZeroVector("regression solution is identically zero; labels are degenerate") from exc
        p_prev = _objective(K, a, y, penalty)
        p_raw = _objective(K, a_raw, y, penalty)
        p_mid = _objective(K, a_next, y, penalty)
        responses = K @ a_next
        y_next = responses if relabel is None else relabel(responses)
        p_new = _objective(K, a_next, y_next, penalty)

        err = float(np.linalg.norm(a_next - a))
        report.iterations += 1
        report.error_trace.append(err)
        report.objective_trace.append(p_new)
        report.descent_trace.append((p_prev, p_raw, p_mid, p_new))
        report.delta_used = float(delta)
        a, y = a_next, y_next
        if err <= stop.tol:
            report.converged = True
            break
        if relabel is not None:
            # unchanged labels are a fixed point, caught by the error test next round
            key = y.tobytes()
            if key in seen and key != last_key:
                report.converged = True
                report.notes.append(f"label cycle detected at iteration {report.iterations}")
                break
            seen.add(key)
            last_key = key
    return a, y, report


def _tikhonov_solver(K, delta):
    factor = cholesky_decompose(K + delta * np.eye(K.shape[0]))

    def penalty(a):
        return delta * float(a @ K @ a)

    def solve(y):
        return solve_spd(factor, y), penalty, delta, ()

    return solve


def _lasso_solver(K, target: SparsityTarget):
    n = K.shape[0]
    k = target.nonzeros(n)

    def solve(y):
        path = lars_path(K, y, max_active=max(k, 1))
        coef, bp, skipped = select_by_sparsity(path, target, n)
        delta = bp.delta

        def penalty(a):
            return delta * float(np.sum(np.abs(a)))

        notes = (f"cardinality {k} skipped; using {bp.nnz} nonzeros",) if skipped else ()
        return coef.alpha, penalty, delta, notes

    return solve


def alternate_fit_tikhonov(G: GramMatrix, y0, cfg: RidgeConfig = RidgeConfig(), stop: StopRule = StopRule()):
    """Alternating fit with a Tikhonov penalty.

    Returns ``(Coefficients, responses, FitReport)``. When ``cfg`` asks for
    the normalised optimum, the iteration runs on the spectrally rescaled
    Gram matrix; ``report.gram_scale`` records the factor that was applied.
    """
    G_used, delta, notes = resolve_delta(G, cfg)
    K = G_used.matrix
    a, y, report = _alternate(K, y0, _tikhonov_solver(K, delta), stop)
    report.notes[:0] = notes
    report.delta_used = delta
    report.gram_scale = G_used.spectral_scale / G.spectral_scale
    return Coefficients(a, unit_norm=True), y, report


def alternate_fit_lasso(G: GramMatrix, y0, target: SparsityTarget, stop: StopRule = StopRule()):
    """Alternating fit with an l1 penalty chosen by solution cardinality."""
    K = _matrix(G)
    a, y, report = _alternate(K, y0, _lasso_solver(K, target), stop)
    return Coefficients(a, unit_norm=True), y, report


def alternate_fit_known_fraction(G: GramMatrix, n0: int, regularizer, stop: StopRule = StopRule()):
    """Alternating fit when the number of contaminations ``n0`` is known.

    ``regularizer`` is a ``RidgeConfig`` (Tikhonov) or a ``SparsityTarget``
    (lasso). Responses are binarised after every step so that the ``n0``
    least compatible samples are labelled zero; the returned responses mark
    them. With ``n0 == 0`` there is nothing to binarise and the plain
    alternating fit is returned.
    """
    K = _matrix(G)
    n = K.shape[0]
    if not 0 <= n0 < n:
        raise InvalidCounts(f"need 0 <= n0 < n, got n={n}, n0={n0}")
    y0 = init_labels(n, 0)
    if isinstance(regularizer, SparsityTarget):
        if n0 == 0:
            return alternate_fit_lasso(G, y0, regularizer, stop)
        a, y, report = _alternate(K, y0, _lasso_solver(K, regularizer), stop, lambda r: sr_update(r, n0))
        return Coefficients(a, unit_norm=True), y, report
    if isinstance(regularizer, RidgeConfig):
        if n0 == 0:
            return alternate_fit_tikhonov(G, y0, regularizer, stop)
        G_used, delta, notes = resolve_delta(G, regularizer)
        Ku = G_used.matrix
        a, y, report = _alternate(Ku, y0, _tikhonov_solver(Ku, delta), stop, lambda r: sr_update(r, n0))
        report.notes[:0] = notes
        report.gram_scale = G_used.spectral_scale / G.spectral_scale
        return Coefficients(a, unit_norm=True), y, report
    raise TypeError(f"unsupported regularizer {type(regularizer).__name__}")
