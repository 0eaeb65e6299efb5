"""Fitted one-class models: scoring, decisions, ranking and persistence.

A model scores a sample ``z`` by the kernel expansion
``f(z) = sum_i a_i k(z, x_i)`` and accepts it as a target when
``f(z) >= tau``.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, MalformedModelFile
from .kernel import KernelParams, as_samples, cross_kernel, gram_matrix, median_bandwidth, normalize_features
from .lasso import SparsityTarget
from .ridge import RidgeConfig, fit_ocksr_baseline
from .trainer import (
    FitReport,
    StopRule,
    alternate_fit_known_fraction,
    alternate_fit_lasso,
    alternate_fit_tikhonov,
    init_labels,
)

METHODS = ("org", "tikhonov", "lasso", "tikhonov_plus", "lasso_plus")
FORMAT_TAG = "OCKSR"
FORMAT_VERSION = "v1"
SPARSE_ATOL = 1e-12
DEFAULT_QUANTILE = 0.05


@dataclass(frozen=True)
class TrainedModel:
    """Deployable one-class model.

    ``alpha`` is unit-norm for the iterative methods; the ``org`` baseline
    keeps the raw interpolating solution so that training samples score
    exactly one.
    """

    train_samples: np.ndarray
    params: KernelParams
    alpha: np.ndarray
    tau: float
    method_tag: str
    delta: float = 0.0
    fit_report: FitReport | None = None
    identified_outliers: tuple = ()

    def __post_init__(self):
        if self.method_tag not in METHODS:
            raise ValueError(f"unknown method tag {self.method_tag!r}")
        if self.alpha.shape != (self.train_samples.shape[0],):
            raise DimensionMismatch("alpha length must equal the number of training samples")
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")

    @property
    def n(self) -> int:
        return self.train_samples.shape[0]

    @property
    def d(self) -> int:
        return self.train_samples.shape[1]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.alpha) >= SPARSE_ATOL)

    @property
    def is_sparse(self) -> bool:
        return self.support.size < self.n


@dataclass(frozen=True)
class RankedList:
    order: np.ndarray
    responses: np.ndarray


def score(model: TrainedModel, Z) -> np.ndarray:
    """Kernel expansion ``f(z)`` for every row of ``Z``; only nonzero terms are evaluated."""
    Z = as_samples(Z, "Z")
    if Z.shape[1] != model.d:
        raise DimensionMismatch(f"model expects {model.d} features, got {Z.shape[1]}")
    idx = model.support
    if idx.size == 0:
        return np.zeros(Z.shape[0])
    return cross_kernel(model.train_samples[idx], Z, model.params) @ model.alpha[idx]


def decide(scores, tau: float) -> np.ndarray:
    """1 for targets (``score >= tau``), 0 for outliers."""
    return (np.asarray(scores, dtype=float) >= tau).astype(int)


def _descending_order(responses):
    idx = np.arange(responses.shape[0])
    return np.lexsort((idx, -responses))


def rank_training(model: TrainedModel) -> RankedList:
    """Training samples ordered from most to least compatible (0-based indices)."""
    responses = score(model, model.train_samples)
    order = _descending_order(responses)
    return RankedList(order, responses[order])


def calibrate_threshold(train_responses, quantile: float = DEFAULT_QUANTILE) -> float:
    """Empirical quantile of the training responses (linear interpolation)."""
    r = np.asarray(train_responses, dtype=float)
    if r.size == 0:
        raise EmptyInput("no responses to calibrate on")
    if not 0 <= quantile <= 1:
        raise ValueError("quantile must lie in [0, 1]")
    return float(np.quantile(r, quantile, method="linear"))


def _resolve_sigma(X, sigma):
    if sigma is None or sigma == "median":
        return median_bandwidth(X)
    return KernelParams(float(sigma))


def _resolve_ridge(delta):
    if delta in (None, "auto"):
        return RidgeConfig(delta_mode="optimal_normalized")
    if delta == "auto-general":
        return RidgeConfig(delta_mode="optimal_general")
    return RidgeConfig(delta=float(delta), delta_mode="explicit")


def fit_model(
    X,
    method: str = "tikhonov",
    *,
    sigma="median",
    delta="auto",
    sparsity: float = 0.9,
    n0: int | None = None,
    quantile: float = DEFAULT_QUANTILE,
    stop: StopRule = StopRule(),
    normalize: bool = False,
) -> TrainedModel:
    """Fit a one-class model on the (possibly contaminated) rows of ``X``.

    Parameters
    ----------
    method : {'org', 'tikhonov', 'lasso', 'tikhonov_plus', 'lasso_plus'}
        ``org`` is the unregularised baseline with all-ones labels; the
        ``_plus`` variants need ``n0``, the number of contaminations.
    sigma : 'median' or float
        RBF bandwidth.
    delta : 'auto', 'auto-general' or float
        Tikhonov weight. ``auto`` uses the normalised closed form on the
        spectrally rescaled Gram matrix, ``auto-general`` the general closed
        form on the raw one.
    sparsity : float
        Fraction of zero coefficients for the lasso methods.
    quantile : float
        Training-response quantile used as the decision threshold.
    """
    method = method.replace("-", "_")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    X = as_samples(X)
    if normalize:
        X = normalize_features(X)
    params = _resolve_sigma(X, sigma)
    G = gram_matrix(X, params)
    n = G.n
    outliers = ()
    report = None
    if method == "org":
        alpha = fit_ocksr_baseline(G, init_labels(n, 0)).alpha
        used_delta = 0.0
    elif method == "tikhonov":
        coef, _, report = alternate_fit_tikhonov(G, init_labels(n, 0), _resolve_ridge(delta), stop)
        alpha, used_delta = coef.alpha, report.delta_used
    elif method == "lasso":
        coef, _, report = alternate_fit_lasso(G, init_labels(n, 0), SparsityTarget(sparsity), stop)
        alpha, used_delta = coef.alpha, report.delta_used
    else:
        if n0 is None:
            raise ValueError(f"method {method!r} needs the number of contaminations n0")
        reg = _resolve_ridge(delta) if method == "tikhonov_plus" else SparsityTarget(sparsity)
        coef, y, report = alternate_fit_known_fraction(G, int(n0), reg, stop)
        alpha, used_delta = coef.alpha, report.delta_used
        if n0 > 0:
            outliers = tuple(int(i) for i in np.flatnonzero(y == 0))
    alpha = np.where(np.abs(alpha) < SPARSE_ATOL, 0.0, alpha)
    draft = TrainedModel(X, params, alpha, 0.0, method, float(used_delta), report, outliers)
    tau = calibrate_threshold(score(draft, X), quantile)
    return TrainedModel(X, params, alpha, tau, method, float(used_delta), report, outliers)


# --- persistence -----------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def _checksum(values) -> str:
    return format(math.fsum(values), ".17g")


def _stored_values(train, alpha_values, sigma, tau, delta):
    vals = list(np.asarray(train, dtype=float).ravel())
    vals.extend(float(v) for v in alpha_values)
    vals.extend((sigma, tau, delta))
    return vals


def dumps_model(model: TrainedModel) -> str:
    out = io.StringIO()
    out.write(
        f"{FORMAT_TAG} {FORMAT_VERSION} {model.method_tag} n={model.n} d={model.d} "
        f"sigma={_fmt(model.params.sigma)} tau={_fmt(model.tau)} delta={_fmt(model.delta)}\n"
    )
    for row in model.train_samples:
        out.write(" ".join(_fmt(v) for v in row) + "\n")
    idx = model.support
    if model.is_sparse:
        out.write(f"sparse k={idx.size}\n")
        for i in idx:
            out.write(f"{int(i)} {_fmt(model.alpha[i])}\n")
        alpha_values = model.alpha[idx]
    else:
        out.write("dense\n")
        for v in model.alpha:
            out.write(_fmt(v) + "\n")
        alpha_values = model.alpha
    out.write("outliers" + "".join(f" {i}" for i in model.identified_outliers) + "\n")
    stored = _stored_values(model.train_samples, alpha_values, model.params.sigma, model.tau, model.delta)
    out.write(f"checksum {_checksum(stored)}\n")
    return out.getvalue()


def save_model(model: TrainedModel, sink) -> None:
    """Write ``model`` to a path or text stream."""
    text = dumps_model(model)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def _parse_header(line):
    parts = line.split()
    if len(parts) != 8 or parts[0] != FORMAT_TAG:
        raise MalformedModelFile(f"bad header line: {line!r}")
    if parts[1] != FORMAT_VERSION:
        raise MalformedModelFile(f"unsupported format version {parts[1]!r}")
    method = parts[2]
    if method not in METHODS:
        raise MalformedModelFile(f"unknown method tag {method!r}")
    fields = {}
    for item in parts[3:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise MalformedModelFile(f"bad header field {item!r}")
        fields[key] = value
    try:
        return (
            method,
            int(fields["n"]),
            int(fields["d"]),
            float(fields["sigma"]),
            float(fields["tau"]),
            float(fields["delta"]),
        )
    except (KeyError, ValueError) as exc:
        raise MalformedModelFile(f"bad header field: {exc}") from exc


def loads_model(text: str) -> TrainedModel:
    lines = text.splitlines()
    if not lines:
        raise MalformedModelFile("empty model file")
    method, n, d, sigma, tau, delta = _parse_header(lines[0])
    if n < 1 or d < 1:
        raise MalformedModelFile(f"invalid dimensions n={n} d={d}")
    pos = 1

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise MalformedModelFile("unexpected end of model file")
        pos += 1
        return lines[pos - 1]

    try:
        rows = []
        for _ in range(n):
            row = [float(v) for v in take().split()]
            if len(row) != d:
                raise MalformedModelFile(f"training row {len(rows)} has {len(row)} values, expected {d}")
            rows.append(row)
        train = np.array(rows, dtype=float)
        kind = take().split()
        alpha = np.zeros(n)
        if kind == ["dense"]:
            alpha_values = [float(take()) for _ in range(n)]
            alpha[:] = alpha_values
        elif len(kind) == 2 and kind[0] == "sparse" and kind[1].startswith("k="):
            k = int(kind[1][2:])
            if not 0 <= k <= n:
                raise MalformedModelFile(f"sparse count {k} out of range")
            alpha_values = []
            for _ in range(k):
                i_text, v_text = take().split()
                i = int(i_text)
                if not 0 <= i < n:
                    raise MalformedModelFile(f"coefficient index {i} out of range")
                alpha[i] = float(v_text)
                alpha_values.append(alpha[i])
        else:
            raise MalformedModelFile(f"bad coefficient block header {' '.join(kind)!r}")
        outl = take().split()
        if not outl or outl[0] != "outliers":
            raise MalformedModelFile("missing outliers line")
        outliers = tuple(int(i) for i in outl[1:])
        chk = take().split()
    except ValueError as exc:
        if isinstance(exc, MalformedModelFile):
            raise
        raise MalformedModelFile(f"unparseable value near line {pos}: {exc}") from exc
    if len(chk) != 2 or chk[0] != "checksum":
        raise MalformedModelFile("missing checksum line")
    if any(line.strip() for line in lines[pos:]):
        raise MalformedModelFile("trailing content after checksum")
    expected = _checksum(_stored_values(train, alpha_values, sigma, tau, delta))
    if chk[1] != expected:
        raise MalformedModelFile(f"checksum mismatch: file says {chk[1]}, content sums to {expected}")
    try:
        return TrainedModel(train, KernelParams(sigma), alpha, tau, method, delta, None, outliers)
    except ValueError as exc:
        raise MalformedModelFile(str(exc)) from exc


def load_model(source) -> TrainedModel:
    """Read a model from a path or text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="ascii") as fh:
            return loads_model(fh.read())
    return loads_model(source.read())
