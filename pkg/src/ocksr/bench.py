"""Evaluation harness for contaminated one-class learning.

Each (contamination level, repeat) cell draws a fresh train/test split from
a data source, fits every requested method on the contaminated training
set and records the test AUC. Seeds are derived from the master seed and
the cell coordinates, so any cell can be reproduced on its own.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from .errors import (
    InsufficientPool,
    InvalidCounts,
    InvalidK,
    NonBinaryLabel,
    OCKSRError,
    ParseError,
    SingleClass,
)
from .kernel import as_samples, normalize_features
from .model import METHODS, fit_model, rank_training, score

ALL_METHODS = METHODS + ("kmeans_baseline",)
PLUS_METHODS = ("tikhonov_plus", "lasso_plus")


@dataclass(frozen=True)
class LabeledSet:
    """Samples with binary labels (1 = target, 0 = outlier)."""

    samples: np.ndarray
    labels: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        if self.samples.shape[0] != self.labels.shape[0]:
            raise ValueError("labels and samples disagree in length")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == 0))


@dataclass(frozen=True)
class SweepConfig:
    contamination_levels: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    repeats: int = 10
    methods: tuple = ("org", "tikhonov", "lasso", "tikhonov_plus", "lasso_plus", "kmeans_baseline")
    master_seed: int = 42
    n_train: int = 100
    n_test: int = 100
    sigma: object = "median"
    delta: object = "auto"
    sparsity: float = 0.9
    kmeans_k: int = 5
    normalize: bool = False
    record_timing: bool = False

    def __post_init__(self):
        levels = tuple(float(v) for v in self.contamination_levels)
        object.__setattr__(self, "contamination_levels", levels)
        object.__setattr__(self, "methods", tuple(m.replace("-", "_") for m in self.methods))
        if not levels or any(not 0 <= v < 1 for v in levels):
            raise ValueError("contamination levels must lie in [0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.n_test < 2 or self.n_test % 2:
            raise ValueError("n_test must be even and >= 2 (equal target and outlier counts)")


@dataclass(frozen=True)
class SweepRecord:
    method: str
    level: float
    repeat: int
    auc: float
    iterations: int
    wall_ms: float


@dataclass
class SweepResult:
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def aucs(self, method, level=None):
        return [r.auc for r in self.records if r.method == method and (level is None or r.level == level)]

    @property
    def aggregates(self) -> dict:
        """``{(method, level): (mean, std, count)}`` with sample std (0 for one repeat)."""
        groups = {}
        for r in self.records:
            groups.setdefault((r.method, r.level), []).append(r.auc)
        out = {}
        for key in sorted(groups):
            v = np.array(groups[key])
            std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
            out[key] = (float(np.mean(v)), std, int(v.size))
        return out

    def grand_mean(self, method) -> float:
        means = [m for (meth, _), (m, _, _) in self.aggregates.items() if meth == method]
        return float(np.mean(means)) if means else float("nan")


# --- data -----------------------------------------------------------------


def make_synthetic(n_target, n_outlier, d=10, separation=6.0, seed=0, n_clusters=4) -> LabeledSet:
    """Gaussian targets at the origin plus outliers from distant Gaussian clusters.

    Targets are standard normal in ``d`` dimensions. Outlier cluster centres
    sit at distance ``separation`` from the origin in random directions; each
    outlier is drawn from a unit-variance Gaussian around one of them.
    """
    if n_target < 0 or n_outlier < 0 or d < 1:
        raise InvalidCounts(f"invalid counts n_target={n_target}, n_outlier={n_outlier}, d={d}")
    if not separation > 0:
        raise ValueError("separation must be positive")
    rng = np.random.default_rng(seed)
    targets = rng.standard_normal((n_target, d))
    dirs = rng.standard_normal((n_clusters, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    comp = rng.integers(0, n_clusters, size=n_outlier)
    outliers = separation * dirs[comp] + rng.standard_normal((n_outlier, d))
    samples = np.vstack([targets, outliers])
    labels = np.concatenate([np.ones(n_target, dtype=int), np.zeros(n_outlier, dtype=int)])
    return LabeledSet(samples, labels, f"synthetic(seed={seed}, d={d}, separation={separation})")


def make_planted() -> LabeledSet:
    """Deterministic 2-d instance: 20 targets within radius 0.5, 4 far outliers.

    The outliers are placed at indices 3, 9, 14 and 21.
    """
    k = np.arange(20)
    radius = 0.5 * np.sqrt((k + 0.5) / 20)
    angle = k * np.pi * (3 - np.sqrt(5))
    targets = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    outliers = np.array([[10.0, 10.0], [-10.0, 10.0], [10.0, -10.0], [-10.0, -10.0]])
    positions = [3, 9, 14, 21]
    samples = np.empty((24, 2))
    labels = np.ones(24, dtype=int)
    mask = np.zeros(24, dtype=bool)
    mask[positions] = True
    samples[mask] = outliers
    samples[~mask] = targets
    labels[mask] = 0
    return LabeledSet(samples, labels, "planted")


def inject_contamination(targets: LabeledSet, outliers: LabeledSet, rate: float, seed=0, n=None) -> LabeledSet:
    """Training set of ``n`` samples of which ``round(rate * n)`` are outliers.

    Samples are drawn without replacement from the two pools and shuffled.
    ``n`` defaults to the size of the target pool.
    """
    if not 0 <= rate < 1:
        raise ValueError("rate must lie in [0, 1)")
    n = len(targets) if n is None else int(n)
    n_out = int(round(rate * n))
    n_tgt = n - n_out
    if n_out > len(outliers) or n_tgt > len(targets):
        raise InsufficientPool(
            f"need {n_tgt} targets and {n_out} outliers, pools have {len(targets)} and {len(outliers)}"
        )
    rng = np.random.default_rng(seed)
    ti = rng.choice(len(targets), size=n_tgt, replace=False)
    oi = rng.choice(len(outliers), size=n_out, replace=False)
    samples = np.vstack([targets.samples[ti], outliers.samples[oi]])
    labels = np.concatenate([np.ones(n_tgt, dtype=int), np.zeros(n_out, dtype=int)])
    perm = rng.permutation(n)
    return LabeledSet(samples[perm], labels[perm], f"contaminated(rate={rate}, seed={seed})")


@dataclass(frozen=True)
class SyntheticSource:
    """Fresh synthetic pools for every cell."""

    d: int = 10
    separation: float = 6.0
    n_clusters: int = 4

    def pools(self, n_target, n_outlier, seed):
        data = make_synthetic(n_target, n_outlier, self.d, self.separation, seed, self.n_clusters)
        return _split_pools(data)


@dataclass(frozen=True)
class PoolSource:
    """Fixed labelled data; each cell subsamples it without replacement."""

    data: LabeledSet

    def pools(self, n_target, n_outlier, seed):
        targets, outliers = _split_pools(self.data)
        rng = np.random.default_rng(seed)
        if n_target > len(targets) or n_outlier > len(outliers):
            raise InsufficientPool(
                f"need {n_target} targets and {n_outlier} outliers, data has {len(targets)} and {len(outliers)}"
            )
        ti = rng.choice(len(targets), size=n_target, replace=False)
        oi = rng.choice(len(outliers), size=n_outlier, replace=False)
        return (
            LabeledSet(targets.samples[ti], targets.labels[ti], targets.provenance),
            LabeledSet(outliers.samples[oi], outliers.labels[oi], outliers.provenance),
        )


def _split_pools(data: LabeledSet):
    t = data.labels == 1
    return (
        LabeledSet(data.samples[t], data.labels[t], data.provenance),
        LabeledSet(data.samples[~t], data.labels[~t], data.provenance),
    )


# --- metrics and baselines -------------------------------------------------


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: share of (target, outlier) pairs ordered correctly, ties count half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    pos = y == 1
    n1 = int(np.sum(pos))
    n0 = int(np.sum(y == 0))
    if n1 == 0 or n0 == 0 or n1 + n0 != y.size:
        raise SingleClass("AUC needs binary labels with both classes present")
    ranks = rankdata(s, method="average")
    u = float(np.sum(ranks[pos])) - n1 * (n1 + 1) / 2.0
    return u / (n1 * n0)


def kmeans_baseline(train, k, Z, seed=0, max_iter=100) -> np.ndarray:
    """Negated distance from each query to its nearest k-means centre."""
    train = as_samples(train, "train")
    Z = as_samples(Z, "Z")
    n = train.shape[0]
    if not 1 <= k <= n:
        raise InvalidK(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centres = train[rng.choice(n, size=k, replace=False)].copy()
    assign = None
    for _ in range(max_iter):
        new_assign = np.argmin(cdist(train, centres, "sqeuclidean"), axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = train[assign == c]
            if len(members):
                centres[c] = members.mean(axis=0)
    return -np.min(cdist(Z, centres), axis=1)


# --- protocols -------------------------------------------------------------


def _cell_seeds(cfg: SweepConfig, level: float, repeat: int):
    ss = np.random.SeedSequence([cfg.master_seed, int(round(level * 1000)), repeat])
    data_seed, split_seed, method_seed = ss.spawn(3)
    return (
        int(data_seed.generate_state(1)[0]),
        int(split_seed.generate_state(1)[0]),
        int(method_seed.generate_state(1)[0]),
    )


def _fit_and_score(method, cfg, train: LabeledSet, query, seed):
    """Scores of ``query`` (``None`` means the training samples) and the iteration count."""
    X = train.samples
    if method == "kmeans_baseline":
        Q = X if query is None else query
        if cfg.normalize:
            X, Q = normalize_features(X), normalize_features(Q)
        return kmeans_baseline(X, cfg.kmeans_k, Q, seed), 0
    n0 = train.n_outliers if method in PLUS_METHODS else None
    model = fit_model(
        X, method, sigma=cfg.sigma, delta=cfg.delta, sparsity=cfg.sparsity, n0=n0, normalize=cfg.normalize
    )
    iters = model.fit_report.iterations if model.fit_report is not None else 1
    if query is None:
        ranked = rank_training(model)
        responses = np.empty_like(ranked.responses)
        responses[ranked.order] = ranked.responses
        return responses, iters
    Q = normalize_features(query) if cfg.normalize else query
    return score(model, Q), iters


def _draw_cell(cfg, source, level, repeat, with_test):
    data_seed, split_seed, method_seed = _cell_seeds(cfg, level, repeat)
    half = cfg.n_test // 2 if with_test else 0
    n_out = int(round(level * cfg.n_train))
    targets, outliers = source.pools(cfg.n_train - n_out + half, n_out + half, data_seed)
    rng = np.random.default_rng(split_seed)
    tperm = rng.permutation(len(targets))
    operm = rng.permutation(len(outliers))
    test = None
    if with_test:
        tt, ot = tperm[:half], operm[:half]
        test = LabeledSet(
            np.vstack([targets.samples[tt], outliers.samples[ot]]),
            np.concatenate([np.ones(half, dtype=int), np.zeros(half, dtype=int)]),
            "test",
        )
    train_t = LabeledSet(targets.samples[tperm[half:]], targets.labels[tperm[half:]])
    train_o = LabeledSet(outliers.samples[operm[half:]], outliers.labels[operm[half:]])
    train = inject_contamination(train_t, train_o, level, split_seed, n=cfg.n_train)
    return train, test, method_seed


def _run(cfg: SweepConfig, source, with_test: bool) -> SweepResult:
    result = SweepResult()
    for level in cfg.contamination_levels:
        for repeat in range(cfg.repeats):
            try:
                train, test, method_seed = _draw_cell(cfg, source, level, repeat, with_test)
            except OCKSRError as exc:
                for method in cfg.methods:
                    result.failures.append((method, level, repeat, f"{type(exc).__name__}: {exc}"))
                continue
            for method in cfg.methods:
                start = time.perf_counter()
                try:
                    query = test.samples if with_test else None
                    scores, iters = _fit_and_score(method, cfg, train, query, method_seed)
                    labels = test.labels if with_test else train.labels
                    value = auc(scores, labels)
                except OCKSRError as exc:
                    result.failures.append((method, level, repeat, f"{type(exc).__name__}: {exc}"))
                    continue
                wall = (time.perf_counter() - start) * 1000.0 if cfg.record_timing else 0.0
                result.records.append(SweepRecord(method, level, repeat, value, iters, wall))
    result.records.sort(key=lambda r: (r.method, r.level, r.repeat))
    return result


def run_sweep(cfg: SweepConfig, source=None) -> SweepResult:
    """Contamination sweep scored on held-out test sets with equal class counts.

    Known-fraction methods receive the true number of planted outliers.
    Fit errors are recorded in ``result.failures`` and do not stop the sweep.
    """
    return _run(cfg, SyntheticSource() if source is None else source, with_test=True)


def run_ranking(cfg: SweepConfig, source=None) -> SweepResult:
    """AUC of the training-set ranking against the true training labels (no test set)."""
    return _run(cfg, SyntheticSource() if source is None else source, with_test=False)


# --- files -----------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def write_records_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write("method,level,repeat,auc,iterations,wall_ms\n")
        for r in result.records:
            fh.write(f"{r.method},{_fmt(r.level)},{r.repeat},{_fmt(r.auc)},{r.iterations},{_fmt(r.wall_ms)}\n")


def write_summary_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write("method,level,mean_auc,std_auc\n")
        for (method, level), (mean, std, _) in result.aggregates.items():
            fh.write(f"{method},{_fmt(level)},{_fmt(mean)},{_fmt(std)}\n")


def write_plot_data(result: SweepResult, path) -> None:
    """One ``level<TAB>mean<TAB>std`` block per method, blocks separated by blank lines."""
    blocks = {}
    for (method, level), (mean, std, _) in result.aggregates.items():
        blocks.setdefault(method, []).append(f"{_fmt(level)}\t{_fmt(mean)}\t{_fmt(std)}")
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write("\n\n".join(f"# {m}\n" + "\n".join(rows) for m, rows in blocks.items()))
        fh.write("\n")


def load_csv(path, label_column=None, header=False):
    """Read comma-separated numeric features.

    ``label_column`` (an index, or a column name when ``header`` is set)
    designates a {0, 1} label column; with it a ``LabeledSet`` is returned,
    otherwise the sample matrix.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    names = None
    offset = 1
    if header:
        if not rows:
            raise ParseError("missing header row", row=1)
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        offset = 2
    if not rows:
        raise ParseError("no data rows")
    width = len(rows[0])
    lab = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if names is None or label_column not in names:
                raise ParseError(f"label column {label_column!r} not found in header")
            lab = names.index(label_column)
        else:
            lab = int(label_column) % width
    values = []
    labels = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {r + offset} has {len(row)} fields, expected {width}", row=r + offset)
        feats = []
        for c, cell in enumerate(row):
            if c == lab:
                text = cell.strip()
                try:
                    v = float(text)
                except ValueError:
                    raise NonBinaryLabel(f"label {text!r} at row {r + offset} is not 0 or 1") from None
                if v not in (0.0, 1.0):
                    raise NonBinaryLabel(f"label {text!r} at row {r + offset} is not 0 or 1")
                labels.append(int(v))
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric value {cell!r} at row {r + offset}, column {c + 1}", row=r + offset, column=c + 1
                ) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value at row {r + offset}, column {c + 1}", row=r + offset, column=c + 1)
            feats.append(v)
        values.append(feats)
    X = np.array(values, dtype=float)
    if lab is None:
        return X
    return LabeledSet(X, np.array(labels, dtype=int), str(path))


def write_csv(path, samples, labels=None) -> None:
    samples = np.asarray(samples, dtype=float)
    with open(path, "w", newline="", encoding="ascii") as fh:
        names = [f"x{j}" for j in range(samples.shape[1])]
        if labels is not None:
            names.append("label")
        fh.write(",".join(names) + "\n")
        for i, row in enumerate(samples):
            cells = [_fmt(v) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")
