"""Robust one-class kernel spectral regression.

One-class models are fitted on training sets that may contain outliers by
alternating between a regularised kernel regression (Tikhonov or lasso) and
an update of the per-sample responses. The responses double as a ranking of
the training samples by how well they conform to the model.
"""

from .bench import (
    LabeledSet,
    PoolSource,
    SweepConfig,
    SweepResult,
    SyntheticSource,
    auc,
    inject_contamination,
    kmeans_baseline,
    load_csv,
    make_planted,
    make_synthetic,
    run_ranking,
    run_sweep,
)
from .errors import OCKSRError
from .kernel import (
    GramMatrix,
    KernelParams,
    cross_kernel,
    gram_matrix,
    median_bandwidth,
    normalize_features,
    rbf_kernel,
    spectral_rescale,
)
from .lasso import LarsPath, SparsityTarget, kkt_check, lars_path, lasso_objective, select_by_sparsity
from .linalg import CholeskyFactor, EigenSummary, cholesky_decompose, extreme_eigenvalues, normalize_unit, solve_spd
from .model import (
    RankedList,
    TrainedModel,
    calibrate_threshold,
    decide,
    fit_model,
    load_model,
    rank_training,
    save_model,
    score,
)
from .ridge import (
    Coefficients,
    RidgeConfig,
    delta_opt_general,
    delta_opt_normalized,
    fit_ocksr_baseline,
    ridge_step,
    sensitivity,
)
from .trainer import (
    FitReport,
    StopRule,
    alternate_fit_known_fraction,
    alternate_fit_lasso,
    alternate_fit_tikhonov,
    init_labels,
    sr_update,
    update_labels,
)

__version__ = "0.1.0"
