"""
Sparse models from the lasso path
=================================

The lasso variant keeps only a chosen fraction of training samples in the
kernel expansion, so scoring touches fewer rows.
"""

import numpy as np

from ocksr import auc, fit_model, lars_path, make_synthetic, score
from ocksr.kernel import gram_matrix, median_bandwidth

train = make_synthetic(90, 10, d=10, seed=3)
test = make_synthetic(50, 50, d=10, seed=4)

# one LARS path on all-ones labels: every breakpoint is an exact lasso solution
G = gram_matrix(train.samples, median_bandwidth(train.samples))
path = lars_path(G, np.ones(G.n))
print(f"path has {len(path)} breakpoints, {path.drops} variables dropped along the way")
for bp in path.breakpoints[:: max(1, len(path) // 6)]:
    print(f"  delta {bp.delta:10.4f}  nonzeros {bp.nnz:3d}")

for level in (0.5, 0.7, 0.9):
    model = fit_model(train.samples, "lasso", sparsity=level)
    nnz = np.count_nonzero(model.alpha)
    print(f"sparsity {level:.1f}: {nnz:3d} nonzeros, test AUC {auc(score(model, test.samples), test.labels):.4f}")
