"""
Ranking training samples
========================

Without any test set, the responses of a fitted model order the training
samples from most to least typical; outliers should sink to the bottom.
"""

import numpy as np

from ocksr import LabeledSet, auc, fit_model, inject_contamination, make_planted, make_synthetic, rank_training

# a small hand-built case: 20 tight targets and 4 far outliers
planted = make_planted()
ranked = rank_training(fit_model(planted.samples, "tikhonov"))
print("last four ranks:", sorted(ranked.order[-4:].tolist()), "planted outliers:", [3, 9, 14, 21])

# a noisier case at 30% contamination
pool = make_synthetic(200, 100, d=10, seed=5)
is_target = pool.labels == 1
targets = LabeledSet(pool.samples[is_target], pool.labels[is_target])
outliers = LabeledSet(pool.samples[~is_target], pool.labels[~is_target])
train = inject_contamination(targets, outliers, 0.3, seed=6, n=100)

for method, kw in (("org", {}), ("tikhonov", {}), ("tikhonov_plus", {"n0": train.n_outliers})):
    ranked = rank_training(fit_model(train.samples, method, **kw))
    responses = np.empty(len(train))
    responses[ranked.order] = ranked.responses
    print(f"{method:14s} ranking AUC {auc(responses, train.labels):.4f}")
