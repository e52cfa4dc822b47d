"""Offline model fitting for each evaluated scheme, and batch prediction on top of it."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .coldstart import (
    ClusterModel,
    SignificantUserSet,
    SmoothedMatrix,
    all_users,
    cluster_users,
    select_significant_users,
    smooth,
)
from .matrix import RatingMatrix
from .predictors import FusionParams, predict_batch
from .similarity import SimilarityModel, build_similarity_model

log = logging.getLogger(__name__)

SCHEMES = ("global-mean", "item-mean", "user-mean", "plain-item-cf", "plain-user-cf", "cruc")


@dataclass(frozen=True)
class ModelParams:
    m: int = 30
    k: int = 30
    clusters: int = 16
    min_overlap: int = 2
    lam: float = 0.75
    delta: float = 0.1
    significant_filter: bool = True
    smoothing: bool = True
    max_iters: int = 100
    seed: int = 0


@dataclass
class OfflineModel:
    """Everything the online phase needs for one scheme on one training matrix."""

    scheme: str
    matrix: RatingMatrix
    fusion: FusionParams | None = None
    simmodel: SimilarityModel | None = None
    store: RatingMatrix | SmoothedMatrix | None = None
    significant: SignificantUserSet | None = None
    clusters: ClusterModel | None = None

    def predict_dense(self, users, items):
        """Predictions and fallback flags for dense indices (-1 = unknown)."""
        m = self.matrix
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        if self.scheme == "global-mean":
            return np.full(len(users), m.global_mean), np.zeros(len(users), dtype=bool)
        if self.scheme in ("item-mean", "user-mean"):
            idx, means = (items, m.item_means) if self.scheme == "item-mean" else (users, m.user_means)
            known = idx >= 0
            out = np.where(known, means[np.where(known, idx, 0)], m.global_mean)
            return out, ~known
        batch = predict_batch(self.store, self.simmodel, self.fusion, users, items)
        return batch.sr, batch.reason == 2

    def predict(self, user_ids, item_ids):
        """Predictions for external ids."""
        return self.predict_dense(self.matrix.lookup_users(user_ids), self.matrix.lookup_items(item_ids))


def fit_scheme(scheme: str, matrix: RatingMatrix, params: ModelParams) -> OfflineModel:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    if scheme in ("global-mean", "item-mean", "user-mean"):
        return OfflineModel(scheme, matrix)
    if scheme == "plain-item-cf":
        sim = build_similarity_model(matrix, params.m, params.k, params.min_overlap)
        return OfflineModel(scheme, matrix, FusionParams(0.0, 0.0), sim, matrix)
    if scheme == "plain-user-cf":
        sim = build_similarity_model(matrix, params.m, params.k, params.min_overlap)
        return OfflineModel(scheme, matrix, FusionParams(1.0, 0.0), sim, matrix)
    return fit_cruc(matrix, params)


def fit_cruc(matrix: RatingMatrix, params: ModelParams) -> OfflineModel:
    """Significant users -> clusters -> smoothing -> neighborhoods."""
    sig = select_significant_users(matrix) if params.significant_filter else all_users(matrix)
    clusters = None
    store = matrix
    if params.smoothing and len(sig) > 0:
        c = min(params.clusters, len(sig))
        if c < params.clusters:
            log.warning("only %d significant users; clustering with c=%d instead of %d", len(sig), c, params.clusters)
        clusters = cluster_users(matrix, sig, c, params.max_iters, params.seed)
        store = smooth(matrix, clusters)
    candidates = sig.mask(matrix.n_users) if params.significant_filter else None
    sim = build_similarity_model(matrix, params.m, params.k, params.min_overlap, user_candidates=candidates)
    return OfflineModel(
        "cruc", matrix, FusionParams(params.lam, params.delta), sim, store, sig, clusters
    )
