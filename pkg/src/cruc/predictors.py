"""Online prediction from item and user neighborhoods, fused into one rating.

All predictors read a *store* of usable ratings, which is either a plain
:class:`~cruc.matrix.RatingMatrix` or a :class:`~cruc.coldstart.SmoothedMatrix`
(observed plus smoothed cells). Means always come from the observed ratings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .coldstart import SmoothedMatrix
from .matrix import RatingMatrix, RatingScale
from .similarity import SimilarityModel

NONE, PARTIAL, GLOBAL_FALLBACK = "none", "partial-components", "global-fallback"
_REASONS = (NONE, PARTIAL, GLOBAL_FALLBACK)


@dataclass(frozen=True)
class FusionParams:
    lam: float = 0.75
    delta: float = 0.1

    def __post_init__(self):
        for name, v in (("lambda", self.lam), ("delta", self.delta)):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def weights(self) -> tuple[float, float, float]:
        """Weights of (item-based, user-based, cross) predictions.

        The cross weight is taken as the complement of the other two so the
        three always add up to exactly 1.0 in floating point.
        """
        w_item = (1.0 - self.delta) * (1.0 - self.lam)
        w_user = (1.0 - self.delta) * self.lam
        return w_item, w_user, 1.0 - (w_item + w_user)


@dataclass(frozen=True)
class PredictionBreakdown:
    sir: float | None
    sur: float | None
    suir: float | None
    sr: float
    fallback_reason: str = NONE


def _present(x) -> bool:
    return x is not None and not math.isnan(x)


def fuse(sir, sur, suir, params: FusionParams, fallback_chain=(), scale: RatingScale | None = None):
    """Weighted combination of the three component predictions.

    Missing components (``None`` or NaN) hand their weight to the others in
    proportion. If nothing with positive weight is present, the first usable
    value of ``fallback_chain`` is returned instead.
    """
    comps = (sir, sur, suir)
    have = [_present(x) for x in comps]
    w = params.weights()
    if all(have):
        sr = w[0] * sir + w[1] * sur + w[2] * suir
        reason = NONE
    else:
        total = (w[0] if have[0] else 0.0) + (w[1] if have[1] else 0.0) + (w[2] if have[2] else 0.0)
        if total > 0.0:
            terms = [(wk / total) * x if h else 0.0 for wk, x, h in zip(w, comps, have)]
            sr = terms[0] + terms[1] + terms[2]
            reason = PARTIAL
        else:
            sr = next((float(x) for x in fallback_chain if _present(x)), math.nan)
            reason = GLOBAL_FALLBACK
    if scale is not None:
        sr = float(min(scale.max, max(scale.min, sr)))
    return PredictionBreakdown(
        *(float(x) if h else None for x, h in zip(comps, have)), sr=float(sr), fallback_reason=reason
    )


def fuse_arrays(sir, sur, suir, params: FusionParams, fallback, scale: RatingScale | None = None):
    """Vectorised :func:`fuse`; NaN marks an absent component.

    Returns ``(sr, reason_codes)`` with codes indexing
    ``("none", "partial-components", "global-fallback")``. Values agree bit for
    bit with the scalar version.
    """
    comps = [np.asarray(x, dtype=np.float64) for x in (sir, sur, suir)]
    have = [~np.isnan(x) for x in comps]
    w = params.weights()
    full = have[0] & have[1] & have[2]
    sr = np.where(full, w[0] * comps[0] + w[1] * comps[1] + w[2] * comps[2], np.nan)
    total = sum(np.where(h, wk, 0.0) for wk, h in zip(w, have))
    partial = ~full & (total > 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = [np.where(h, (wk / total) * np.where(h, x, 0.0), 0.0) for wk, x, h in zip(w, comps, have)]
    sr = np.where(partial, terms[0] + terms[1] + terms[2], sr)
    cold = ~full & ~partial
    sr = np.where(cold, fallback, sr)
    if scale is not None:
        sr = np.clip(sr, scale.min, scale.max)
    reason = np.where(full, 0, np.where(partial, 1, 2)).astype(np.int8)
    return sr, reason


def _store(smoothed):
    if isinstance(smoothed, SmoothedMatrix):
        return smoothed.base, smoothed.usable_csr()
    if isinstance(smoothed, RatingMatrix):
        return smoothed, (smoothed.u_indptr, smoothed.u_indices, smoothed.u_values)
    raise TypeError(f"expected RatingMatrix or SmoothedMatrix, got {type(smoothed).__name__}")


def _as_index(x, n):
    if x is None:
        return -1
    x = int(x)
    return x if 0 <= x < n else -1


def predict_components(smoothed, simmodel: SimilarityModel, users, items, backend=None):
    """(SIR, SUR, SUIR) arrays for dense ``users``/``items``; NaN where absent, -1 means unknown."""
    base, (indptr, indices, values) = _store(smoothed)
    kernel = backend.predict_components if backend is not None else _backend.predict_components
    users = np.ascontiguousarray(users, dtype=np.int64)
    items = np.ascontiguousarray(items, dtype=np.int64)
    return kernel(
        users, items, indptr, indices, values,
        np.ascontiguousarray(base.user_means), np.ascontiguousarray(base.item_means),
        simmodel.user_idx, simmodel.user_sim, simmodel.user_len,
        simmodel.item_idx, simmodel.item_sim, simmodel.item_len,
    )


def _single(smoothed, simmodel, u, i, which):
    base, _ = _store(smoothed)
    u = _as_index(u, base.n_users)
    i = _as_index(i, base.n_items)
    value = predict_components(smoothed, simmodel, [u], [i])[which][0]
    return None if math.isnan(value) else float(value)


def predict_item_based(smoothed, simmodel: SimilarityModel, u: int, i: int):
    """Item mean plus similarity-weighted deviations over the top-M items ``u`` rated."""
    return _single(smoothed, simmodel, u, i, 0)


def predict_user_based(smoothed, simmodel: SimilarityModel, u: int, i: int):
    """User mean plus similarity-weighted deviations of the top-K users who rated ``i``."""
    return _single(smoothed, simmodel, u, i, 1)


def predict_hybrid(smoothed, simmodel: SimilarityModel, u: int, i: int):
    """User mean plus deviations of like-minded users on similar items.

    Each (neighbor user ``v``, neighbor item ``j``) cell with a rating is
    weighted by ``sim(u, v) * sim(i, j)``.
    """
    return _single(smoothed, simmodel, u, i, 2)


def fallback_values(base: RatingMatrix, users, items) -> np.ndarray:
    """User mean, else item mean, else global mean, per query."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    out = np.full(len(users), base.global_mean)
    known_i = items >= 0
    out[known_i] = base.item_means[items[known_i]]
    known_u = users >= 0
    out[known_u] = base.user_means[users[known_u]]
    return out


def predict(smoothed, simmodel: SimilarityModel, params: FusionParams, u, i) -> PredictionBreakdown:
    """Full online prediction for one (user, item) pair of dense indices.

    Unknown or ``None`` indices resolve through the fallback chain.
    """
    base, _ = _store(smoothed)
    u = _as_index(u, base.n_users)
    i = _as_index(i, base.n_items)
    sir, sur, suir = (float(x[0]) for x in predict_components(smoothed, simmodel, [u], [i]))
    chain = (
        base.user_means[u] if u >= 0 else None,
        base.item_means[i] if i >= 0 else None,
        base.global_mean,
    )
    return fuse(sir, sur, suir, params, chain, base.scale)


@dataclass(frozen=True)
class BatchPrediction:
    sir: np.ndarray
    sur: np.ndarray
    suir: np.ndarray
    sr: np.ndarray
    reason: np.ndarray

    @property
    def n_fallback(self) -> int:
        return int(np.count_nonzero(self.reason == 2))

    def breakdown(self, k: int) -> PredictionBreakdown:
        comp = [None if math.isnan(x[k]) else float(x[k]) for x in (self.sir, self.sur, self.suir)]
        return PredictionBreakdown(*comp, sr=float(self.sr[k]), fallback_reason=_REASONS[self.reason[k]])


def predict_batch(smoothed, simmodel: SimilarityModel, params: FusionParams, users, items, backend=None):
    base, _ = _store(smoothed)
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    users = np.where((users >= 0) & (users < base.n_users), users, -1)
    items = np.where((items >= 0) & (items < base.n_items), items, -1)
    sir, sur, suir = predict_components(smoothed, simmodel, users, items, backend)
    sr, reason = fuse_arrays(sir, sur, suir, params, fallback_values(base, users, items), base.scale)
    return BatchPrediction(sir, sur, suir, sr, reason)
