"""Pearson correlation over co-rated overlaps and precomputed top-M/top-K neighborhoods."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import ZeroVariance
from .matrix import RatingMatrix

VAR_EPS = 1e-12
DEFAULT_MIN_OVERLAP = 2


class Neighbor(NamedTuple):
    id: int
    sim: float


def _pcc_from_sums(n, sx, sy, sxx, syy, sxy):
    vx = n * sxx - sx * sx
    vy = n * syy - sy * sy
    if vx <= VAR_EPS * n * sxx or vy <= VAR_EPS * n * syy:
        raise ZeroVariance()
    num = n * sxy - sx * sy
    # a function of the exact ratio num^2 / (vx * vy): equal correlations give equal floats
    r = math.copysign(math.sqrt((num * num) / (vx * vy)), num)
    return min(1.0, max(-1.0, r))


def pcc(pairs) -> float:
    """Pearson correlation of ``(x, y)`` pairs with population moments.

    Raises :class:`ZeroVariance` when either coordinate is constant.
    """
    n = sx = sy = sxx = syy = sxy = 0.0
    for x, y in pairs:
        x = float(x)
        y = float(y)
        n += 1.0
        sx += x
        sy += y
        sxx += x * x
        syy += y * y
        sxy += x * y
    return _pcc_from_sums(n, sx, sy, sxx, syy, sxy)


def _overlap_pcc(idx_a, val_a, idx_b, val_b, min_overlap):
    _, ka, kb = np.intersect1d(idx_a, idx_b, assume_unique=True, return_indices=True)
    if len(ka) < min_overlap:
        return None
    try:
        return pcc(zip(val_a[ka].tolist(), val_b[kb].tolist()))
    except ZeroVariance:
        return None


def item_similarity(matrix: RatingMatrix, i: int, j: int, min_overlap: int = DEFAULT_MIN_OVERLAP):
    """PCC between items ``i`` and ``j`` over their common raters; ``None`` without evidence."""
    return _overlap_pcc(
        matrix.users_of(i), matrix.item_ratings(i), matrix.users_of(j), matrix.item_ratings(j), min_overlap
    )


def user_similarity(matrix: RatingMatrix, u: int, v: int, min_overlap: int = DEFAULT_MIN_OVERLAP):
    """PCC between users ``u`` and ``v`` over their commonly rated items; ``None`` without evidence."""
    return _overlap_pcc(
        matrix.items_of(u), matrix.user_ratings(u), matrix.items_of(v), matrix.user_ratings(v), min_overlap
    )


@dataclass(frozen=True)
class SimilarityModel:
    """Per-item and per-user neighbor lists, padded to width ``m``/``k``.

    Row ``x`` of ``item_idx``/``item_sim`` holds ``item_len[x]`` live entries,
    sorted by similarity descending then index ascending; padding is -1/0.0.
    """

    item_idx: np.ndarray
    item_sim: np.ndarray
    item_len: np.ndarray
    user_idx: np.ndarray
    user_sim: np.ndarray
    user_len: np.ndarray
    m: int
    k: int
    min_overlap: int

    def item_neighbors(self, i: int) -> list[Neighbor]:
        n = int(self.item_len[i])
        return [Neighbor(int(a), float(s)) for a, s in zip(self.item_idx[i, :n], self.item_sim[i, :n])]

    def user_neighbors(self, u: int) -> list[Neighbor]:
        n = int(self.user_len[u])
        return [Neighbor(int(a), float(s)) for a, s in zip(self.user_idx[u, :n], self.user_sim[u, :n])]


def _candidate_mask(n, candidates):
    if candidates is None:
        return np.ones(n, dtype=np.uint8)
    candidates = np.asarray(candidates)
    if candidates.dtype == bool:
        return candidates.astype(np.uint8)
    mask = np.zeros(n, dtype=np.uint8)
    mask[candidates.astype(np.int64)] = 1
    return mask


def build_similarity_model(
    matrix: RatingMatrix,
    M: int,
    K: int,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
    user_candidates=None,
    backend=None,
) -> SimilarityModel:
    """Offline neighborhood precomputation.

    ``user_candidates`` (boolean mask or index array) restricts which users may
    appear in any user's neighbor list; owners are always every user.
    ``backend`` overrides the import-time kernel choice (a module exposing
    ``topk_pcc``).
    """
    if M < 1 or K < 1:
        raise ValueError(f"neighborhood sizes must be positive, got M={M}, K={K}")
    if min_overlap < 2:
        raise ValueError(f"min_overlap must be at least 2, got {min_overlap}")
    topk = backend.topk_pcc if backend is not None else _backend.topk_pcc
    items = topk(
        matrix.i_indptr, matrix.i_indices, matrix.i_values,
        matrix.u_indptr, matrix.u_indices, matrix.u_values,
        np.ones(matrix.n_items, dtype=np.uint8), int(M), int(min_overlap),
    )
    users = topk(
        matrix.u_indptr, matrix.u_indices, matrix.u_values,
        matrix.i_indptr, matrix.i_indices, matrix.i_values,
        _candidate_mask(matrix.n_users, user_candidates), int(K), int(min_overlap),
    )
    return SimilarityModel(*items, *users, m=int(M), k=int(K), min_overlap=int(min_overlap))
