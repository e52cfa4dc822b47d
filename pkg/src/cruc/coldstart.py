"""Offline filtering: pick frequent raters, cluster them, then smooth their missing ratings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, TooManyClusters
from .matrix import RatingMatrix

OBSERVED, SMOOTHED, FALLBACK = 0, 1, 2
PROVENANCE = {OBSERVED: "observed", SMOOTHED: "smoothed", FALLBACK: "fallback"}

_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class SignificantUserSet:
    members: np.ndarray  # sorted dense user indices
    threshold: float

    def __contains__(self, u):
        k = np.searchsorted(self.members, u)
        return bool(k < len(self.members) and self.members[k] == u)

    def __len__(self):
        return len(self.members)

    def mask(self, n_users: int) -> np.ndarray:
        out = np.zeros(n_users, dtype=bool)
        out[self.members] = True
        return out


def significant_from_counts(counts, n_items: int) -> SignificantUserSet:
    """Selection from per-user rating counts over a catalogue of ``n_items`` items."""
    counts = np.asarray(counts, dtype=np.int64)
    if len(counts) == 0 or n_items <= 0:
        raise EmptyMatrix()
    total = int(counts.sum())
    # rho_u > mean(rho)  <=>  |I_u| * |U| > sum_v |I_v|, compared in integers
    members = np.flatnonzero(counts * len(counts) > total)
    return SignificantUserSet(members, total / (len(counts) * n_items))


def select_significant_users(matrix: RatingMatrix) -> SignificantUserSet:
    """Users whose rating density strictly exceeds the mean density over all users."""
    if matrix.n_ratings == 0:
        raise EmptyMatrix()
    return significant_from_counts(matrix.user_counts, matrix.n_items)


def all_users(matrix: RatingMatrix) -> SignificantUserSet:
    """Every user as a member; used when significance filtering is switched off."""
    return SignificantUserSet(np.arange(matrix.n_users), 0.0)


@dataclass(frozen=True)
class ClusterModel:
    members: np.ndarray  # dense user indices, ascending
    labels: np.ndarray  # cluster id per member
    centroids: np.ndarray  # c x n_items
    c: int
    seed: int
    iterations_run: int
    converged: bool
    sse_trace: list = field(default_factory=list)

    @property
    def assignments(self) -> dict:
        return {int(u): int(k) for u, k in zip(self.members, self.labels)}

    def cluster_of(self, u: int) -> int:
        k = np.searchsorted(self.members, u)
        if k == len(self.members) or self.members[k] != u:
            raise KeyError(u)
        return int(self.labels[k])

    def cluster_members(self, cluster: int) -> np.ndarray:
        return self.members[self.labels == cluster]


def user_vectors(matrix: RatingMatrix, users) -> np.ndarray:
    """Dense rows over all items, missing cells filled with the user's mean."""
    users = np.asarray(users, dtype=np.int64)
    out = _dense_rows(matrix, users)
    return np.where(np.isnan(out), matrix.user_means[users][:, None], out)


def _sq_distances(X, C):
    out = np.empty((len(X), len(C)))
    step = max(1, _BLOCK_CELLS // max(1, C.size))
    for s in range(0, len(X), step):
        diff = X[s:s + step, None, :] - C[None, :, :]
        out[s:s + step] = np.einsum("pcd,pcd->pc", diff, diff)
    return out


def _sse(X, C, labels):
    diff = X - C[labels]
    return float(np.einsum("pd,pd->", diff, diff))


def _repair_empty(X, C, labels, c):
    """Give every empty cluster the member farthest from its own centroid."""
    sizes = np.bincount(labels, minlength=c)
    for empty in np.flatnonzero(sizes == 0):
        dist = ((X - C[labels]) ** 2).sum(axis=1)
        dist[sizes[labels] <= 1] = -1.0
        p = int(np.argmax(dist))
        sizes[labels[p]] -= 1
        labels[p] = empty
        sizes[empty] = 1
        C[empty] = X[p]
    return labels


def kmeans(X: np.ndarray, c: int, max_iters: int, seed: int, trace: bool = False):
    """Lloyd iterations; returns (labels, centroids, iterations_run, converged, sse_trace)."""
    n = len(X)
    rng = np.random.default_rng(seed)
    C = X[np.sort(rng.choice(n, size=c, replace=False))].copy()
    labels = np.argmin(_sq_distances(X, C), axis=1)
    sse = [_sse(X, C, labels)] if trace else []
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        labels = _repair_empty(X, C, labels, c)
        counts = np.bincount(labels, minlength=c)
        C = np.zeros_like(C)
        np.add.at(C, labels, X)
        C /= counts[:, None]
        new = np.argmin(_sq_distances(X, C), axis=1)
        if trace:
            sse.append(_sse(X, C, new))
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
    labels = _repair_empty(X, C, labels, c)
    return labels, C, it, converged, sse


def cluster_users(
    matrix: RatingMatrix,
    users: SignificantUserSet,
    c: int,
    max_iters: int = 100,
    seed: int = 0,
    trace: bool = False,
) -> ClusterModel:
    """K-means over mean-filled user rating vectors (Euclidean distance).

    Initial centroids are ``c`` distinct members drawn with ``seed``. With
    ``trace`` the within-cluster SSE after every assignment step is recorded.
    """
    members = np.sort(np.asarray(users.members, dtype=np.int64))
    if c < 1 or c > len(members):
        raise TooManyClusters(c, len(members))
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    X = user_vectors(matrix, members)
    labels, C, it, converged, sse = kmeans(X, c, max_iters, seed, trace)
    return ClusterModel(members, labels, C, c, seed, it, converged, sse)


class SmoothedMatrix:
    """A rating matrix with cluster-smoothed cells for clustered users.

    ``values``/``provenance`` are dense blocks with one row per clustered user
    (``rows[u]`` gives the row, -1 for users outside the clustering). Fallback
    cells hold the user's mean but are not offered to predictors as ratings.
    """

    def __init__(self, base: RatingMatrix, users: np.ndarray, values: np.ndarray, provenance: np.ndarray):
        self.base = base
        self.scale = base.scale
        self.users = users
        self.values = values
        self.provenance = provenance
        self.rows = np.full(base.n_users, -1, dtype=np.int64)
        self.rows[users] = np.arange(len(users))
        self._usable = None

    def value(self, u: int, i: int):
        """(value, provenance name); value is ``None`` for an unfilled cell."""
        row = self.rows[u]
        if row >= 0:
            return float(self.values[row, i]), PROVENANCE[int(self.provenance[row, i])]
        r = self.base.rating(u, i)
        return r, ("observed" if r is not None else "missing")

    def usable_csr(self):
        """User-major CSR of observed plus smoothed cells."""
        if self._usable is None:
            base = self.base
            rows = [np.repeat(np.arange(base.n_users), base.user_counts)]
            cols = [base.u_indices]
            vals = [base.u_values]
            r, i = np.nonzero(self.provenance == SMOOTHED)
            rows.append(self.users[r])
            cols.append(i)
            vals.append(self.values[r, i])
            rows, cols, vals = (np.concatenate(x) for x in (rows, cols, vals))
            order = np.lexsort((cols, rows))
            indptr = np.zeros(base.n_users + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows, minlength=base.n_users), out=indptr[1:])
            self._usable = (
                indptr,
                np.ascontiguousarray(cols[order], dtype=np.int64),
                np.ascontiguousarray(vals[order], dtype=np.float64),
            )
        return self._usable


def smooth(matrix: RatingMatrix, clusters: ClusterModel, clamp: bool = True) -> SmoothedMatrix:
    """Fill each clustered user's missing cells from cluster peers' deviations.

    For user ``u`` and unrated item ``i`` the value is ``u``'s mean plus the
    average of ``r_vi - mean_v`` over cluster peers ``v`` who rated ``i``; with
    no such peer it falls back to ``u``'s mean. Observed cells are copied as is.
    """
    users = clusters.members
    values = np.empty((len(users), matrix.n_items))
    provenance = np.empty((len(users), matrix.n_items), dtype=np.int8)
    row_of = {int(u): k for k, u in enumerate(users)}
    for cluster in range(clusters.c):
        group = clusters.cluster_members(cluster)
        rows = np.array([row_of[int(u)] for u in group], dtype=np.int64)
        observed = _dense_rows(matrix, group)
        rated = ~np.isnan(observed)
        means = matrix.user_means[group]
        dev = np.where(rated, observed - means[:, None], 0.0)
        dev_sum = dev.sum(axis=0)
        peers = rated.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            filled = means[:, None] + (dev_sum / peers)[None, :]
        if clamp:
            filled = np.clip(filled, matrix.scale.min, matrix.scale.max)
        has_peer = np.broadcast_to(peers > 0, filled.shape)
        block = np.where(rated, observed, np.where(has_peer, filled, means[:, None]))
        prov = np.where(rated, OBSERVED, np.where(has_peer, SMOOTHED, FALLBACK)).astype(np.int8)
        values[rows] = block
        provenance[rows] = prov
    return SmoothedMatrix(matrix, users, values, provenance)


def _dense_rows(matrix: RatingMatrix, users) -> np.ndarray:
    out = np.full((len(users), matrix.n_items), np.nan)
    for row, u in enumerate(users):
        out[row, matrix.items_of(u)] = matrix.user_ratings(u)
    return out
