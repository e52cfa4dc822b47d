"""Sparse item-user rating matrix.

External user/item identifiers are mapped to dense indices in order of first
appearance. Ratings are stored twice, as a user-major CSR (``I_u`` rows) and an
item-major CSR (``U_i`` rows), both with sorted column indices, so lookups are
a binary search and every neighborhood kernel can stream either orientation.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DuplicateRating, EmptyMatrix, RatingOutOfScale, UnknownItem, UnknownUser


class RatingTriple(NamedTuple):
    user_id: Hashable
    item_id: Hashable
    rating: float


@dataclass(frozen=True)
class RatingScale:
    min: float
    max: float

    def __post_init__(self):
        if not (self.min < self.max):
            raise ValueError(f"rating scale needs min < max, got [{self.min}, {self.max}]")

    def contains(self, value) -> bool:
        return self.min <= value <= self.max

    def clamp(self, value):
        return np.clip(value, self.min, self.max)


class TripleTable(Sequence):
    """Columnar sequence of :class:`RatingTriple`.

    Identifiers are interned: ``user_codes[k]`` indexes ``user_labels``. Subsets
    made with :meth:`take` share the label tables, so code order (and therefore
    first-appearance order) survives splitting.
    """

    def __init__(self, user_labels, item_labels, user_codes, item_codes, ratings):
        self.user_labels = user_labels
        self.item_labels = item_labels
        self.user_codes = np.asarray(user_codes, dtype=np.int64)
        self.item_codes = np.asarray(item_codes, dtype=np.int64)
        self.ratings = np.asarray(ratings, dtype=np.float64)
        if not (len(self.user_codes) == len(self.item_codes) == len(self.ratings)):
            raise ValueError("column lengths differ")

    @classmethod
    def from_triples(cls, triples: Iterable) -> TripleTable:
        users: dict = {}
        items: dict = {}
        ucodes, icodes, values = [], [], []
        for user, item, rating in triples:
            ucodes.append(users.setdefault(user, len(users)))
            icodes.append(items.setdefault(item, len(items)))
            values.append(float(rating))
        return cls(list(users), list(items), ucodes, icodes, values)

    def __len__(self):
        return len(self.ratings)

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            return RatingTriple(
                self.user_labels[self.user_codes[key]],
                self.item_labels[self.item_codes[key]],
                float(self.ratings[key]),
            )
        return self.take(np.arange(len(self))[key])

    def take(self, indices) -> TripleTable:
        indices = np.asarray(indices, dtype=np.int64)
        return TripleTable(
            self.user_labels,
            self.item_labels,
            self.user_codes[indices],
            self.item_codes[indices],
            self.ratings[indices],
        )

    def __eq__(self, other):
        if not isinstance(other, Sequence) or len(self) != len(other):
            return NotImplemented
        return all(tuple(a) == tuple(b) for a, b in zip(self, other))

    def __repr__(self):
        return f"TripleTable({len(self)} ratings)"


def as_table(triples) -> TripleTable:
    if isinstance(triples, TripleTable):
        return triples
    return TripleTable.from_triples(triples)


def _dense_codes(codes: np.ndarray):
    """Relabel ``codes`` to 0..n-1 by first appearance; return (dense, original code per dense id)."""
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    return rank[inverse.ravel()], uniq[order]


def _csr(rows, cols, values, n_rows):
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, np.ascontiguousarray(cols[order]), np.ascontiguousarray(values[order])


class RatingMatrix:
    """Immutable rating matrix over dense user/item indices.

    Attributes of interest: ``user_ids``/``item_ids`` (external labels by dense
    index), ``user_means``/``item_means`` (the per-user and per-item average
    ratings), ``global_mean``, and the two CSR views ``(u_indptr, u_indices,
    u_values)`` and ``(i_indptr, i_indices, i_values)``.
    """

    def __init__(self, user_ids, item_ids, users, items, values, scale: RatingScale):
        self.scale = scale
        self.user_ids = list(user_ids)
        self.item_ids = list(item_ids)
        self.n_users = len(self.user_ids)
        self.n_items = len(self.item_ids)
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        self.n_ratings = len(values)

        self.u_indptr, self.u_indices, self.u_values = _csr(users, items, values, self.n_users)
        self.i_indptr, self.i_indices, self.i_values = _csr(items, users, values, self.n_items)
        self.user_counts = np.diff(self.u_indptr)
        self.item_counts = np.diff(self.i_indptr)
        with np.errstate(invalid="ignore", divide="ignore"):
            self.user_means = np.bincount(users, weights=values, minlength=self.n_users) / self.user_counts
            self.item_means = np.bincount(items, weights=values, minlength=self.n_items) / self.item_counts
        self.global_mean = float(values.mean()) if self.n_ratings else float("nan")
        for arr in (
            self.u_indptr, self.u_indices, self.u_values,
            self.i_indptr, self.i_indices, self.i_values,
            self.user_counts, self.item_counts, self.user_means, self.item_means,
        ):
            arr.flags.writeable = False
        self._user_index = None
        self._item_index = None

    def __repr__(self):
        return f"RatingMatrix({self.n_users} users x {self.n_items} items, {self.n_ratings} ratings)"

    # -- id mapping -------------------------------------------------------

    def _users(self) -> dict:
        if self._user_index is None:
            self._user_index = {u: k for k, u in enumerate(self.user_ids)}
        return self._user_index

    def _items(self) -> dict:
        if self._item_index is None:
            self._item_index = {i: k for k, i in enumerate(self.item_ids)}
        return self._item_index

    def user_index(self, user_id) -> int:
        try:
            return self._users()[user_id]
        except KeyError:
            raise UnknownUser(user_id) from None

    def item_index(self, item_id) -> int:
        try:
            return self._items()[item_id]
        except KeyError:
            raise UnknownItem(item_id) from None

    def lookup_users(self, user_ids) -> np.ndarray:
        """Dense indices for external ids; -1 where unknown."""
        index = self._users()
        return np.fromiter((index.get(u, -1) for u in user_ids), dtype=np.int64)

    def lookup_items(self, item_ids) -> np.ndarray:
        index = self._items()
        return np.fromiter((index.get(i, -1) for i in item_ids), dtype=np.int64)

    # -- neighborhoods and cells -------------------------------------------

    def _check_user(self, u):
        if not (0 <= u < self.n_users):
            raise UnknownUser(u)

    def _check_item(self, i):
        if not (0 <= i < self.n_items):
            raise UnknownItem(i)

    def items_of(self, u: int) -> np.ndarray:
        """Dense item indices rated by user ``u``, ascending."""
        self._check_user(u)
        return self.u_indices[self.u_indptr[u]:self.u_indptr[u + 1]]

    def user_ratings(self, u: int) -> np.ndarray:
        self._check_user(u)
        return self.u_values[self.u_indptr[u]:self.u_indptr[u + 1]]

    def users_of(self, i: int) -> np.ndarray:
        """Dense user indices who rated item ``i``, ascending."""
        self._check_item(i)
        return self.i_indices[self.i_indptr[i]:self.i_indptr[i + 1]]

    def item_ratings(self, i: int) -> np.ndarray:
        self._check_item(i)
        return self.i_values[self.i_indptr[i]:self.i_indptr[i + 1]]

    def rating(self, u: int, i: int):
        """Observed rating or ``None``."""
        cols = self.items_of(u)
        self._check_item(i)
        k = np.searchsorted(cols, i)
        if k < len(cols) and cols[k] == i:
            return float(self.u_values[self.u_indptr[u] + k])
        return None

    def triples(self):
        for u in range(self.n_users):
            for i, r in zip(self.items_of(u), self.user_ratings(u)):
                yield RatingTriple(self.user_ids[u], self.item_ids[int(i)], float(r))

    @property
    def density(self) -> float:
        """Fraction of filled cells; reported as 0.0 for an empty matrix."""
        if self.n_ratings == 0:
            return 0.0
        return self.n_ratings / (self.n_users * self.n_items)

    def to_dense(self, fill=np.nan) -> np.ndarray:
        out = np.full((self.n_users, self.n_items), fill, dtype=np.float64)
        rows = np.repeat(np.arange(self.n_users), self.user_counts)
        out[rows, self.u_indices] = self.u_values
        return out


def build_matrix(triples, scale: RatingScale) -> RatingMatrix:
    """Validate ``triples`` and build the dual-indexed matrix.

    Raises :class:`RatingOutOfScale` for the first rating outside ``scale`` and
    :class:`DuplicateRating` for the first repeated (user, item) pair, both in
    input order.
    """
    table = as_table(triples)
    if len(table) == 0:
        return RatingMatrix([], [], [], [], [], scale)

    values = table.ratings
    bad = np.flatnonzero(~((values >= scale.min) & (values <= scale.max)))
    if len(bad):
        t = table[int(bad[0])]
        raise RatingOutOfScale(t.user_id, t.item_id, t.rating, scale)

    users, user_codes = _dense_codes(table.user_codes)
    items, item_codes = _dense_codes(table.item_codes)
    keys = users * len(item_codes) + items
    _, first = np.unique(keys, return_index=True)
    if len(first) != len(keys):
        seen = np.zeros(len(keys), dtype=bool)
        seen[first] = True
        t = table[int(np.flatnonzero(~seen)[0])]
        raise DuplicateRating(t.user_id, t.item_id)

    user_ids = [table.user_labels[c] for c in user_codes]
    item_ids = [table.item_labels[c] for c in item_codes]
    return RatingMatrix(user_ids, item_ids, users, items, values, scale)


def density(matrix: RatingMatrix) -> float:
    """|ratings| / (|U| * |I|)."""
    if matrix.n_ratings == 0:
        raise EmptyMatrix()
    return matrix.n_ratings / (matrix.n_users * matrix.n_items)


def user_rating_density(matrix: RatingMatrix, u: int) -> float:
    """Share of the item universe rated by dense user ``u``."""
    matrix._check_user(u)
    return int(matrix.user_counts[u]) / matrix.n_items
