"""MovieLens rating files and IoT location-dwell logs as rating triples."""

from __future__ import annotations

import io
import math
import sys
from collections.abc import Hashable
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import IoFailure, MalformedLine, ZeroTotalDwell
from .matrix import RatingScale, TripleTable, as_table

DOUBLE_COLON = "double-colon"
TAB_SEPARATED = "tab-separated"
IOT_EVENTS = "iot-events"
FORMATS = (DOUBLE_COLON, TAB_SEPARATED, IOT_EVENTS)
_SEPARATORS = {DOUBLE_COLON: "::", TAB_SEPARATED: "\t"}

# native scales of the MovieLens releases in each layout (ML-100K is 1..5, ML-10M is 0.5..5)
DEFAULT_SCALES = {TAB_SEPARATED: RatingScale(1.0, 5.0), DOUBLE_COLON: RatingScale(0.5, 5.0)}


class SensorEvent(NamedTuple):
    user_id: Hashable
    location_id: Hashable
    dwell: float


@dataclass(frozen=True)
class DatasetStats:
    n_users: int
    n_items: int
    n_ratings: int
    global_mean: float
    density: float
    avg_items_per_user: float
    avg_users_per_item: float
    n_skipped: int = 0

    FIELDS = (
        "n_users", "n_items", "n_ratings", "global_mean",
        "density", "avg_items_per_user", "avg_users_per_item",
    )

    @classmethod
    def from_counts(cls, n_users, n_items, n_ratings, rating_sum, n_skipped=0):
        if n_ratings == 0:
            return cls(0, 0, 0, math.nan, 0.0, 0.0, 0.0, n_skipped)
        return cls(
            n_users, n_items, n_ratings,
            rating_sum / n_ratings,
            n_ratings / (n_users * n_items),
            n_ratings / n_users,
            n_ratings / n_items,
            n_skipped,
        )

    def format(self) -> str:
        lines = []
        for name in self.FIELDS:
            v = getattr(self, name)
            lines.append(f"{name}: {v}" if isinstance(v, int) else f"{name}: {v:.6f}")
        return "\n".join(lines)


def compute_stats(triples) -> DatasetStats:
    """Stats recomputed from a triple sequence (interned or not)."""
    table = as_table(triples)
    return DatasetStats.from_counts(
        len(np.unique(table.user_codes)),
        len(np.unique(table.item_codes)),
        len(table),
        float(sum(table.ratings.tolist())),
    )


def _open_lines(source):
    if source is None or source == "-":
        return sys.stdin, False
    if isinstance(source, (str, Path)):
        try:
            return open(source, encoding="utf-8", newline=None), True
        except OSError as exc:
            raise IoFailure(f"cannot read {source}: {exc.strerror or exc}") from exc
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), False
    return source, False


def _records(source, n_fields, sep, strict, convert):
    """Yield converted records; returns the skipped-line count via StopIteration value."""
    stream, owned = _open_lines(source)
    skipped = 0
    try:
        for line_no, line in enumerate(stream, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split(sep)
            try:
                if len(parts) != n_fields:
                    raise ValueError
                rec = convert(parts)
            except ValueError:
                if strict:
                    raise MalformedLine(line_no, line) from None
                skipped += 1
                continue
            yield rec
    except UnicodeDecodeError as exc:
        raise IoFailure(f"input is not UTF-8: {exc}") from exc
    finally:
        if owned:
            stream.close()
    return skipped


def _rating_record(parts):
    user, item, rating, ts = parts
    if not user or not item:
        raise ValueError
    r = float(rating)
    int(ts)
    if not math.isfinite(r):
        raise ValueError
    return user, item, r


def parse_movielens(source, format: str = TAB_SEPARATED, strict: bool = True):
    """Read ``user<sep>item<sep>rating<sep>timestamp`` records.

    ``format`` is ``"double-colon"`` (``::``) or ``"tab-separated"``. Blank lines
    are ignored. In strict mode the first malformed line raises
    :class:`MalformedLine`; otherwise such lines are skipped and counted in
    ``stats.n_skipped``. Timestamps are validated and dropped.

    Returns ``(triples, stats)`` where ``triples`` is a :class:`TripleTable` in
    file order.
    """
    try:
        sep = _SEPARATORS[format]
    except KeyError:
        raise ValueError(f"unknown rating format {format!r}") from None
    users: dict = {}
    items: dict = {}
    ucodes, icodes, values = [], [], []
    total = 0.0
    records = _records(source, 4, sep, strict, _rating_record)
    while True:
        try:
            user, item, r = next(records)
        except StopIteration as stop:
            skipped = stop.value or 0
            break
        ucodes.append(users.setdefault(user, len(users)))
        icodes.append(items.setdefault(item, len(items)))
        values.append(r)
        total += r
    table = TripleTable(list(users), list(items), ucodes, icodes, values)
    stats = DatasetStats.from_counts(len(users), len(items), len(values), total, skipped)
    return table, stats


def _event_record(parts):
    user, loc, dwell = parts
    if not user or not loc:
        raise ValueError
    d = float(dwell)
    if not (math.isfinite(d) and d >= 0):
        raise ValueError
    return SensorEvent(user, loc, d)


def parse_iot_events(source, strict: bool = True):
    """Read ``user<TAB>location<TAB>dwell`` records; returns ``(events, n_skipped)``."""
    events = []
    records = _records(source, 3, "\t", strict, _event_record)
    while True:
        try:
            events.append(next(records))
        except StopIteration as stop:
            return events, stop.value or 0


def dwell_proportions(events) -> dict:
    """Per user, the share of total dwell time spent at each location."""
    dwell: dict = {}
    for user, loc, d in events:
        if d < 0 or not math.isfinite(d):
            raise ValueError(f"dwell must be a non-negative number, got {d!r} for user {user!r}")
        per_user = dwell.setdefault(user, {})
        per_user[loc] = per_user.get(loc, 0.0) + float(d)
    out = {}
    for user, locs in dwell.items():
        total = math.fsum(locs.values())
        if total <= 0:
            raise ZeroTotalDwell(user)
        out[user] = {loc: d / total for loc, d in locs.items()}
    return out


def reformulate_iot(events, scale: RatingScale) -> TripleTable:
    """Turn location dwell logs into one rating per (user, visited location).

    A user's dwell distribution over locations is mapped affinely onto
    ``scale``: a location holding all of the user's time rates ``scale.max``.
    """
    triples = []
    span = scale.max - scale.min
    for user, dist in dwell_proportions(events).items():
        for loc, p in dist.items():
            triples.append((user, loc, min(scale.max, scale.min + p * span)))
    return TripleTable.from_triples(triples)
