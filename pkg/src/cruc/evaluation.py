"""Seeded train/test splits and the error metrics behind the experiment sweep."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .config import ExperimentConfig
from .errors import DegenerateSplit, EmptyInput, EmptyMatrix
from .ingestion import IOT_EVENTS, parse_iot_events, parse_movielens, reformulate_iot
from .matrix import as_table, build_matrix
from .pipeline import SCHEMES, fit_scheme

log = logging.getLogger(__name__)

COLUMNS = ("scheme", "fraction", "fold", "mae", "rmse", "n_predicted", "n_fallback", "wall_time_ms")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int = 0
    folds: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.folds < 1:
            raise ValueError(f"folds must be positive, got {self.folds}")


def _train_size(fraction, n):
    return int(math.floor(fraction * n + 1e-9))


def split(triples, spec: SplitSpec):
    """Seeded random train/test partitions, one ``(train, test)`` pair per fold.

    With one fold the test set is the complement of a uniformly drawn training
    set of ``floor(fraction * n)`` ratings. With ``folds > 1`` the ratings are
    dealt into ``folds`` disjoint test sets; each fold trains on a uniform
    ``floor(fraction * n)``-sized draw from the other folds. Both sides keep
    input order.
    """
    table = as_table(triples)
    n = len(table)
    n_train = _train_size(spec.train_fraction, n)
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    if spec.folds == 1:
        if n_train == 0 or n_train == n:
            raise DegenerateSplit(f"{n} ratings at fraction {spec.train_fraction} leave an empty side")
        return [(table.take(np.sort(perm[:n_train])), table.take(np.sort(perm[n_train:])))]
    if n < spec.folds:
        raise DegenerateSplit(f"cannot form {spec.folds} folds from {n} ratings")
    out = []
    chunks = np.array_split(perm, spec.folds)
    for k, test_idx in enumerate(chunks):
        rest = np.concatenate([c for j, c in enumerate(chunks) if j != k])
        if n_train == 0 or n_train > len(rest):
            raise DegenerateSplit(
                f"fraction {spec.train_fraction} needs {n_train} training ratings but fold {k} leaves {len(rest)}"
            )
        out.append((table.take(np.sort(rest[:n_train])), table.take(np.sort(test_idx))))
    return out


def _errors(pairs):
    pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.float64)
    if pairs.size == 0:
        raise EmptyInput("prediction list")
    return pairs[:, 0] - pairs[:, 1]


def mae(pairs) -> float:
    """Mean absolute error of ``(predicted, actual)`` pairs."""
    return float(np.mean(np.abs(_errors(pairs))))


def rmse(pairs) -> float:
    """Root mean squared error of ``(predicted, actual)`` pairs."""
    e = _errors(pairs)
    return float(math.sqrt(np.mean(e * e)))


@dataclass(frozen=True)
class EvalRow:
    scheme: str
    fraction: float
    fold: int
    mae: float
    rmse: float
    n_predicted: int
    n_fallback: int
    wall_time_ms: int


@dataclass
class EvalReport:
    config: dict
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# cruc experiment report\n")
        for key, value in self.config.items():
            buf.write(f"# {key} = {_echo_value(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.scheme, repr(r.fraction), r.fold, f"{r.mae:.10f}", f"{r.rmse:.10f}",
                r.n_predicted, r.n_fallback, r.wall_time_ms,
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"config": self.config, "columns": list(COLUMNS), "rows": [asdict(r) for r in self.rows]}
        return json.dumps(doc, indent=2) + "\n"

    def row(self, scheme, fraction, fold=0) -> EvalRow:
        for r in self.rows:
            if r.scheme == scheme and r.fraction == fraction and r.fold == fold:
                return r
        raise KeyError((scheme, fraction, fold))


def _echo_value(value):
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "on" if value else "off"
    return "" if value is None else str(value)


def load_triples(config: ExperimentConfig):
    if config.data_format == IOT_EVENTS:
        events, _ = parse_iot_events(config.data_path, strict=config.strict_parse)
        return reformulate_iot(events, config.rating_scale)
    triples, stats = parse_movielens(config.data_path, config.data_format, strict=config.strict_parse)
    if stats.n_skipped:
        log.warning("skipped %d malformed lines in %s", stats.n_skipped, config.data_path)
    return triples


def evaluate_cell(scheme, train, test, config: ExperimentConfig, fraction, fold) -> EvalRow:
    start = time.perf_counter()
    matrix = build_matrix(train, config.rating_scale)
    model = fit_scheme(scheme, matrix, config.model_params())
    pred, fell_back = model.predict(
        [test.user_labels[c] for c in test.user_codes], [test.item_labels[c] for c in test.item_codes]
    )
    pairs = np.column_stack([pred, test.ratings])
    elapsed = int(round((time.perf_counter() - start) * 1000)) if config.timing else 0
    row = EvalRow(scheme, fraction, fold, mae(pairs), rmse(pairs), len(test), int(fell_back.sum()), elapsed)
    log.info(
        "%-13s fraction=%.2f fold=%d mae=%.4f rmse=%.4f fallback=%d/%d",
        scheme, fraction, fold, row.mae, row.rmse, row.n_fallback, row.n_predicted,
    )
    return row


def run_experiment(config: ExperimentConfig, triples=None) -> EvalReport:
    """Evaluate every configured scheme on every fraction and fold.

    ``triples`` bypasses loading ``config.data_path``. Rows come back ordered
    by (scheme, fraction, fold) with schemes in canonical order, independent of
    ``config.threads``.
    """
    config.validate()
    table = as_table(triples if triples is not None else load_triples(config))
    if len(table) == 0:
        raise EmptyMatrix("dataset")
    schemes = [s for s in SCHEMES if s in config.schemes]
    cells = []
    for fraction in sorted(set(config.fractions)):
        folds = split(table, SplitSpec(fraction, config.seed, config.folds))
        for fold, (train, test) in enumerate(folds):
            for scheme in schemes:
                cells.append((scheme, train, test, fraction, fold))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(lambda c: evaluate_cell(c[0], c[1], c[2], config, c[3], c[4]), cells))
    else:
        rows = [evaluate_cell(s, tr, te, config, f, k) for s, tr, te, f, k in cells]
    order = {s: n for n, s in enumerate(SCHEMES)}
    rows.sort(key=lambda r: (order[r.scheme], r.fraction, r.fold))
    return EvalReport(config.echo(), rows)
