"""Dataset ingestion, min-max normalization and stratified fold planning."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_POSITIVE_TOKENS = ("Y", "yes", "true", "1", "buggy>0")
DEFAULT_NEGATIVE_TOKENS = ("N", "no", "false", "0")


class DatasetError(ValueError):
    """Raised for unreadable, malformed or inconsistent datasets."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawDataset:
    """Feature matrix plus binary defect labels (1 = defective).

    ``row_ids`` tracks the original row each sample came from; synthetic
    samples created by resampling carry ``-1``.
    """

    name: str
    feature_names: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels).astype(np.int64)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if X.shape[0] != y.shape[0]:
            raise DatasetError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if X.shape[1] < 1:
            raise DatasetError("dataset needs at least one feature")
        if len(self.feature_names) != X.shape[1]:
            raise DatasetError("feature_names length does not match column count")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features contain NaN or infinite values")
        if np.any((y != 0) & (y != 1)):
            raise DatasetError("labels must be 0/1")
        ids = np.arange(X.shape[0]) if self.row_ids is None else np.asarray(self.row_ids, dtype=np.int64)
        if ids.shape != y.shape:
            raise DatasetError("row_ids length does not match row count")
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "row_ids", _frozen(ids))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """(non-defective, defective) counts."""
        n_pos = int(self.labels.sum())
        return self.n_rows - n_pos, n_pos

    def is_single_class(self) -> bool:
        return len(np.unique(self.labels)) < 2

    def take(self, rows: Sequence[int] | np.ndarray) -> "RawDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return RawDataset(self.name, self.feature_names, self.features[rows],
                          self.labels[rows], self.row_ids[rows])

    def replace(self, features=None, labels=None, row_ids=None) -> "RawDataset":
        return RawDataset(
            self.name,
            self.feature_names,
            self.features if features is None else features,
            self.labels if labels is None else labels,
            self.row_ids if row_ids is None else row_ids,
        )


@dataclass(frozen=True)
class NormalizationParams:
    min_values: np.ndarray
    max_values: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.min_values, dtype=float)
        hi = np.asarray(self.max_values, dtype=float)
        if lo.shape != hi.shape or np.any(hi < lo):
            raise DatasetError("normalization bounds need max >= min per feature")
        object.__setattr__(self, "min_values", _frozen(lo))
        object.__setattr__(self, "max_values", _frozen(hi))


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: tuple[tuple[np.ndarray, np.ndarray], ...]


# ---------------------------------------------------------------------------
# label mapping


def _label_mapper(positive: Iterable[str], negative: Iterable[str]):
    pos = {t.lower() for t in positive}
    neg = {t.lower() for t in negative}
    count_rule = "buggy>0" in pos
    pos.discard("buggy>0")

    def convert(token: str) -> int:
        t = token.strip().strip("'\"").lower()
        if t in pos:
            return 1
        if t in neg:
            return 0
        if count_rule:
            try:
                value = float(t)
            except ValueError:
                pass
            else:
                if value >= 0 and value == int(value):
                    return int(value > 0)
        raise DatasetError(f"unknown label value {token!r}")

    return convert


def _to_float(cell: str, column: str, row: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DatasetError(f"non-numeric value {cell!r} in column {column!r} (data row {row})") from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite value {cell!r} in column {column!r} (data row {row})")
    return value


def _build(name, header, rows, label_column, drop_columns, positive, negative) -> RawDataset:
    if label_column is None:
        label_column = header[-1]
    lower = [h.lower() for h in header]
    if label_column.lower() not in lower:
        raise DatasetError(f"label column {label_column!r} not found")
    label_idx = lower.index(label_column.lower())
    drop = {d.lower() for d in drop_columns}
    feat_idx = [i for i, h in enumerate(lower) if i != label_idx and h not in drop]
    if not feat_idx:
        raise DatasetError("no feature columns left")
    if len(rows) < 2:
        raise DatasetError("dataset needs at least 2 rows")
    convert = _label_mapper(positive, negative)
    X = np.empty((len(rows), len(feat_idx)))
    y = np.empty(len(rows), dtype=np.int64)
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DatasetError(f"data row {r + 1} has {len(row)} cells, expected {len(header)}")
        for c, j in enumerate(feat_idx):
            X[r, c] = _to_float(row[j], header[j], r + 1)
        y[r] = convert(row[label_idx])
    return RawDataset(name, tuple(header[j] for j in feat_idx), X, y)


def _read_csv(path: Path):
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = [[c.strip() for c in row] for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    return rows[0], rows[1:]


_ATTR_RE = re.compile(r"@attribute\s+('[^']*'|\"[^\"]*\"|\S+)\s+(.+)$", re.IGNORECASE)


def _read_arff(path: Path):
    header: list[str] = []
    rows: list[list[str]] = []
    in_data = False
    relation_seen = False
    with path.open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if in_data:
                if line.startswith("{"):
                    raise DatasetError(f"{path}:{lineno}: sparse ARFF rows are not supported")
                rows.append([c.strip() for c in next(csv.reader([line], quotechar="'", skipinitialspace=True))])
                continue
            key = line.split(None, 1)[0].lower()
            if key == "@relation":
                relation_seen = True
            elif key == "@attribute":
                m = _ATTR_RE.match(line)
                if not m:
                    raise DatasetError(f"{path}:{lineno}: malformed @attribute")
                name, kind = m.group(1).strip("'\""), m.group(2).strip()
                if not (kind.lower() in ("numeric", "real", "integer") or kind.startswith("{")):
                    raise DatasetError(f"{path}:{lineno}: unsupported attribute type {kind!r}")
                header.append(name)
            elif key == "@data":
                in_data = True
            else:
                raise DatasetError(f"{path}:{lineno}: unsupported ARFF directive {key!r}")
    if not relation_seen or not in_data:
        raise DatasetError(f"{path}: missing @relation or @data section")
    return header, rows


def load_dataset(
    path: str | Path,
    format: str | None = None,
    label_column: str | None = None,
    *,
    positive_tokens: Iterable[str] = DEFAULT_POSITIVE_TOKENS,
    negative_tokens: Iterable[str] = DEFAULT_NEGATIVE_TOKENS,
    drop_columns: Iterable[str] = (),
    name: str | None = None,
) -> RawDataset:
    """Load a CSV or ARFF defect dataset.

    ``format`` defaults to the file extension. ``label_column`` defaults to the
    last column. Label tokens are matched case-insensitively; the ``buggy>0``
    positive token maps non-negative integer bug counts to ``count > 0``.
    Columns named in ``drop_columns`` (e.g. PROMISE ``name``/``version``) are
    skipped; any other non-numeric cell is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"{path}: no such file")
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "csv":
        header, rows = _read_csv(path)
    elif fmt == "arff":
        header, rows = _read_arff(path)
    else:
        raise DatasetError(f"unsupported format {fmt!r}")
    return _build(name or path.stem, header, rows, label_column, drop_columns,
                  positive_tokens, negative_tokens)


def save_csv(ds: RawDataset, path: str | Path, label_column: str = "defective") -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*ds.feature_names, label_column])
        for row, label in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


# ---------------------------------------------------------------------------
# normalization


def fit_normalizer(ds: RawDataset) -> NormalizationParams:
    return NormalizationParams(ds.features.min(axis=0), ds.features.max(axis=0))


def normalize(ds: RawDataset, params: NormalizationParams) -> RawDataset:
    """Min-max scale each column; constant columns map to 0."""
    if params.min_values.shape[0] != ds.n_features:
        raise DatasetError("normalization params do not match the dataset width")
    span = params.max_values - params.min_values
    safe = np.where(span > 0, span, 1.0)
    X = (ds.features - params.min_values) / safe
    X[:, span == 0] = 0.0
    return ds.replace(features=X)


# ---------------------------------------------------------------------------
# fold planning


def stratified_kfold(ds: RawDataset | np.ndarray, k: int, seed: int) -> FoldPlan:
    """Stratified k-fold split driven by numpy's PCG64 generator.

    Each class's indices are shuffled, then dealt round-robin to the folds;
    the dealing position carries over from one class to the next so fold
    sizes differ by at most one.
    """
    labels = ds.labels if isinstance(ds, RawDataset) else np.asarray(ds)
    if k < 2:
        raise DatasetError("k must be at least 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    assignment = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise DatasetError(f"class {cls} has {len(idx)} members, fewer than k={k}")
        idx = rng.permutation(idx)
        assignment[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    everything = np.arange(len(labels))
    folds = tuple(
        (_frozen(everything[assignment != f]), _frozen(everything[assignment == f])) for f in range(k)
    )
    return FoldPlan(k=k, seed=seed, folds=folds)
