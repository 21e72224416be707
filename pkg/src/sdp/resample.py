"""SMOTE-family oversampling and Tomek-link cleaning for binary defect data."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import RawDataset


class ResampleError(ValueError):
    pass


class Borderline(str, enum.Enum):
    SAFE = "SAFE"
    DANGER = "DANGER"
    NOISE = "NOISE"


@dataclass(frozen=True)
class SamplingReport:
    method: str
    before: tuple[int, int]  # (majority, minority)
    after: tuple[int, int]
    synthetic_created: int
    tomek_pairs_removed: int
    fallback: bool = False

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "before_majority": self.before[0],
            "before_minority": self.before[1],
            "after_majority": self.after[0],
            "after_minority": self.after[1],
            "synthetic_created": self.synthetic_created,
            "tomek_pairs_removed": self.tomek_pairs_removed,
            "fallback": self.fallback,
        }


# ---------------------------------------------------------------------------
# neighbor search

_CHUNK_ELEMENTS = 4_000_000


def _knn_table(points: np.ndarray, queries: np.ndarray, pool: np.ndarray, k: int) -> np.ndarray:
    """k nearest members of ``pool`` for every row index in ``queries``.

    Distances are exact squared Euclidean; a query never matches its own row.
    Ties resolve to the lower row index because ``pool`` is sorted and the
    argsort is stable.
    """
    pool = np.sort(np.asarray(pool, dtype=np.int64))
    queries = np.asarray(queries, dtype=np.int64)
    P = points[pool]
    out = np.empty((len(queries), k), dtype=np.int64)
    step = max(1, _CHUNK_ELEMENTS // max(1, P.size))
    for start in range(0, len(queries), step):
        q = queries[start:start + step]
        diff = points[q][:, None, :] - P[None, :, :]
        d = np.einsum("ijk,ijk->ij", diff, diff)
        d[q[:, None] == pool[None, :]] = np.inf
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        out[start:start + step] = pool[order]
    return out


def knn_indices(points: np.ndarray, target_row: int, k: int) -> list[int]:
    """Indices of the ``k`` nearest rows to ``target_row`` (itself excluded)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if k < 1 or k >= len(points):
        raise ResampleError(f"k={k} needs 1 <= k < {len(points)} points")
    table = _knn_table(points, np.array([target_row]), np.arange(len(points)), k)
    return table[0].tolist()


def smote_synthesize(base, neighbor, delta: float) -> np.ndarray:
    base = np.asarray(base, dtype=float)
    return base + delta * (np.asarray(neighbor, dtype=float) - base)


# ---------------------------------------------------------------------------
# helpers


def _classes(ds: RawDataset) -> tuple[int, int, np.ndarray, np.ndarray]:
    if ds.is_single_class():
        raise ResampleError("resampling needs both classes present")
    pos = np.flatnonzero(ds.labels == 1)
    neg = np.flatnonzero(ds.labels == 0)
    # defective is the minority in every defect dataset, but do not assume it
    if len(pos) <= len(neg):
        return 0, 1, neg, pos
    return 1, 0, pos, neg


def _oversample(ds: RawDataset, seeds: np.ndarray, minority: np.ndarray, minority_label: int,
                need: int, k: int, rng: np.random.Generator) -> RawDataset:
    """Append ``need`` synthetic rows, dealing bases round-robin over ``seeds``."""
    if need <= 0:
        return ds
    X = ds.features
    k_eff = min(k, len(minority) - 1)
    bases = seeds[np.arange(need) % len(seeds)]
    picks = rng.integers(0, max(k_eff, 1), size=need)
    deltas = rng.random(need)
    if k_eff > 0:
        uniq = np.unique(seeds)
        table = _knn_table(X, uniq, minority, k_eff)
        lookup = {int(s): row for s, row in zip(uniq, table)}
        neighbors = np.array([lookup[int(b)][p] for b, p in zip(bases, picks)])
    else:
        neighbors = bases
    synth = X[bases] + deltas[:, None] * (X[neighbors] - X[bases])
    return ds.replace(
        features=np.vstack([X, synth]),
        labels=np.concatenate([ds.labels, np.full(need, minority_label)]),
        row_ids=np.concatenate([ds.row_ids, np.full(need, -1)]),
    )


# ---------------------------------------------------------------------------
# Borderline-SMOTE


def borderline_classify(ds: RawDataset, m: int = 5) -> dict[int, Borderline]:
    """Label each minority row SAFE, DANGER or NOISE from its m-neighborhood."""
    if m < 1 or m >= ds.n_rows:
        raise ResampleError(f"m={m} needs 1 <= m < {ds.n_rows} rows")
    _, min_label, _, minority = _classes(ds)
    table = _knn_table(ds.features, minority, np.arange(ds.n_rows), m)
    n_major = (ds.labels[table] != min_label).sum(axis=1)
    out = {}
    for row, mm in zip(minority, n_major):
        if mm == m:
            out[int(row)] = Borderline.NOISE
        elif 2 * mm >= m:
            out[int(row)] = Borderline.DANGER
        else:
            out[int(row)] = Borderline.SAFE
    return out


def borderline_smote(ds: RawDataset, m: int = 5, k: int = 5, seed: int = 0) -> tuple[RawDataset, SamplingReport]:
    """Borderline-SMOTE-1: oversample from DANGER rows up to exact balance.

    Synthetic rows interpolate a DANGER row toward one of its ``k`` nearest
    minority neighbors. Without any DANGER row the whole minority class seeds
    plain SMOTE and the report's ``fallback`` flag is set.
    """
    maj_label, min_label, majority, minority = _classes(ds)
    before = (len(majority), len(minority))
    need = len(majority) - len(minority)
    if need == 0:
        return ds, SamplingReport("borderline_smote", before, before, 0, 0)
    cats = borderline_classify(ds, m)
    danger = np.array(sorted(r for r, c in cats.items() if c is Borderline.DANGER), dtype=np.int64)
    fallback = len(danger) == 0
    seeds = minority if fallback else danger
    rng = np.random.default_rng(seed)
    out = _oversample(ds, seeds, minority, min_label, need, k, rng)
    after = (len(majority), len(minority) + need)
    return out, SamplingReport("borderline_smote", before, after, need, 0, fallback)


# ---------------------------------------------------------------------------
# Tomek links and SMOTE-Tomek


def tomek_links(ds: RawDataset) -> list[tuple[int, int]]:
    """Opposite-class pairs that are each other's single nearest neighbor."""
    if ds.is_single_class() or ds.n_rows < 2:
        return []
    nn = _knn_table(ds.features, np.arange(ds.n_rows), np.arange(ds.n_rows), 1)[:, 0]
    a = np.arange(ds.n_rows)
    mutual = (nn[nn] == a) & (a < nn) & (ds.labels != ds.labels[nn])
    return [(int(i), int(nn[i])) for i in np.flatnonzero(mutual)]


def smote_tomek(ds: RawDataset, k: int = 5, seed: int = 0) -> tuple[RawDataset, SamplingReport]:
    """Plain SMOTE to balance, then drop both rows of every Tomek link (one pass)."""
    maj_label, min_label, majority, minority = _classes(ds)
    before = (len(majority), len(minority))
    need = len(majority) - len(minority)
    rng = np.random.default_rng(seed)
    balanced = _oversample(ds, minority, minority, min_label, need, k, rng)
    links = tomek_links(balanced)
    if links:
        drop = np.array([i for pair in links for i in pair])
        keep = np.setdiff1d(np.arange(balanced.n_rows), drop)
        balanced = balanced.take(keep)
    n = len(majority) - len(links)
    return balanced, SamplingReport("smote_tomek", before, (n, n), need, len(links))


SAMPLERS = {
    "bs": "borderline_smote",
    "borderline_smote": "borderline_smote",
    "st": "smote_tomek",
    "smote_tomek": "smote_tomek",
    "none": "none",
}


def resample(ds: RawDataset, method: str, seed: int = 0, m: int = 5, k: int = 5) -> tuple[RawDataset, SamplingReport]:
    """Dispatch on a sampler name (``bs``/``st``/``none`` or long forms)."""
    try:
        name = SAMPLERS[method]
    except KeyError:
        raise ResampleError(f"unknown sampler {method!r}") from None
    if name == "borderline_smote":
        return borderline_smote(ds, m=m, k=k, seed=seed)
    if name == "smote_tomek":
        return smote_tomek(ds, k=k, seed=seed)
    neg, pos = ds.class_counts()
    counts = (max(neg, pos), min(neg, pos))
    return ds, SamplingReport("none", counts, counts, 0, 0)
