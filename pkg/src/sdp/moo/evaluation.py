"""Wrapper fitness: train the SVM on an internal split and score AUC."""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from ..classify import ClassifierError, RbfSvm, auc_from_scores
from ..data import RawDataset
from .core import ObjectiveVector, bits_key, transform_auc, transform_feature_count


def internal_split(labels: np.ndarray, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/validation split; each class sends round(fraction*n) rows to validation."""
    rng = np.random.Generator(np.random.PCG64(seed))
    train, valid = [], []
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        n_val = int(round(fraction * len(idx)))
        if len(idx) >= 2:
            n_val = min(max(n_val, 1), len(idx) - 1)
        else:
            n_val = 0
        valid.append(idx[:n_val])
        train.append(idx[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(valid))


@dataclass(frozen=True)
class EvalRecord:
    bitstring: str
    objectives: ObjectiveVector
    failed: bool


class EvalContext:
    """Fitness evaluator bound to one training set.

    The 80/20 split is fixed at construction, so fitness is a pure function
    of the chromosome and results are cached by bitstring. Use :meth:`fork`
    to give each optimizer its own cache and history.
    """

    def __init__(self, data: RawDataset, classifier: RbfSvm | None = None, seed: int = 0,
                 validation_fraction: float = 0.2, _split=None):
        self.data = data
        self.classifier = classifier or RbfSvm()
        self.seed = seed
        self.validation_fraction = validation_fraction
        if _split is None:
            _split = internal_split(data.labels, validation_fraction, seed)
        self.train_idx, self.valid_idx = _split
        self._Xt = data.features[self.train_idx]
        self._yt = data.labels[self.train_idx]
        self._Xv = data.features[self.valid_idx]
        self._yv = data.labels[self.valid_idx]
        self._cache: dict[str, ObjectiveVector] = {}
        self._auc_cache: dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.history: list[EvalRecord] = []
        self.failures = 0

    @property
    def n_features(self) -> int:
        return self.data.n_features

    def fork(self) -> "EvalContext":
        return EvalContext(self.data, self.classifier, self.seed, self.validation_fraction,
                           _split=(self.train_idx, self.valid_idx))

    def auc(self, multipliers) -> float:
        """Validation AUC for per-feature multipliers; 0.0 if the split is unusable."""
        w = np.asarray(multipliers, dtype=float)
        key = w.tobytes()
        with self._lock:
            if key in self._auc_cache:
                return self._auc_cache[key]
        try:
            model = self.classifier.fit(self._Xt, self._yt, w, seed=self.seed)
            value = auc_from_scores(self._yv, model.decision_scores(self._Xv))
        except ClassifierError:
            value = float("nan")
        with self._lock:
            self._auc_cache.setdefault(key, value)
        return value

    def evaluate(self, bits) -> ObjectiveVector:
        bits = np.asarray(bits, dtype=np.int8)
        if not bits.any():
            raise ValueError("cannot evaluate an empty feature subset")
        key = bits_key(bits)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        raw = self.auc(bits.astype(float))
        failed = not np.isfinite(raw)
        f1 = transform_feature_count(int(bits.sum()), self.n_features)
        obj = ObjectiveVector(f1, 0.0 if failed else transform_auc(raw))
        with self._lock:
            if key not in self._cache:
                self._cache[key] = obj
                self.history.append(EvalRecord(key, obj, failed))
                self.failures += int(failed)
            return self._cache[key]

    @property
    def evaluations(self) -> int:
        return len(self._cache)
