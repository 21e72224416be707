"""RBF-kernel SVM evaluator and the ACC / F-score / AUC metrics.

Two solvers share one model type. ``libsvm`` (the default) delegates the SMO
optimisation to scikit-learn's bundled libsvm; ``smo`` is a self-contained
numpy SMO with second-order working-set selection, used as an independent
cross-check and for environments without scikit-learn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy.stats import rankdata


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # already masked and weighted
    dual_coef: np.ndarray  # alpha_i * y_i, y in {-1, +1}
    intercept: float
    gamma: float
    C: float
    active: np.ndarray  # column indices kept from the input
    multipliers: np.ndarray  # per active column
    n_input_features: int

    def transform(self, samples) -> np.ndarray:
        X = np.asarray(samples, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_input_features:
            raise ClassifierError(f"expected {self.n_input_features} features, got {X.shape[1]}")
        return X[:, self.active] * self.multipliers

    def decision_scores(self, samples) -> np.ndarray:
        return decision_scores(self, samples)

    def predict(self, samples) -> np.ndarray:
        return (self.decision_scores(samples) > 0).astype(np.int64)


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def decision_scores(model: SvmModel, samples) -> np.ndarray:
    """Signed decision values; label 1 (defective) iff the score is positive."""
    Z = model.transform(samples)
    if len(model.dual_coef) == 0:
        return np.full(len(Z), model.intercept)
    return rbf_kernel(Z, model.support_vectors, model.gamma) @ model.dual_coef + model.intercept


def _prepare(X, y, multipliers):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ClassifierError("X must be 2-D with one label per row")
    if not np.all(np.isfinite(X)):
        raise ClassifierError("non-finite training inputs")
    if len(np.unique(y)) < 2:
        raise ClassifierError("training data holds a single class")
    w = np.ones(X.shape[1]) if multipliers is None else np.asarray(multipliers, dtype=float)
    if w.shape != (X.shape[1],):
        raise ClassifierError("one multiplier per feature required")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ClassifierError("multipliers must be finite and non-negative")
    active = np.flatnonzero(w > 0)
    if len(active) == 0:
        raise ClassifierError("feature mask selects no features")
    return X, y, active, w[active]


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve the soft-margin dual with WSS2 (Fan, Chen & Lin 2005).

    Returns ``(alpha, b)`` with ``y`` in {-1, +1}.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    Q = K * np.outer(y, y)
    diag = np.diag(Q).copy()
    for _ in range(max_iter):
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yg[up])])
        m_up = yg[i]
        m_low = yg[low].min()
        if m_up - m_low < tol:
            break
        cand = low & (yg < m_up)
        b_ij = m_up - yg[cand]
        a_ij = diag[i] + diag[cand] - 2.0 * y[i] * y[cand] * Q[i, cand]
        a_ij = np.where(a_ij > 0, a_ij, 1e-12)
        j = int(np.flatnonzero(cand)[np.argmax(b_ij * b_ij / a_ij)])

        # two-variable update along y_i a_i + y_j a_j = const
        quad = diag[i] + diag[j] - 2.0 * y[i] * y[j] * Q[i, j]
        quad = quad if quad > 0 else 1e-12
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)

    yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = yg[free].mean()
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = yg[up].max() if up.any() else 0.0
        lo = yg[low].min() if low.any() else 0.0
        b = 0.5 * (hi + lo)
    return alpha, float(b)


def train_svm_rbf(
    X,
    y,
    multipliers: Sequence[float] | None = None,
    C: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    seed: int = 0,
    solver: str = "libsvm",
    max_iter: int = 100_000,
) -> SvmModel:
    """Fit a soft-margin RBF SVM.

    ``multipliers`` scale the feature columns before the kernel: 0 drops a
    column, 1 keeps it, fractions weight it. ``gamma=None`` means
    1 / (number of active columns).
    """
    if C <= 0 or tol <= 0 or (gamma is not None and gamma <= 0):
        raise ClassifierError("C, gamma and tol must be positive")
    X, y, active, w = _prepare(X, y, multipliers)
    Z = X[:, active] * w
    g = 1.0 / len(active) if gamma is None else float(gamma)
    ys = np.where(y == 1, 1.0, -1.0)
    if solver == "libsvm":
        from sklearn.svm import SVC

        clf = SVC(C=C, kernel="rbf", gamma=g, tol=tol, max_iter=max_iter, random_state=seed)
        clf.fit(Z, y)
        sv = Z[clf.support_]
        coef = clf.dual_coef_[0].astype(float)
        b = float(clf.intercept_[0])
        # sklearn orders classes [0, 1]; positive decision means class 1
    elif solver == "smo":
        alpha, b = _smo(rbf_kernel(Z, Z, g), ys, C, tol, max_iter)
        keep = alpha > 1e-12
        sv, coef = Z[keep], (alpha * ys)[keep]
    else:
        raise ClassifierError(f"unknown solver {solver!r}")
    return SvmModel(sv, coef, b, g, C, active, w, X.shape[1])


class Classifier(Protocol):
    def fit(self, X, y, multipliers=None, seed: int = 0): ...


@dataclass(frozen=True)
class RbfSvm:
    """Hyperparameters shared by every training call (fixed across datasets)."""

    C: float = 1.0
    gamma: float | None = None
    tol: float = 1e-3
    solver: str = "libsvm"
    max_iter: int = 100_000

    def fit(self, X, y, multipliers=None, seed: int = 0) -> SvmModel:
        return train_svm_rbf(X, y, multipliers, C=self.C, gamma=self.gamma, tol=self.tol,
                             seed=seed, solver=self.solver, max_iter=self.max_iter)


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    acc: float
    f_score: float
    auc: float | None
    auc_error: str | None = None


def auc_from_scores(labels, scores) -> float:
    """ROC AUC as the Mann-Whitney statistic: ties between classes count half."""
    labels = np.asarray(labels).astype(np.int64)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ClassifierError("labels and scores differ in length")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ClassifierError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def compute_metrics(labels, predictions, scores) -> Metrics:
    labels = np.asarray(labels).astype(np.int64)
    predictions = np.asarray(predictions).astype(np.int64)
    if labels.shape != predictions.shape or len(labels) != len(scores):
        raise ClassifierError("labels, predictions and scores differ in length")
    tp = int(((labels == 1) & (predictions == 1)).sum())
    fp = int(((labels == 0) & (predictions == 1)).sum())
    fn = int(((labels == 1) & (predictions == 0)).sum())
    tn = int(((labels == 0) & (predictions == 0)).sum())
    acc = (tp + tn) / len(labels) if len(labels) else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    try:
        auc, err = auc_from_scores(labels, scores), None
    except ClassifierError as exc:
        auc, err = None, str(exc)
    return Metrics(tp, fp, fn, tn, acc, f, auc, err)


def evaluate_model(model: SvmModel, X, y) -> Metrics:
    scores = model.decision_scores(X)
    return compute_metrics(y, (scores > 0).astype(np.int64), scores)
