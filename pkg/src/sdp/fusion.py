"""Vote/weight fusion of Pareto fronts, baseline rankers and prefix selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import RawDataset
from .moo.core import ParetoFront
from .moo.evaluation import EvalContext


class FusionError(ValueError):
    pass


@dataclass(frozen=True)
class RankEntry:
    feature: int
    votes: int
    weight: float


@dataclass(frozen=True)
class FusedRanking:
    entries: tuple[RankEntry, ...]
    n_features: int
    mode: str = "vote"  # "weight" rankings carry their weights into evaluation

    @property
    def features(self) -> list[int]:
        return [e.feature for e in self.entries]

    def multipliers(self, length: int) -> np.ndarray:
        w = np.zeros(self.n_features)
        for e in self.entries[:length]:
            w[e.feature] = e.weight if self.mode == "weight" else 1.0
        return w


def _chromosomes(fronts: Sequence[ParetoFront]) -> tuple[np.ndarray, int]:
    if not fronts:
        raise FusionError("no fronts to fuse")
    widths = {f.n_features for f in fronts}
    if len(widths) != 1:
        raise FusionError("fronts cover different feature counts")
    rows = [m.bits for f in fronts for m in f.members]
    if not rows:
        raise FusionError("all fronts are empty")
    return np.array(rows, dtype=np.int64), widths.pop()


def vote_fuse(fronts: Sequence[ParetoFront], mode: str = "vote") -> FusedRanking:
    """Rank features by how many front members select them.

    Zero-vote features are dropped; ties go to the lower feature index.
    """
    bits, L = _chromosomes(fronts)
    votes = bits.sum(axis=0)
    top = votes.max()
    order = sorted((j for j in range(L) if votes[j] > 0), key=lambda j: (-votes[j], j))
    entries = tuple(RankEntry(j, int(votes[j]), float(votes[j] / top)) for j in order)
    return FusedRanking(entries, L, mode)


def weight_fuse(fronts: Sequence[ParetoFront]) -> FusedRanking:
    """Same ranking as :func:`vote_fuse`; evaluation scales column j by votes_j / max votes."""
    return vote_fuse(fronts, mode="weight")


def _order_by_score(scores: np.ndarray) -> list[int]:
    return sorted(range(len(scores)), key=lambda j: (-scores[j], j))


def pearson_scores(ds: RawDataset) -> np.ndarray:
    X, y = ds.features, ds.labels.astype(float)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    num = xc.T @ yc
    den = np.sqrt((xc * xc).sum(axis=0) * (yc @ yc))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return r


def rank_pearson(ds: RawDataset) -> list[int]:
    return _order_by_score(np.abs(pearson_scores(ds)))


def fisher_scores(ds: RawDataset) -> np.ndarray:
    if ds.is_single_class():
        raise FusionError("Fisher criterion needs both classes")
    pos = ds.features[ds.labels == 1]
    neg = ds.features[ds.labels == 0]
    num = (pos.mean(axis=0) - neg.mean(axis=0)) ** 2
    den = pos.var(axis=0) + neg.var(axis=0)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def rank_fisher(ds: RawDataset) -> list[int]:
    return _order_by_score(fisher_scores(ds))


def greedy_forward_select(ctx: EvalContext) -> list[int]:
    """Full greedy forward order by internal-split AUC (ties to the lower index)."""
    L = ctx.n_features
    chosen: list[int] = []
    remaining = list(range(L))
    while remaining:
        best_j, best_auc = None, -np.inf
        for j in remaining:
            mask = np.zeros(L)
            mask[chosen + [j]] = 1.0
            auc = ctx.auc(mask)
            auc = 0.0 if not np.isfinite(auc) else auc
            if auc > best_auc:
                best_j, best_auc = j, auc
        chosen.append(best_j)
        remaining.remove(best_j)
    return chosen


@dataclass(frozen=True)
class PrefixResult:
    length: int
    features: tuple[int, ...]
    multipliers: np.ndarray
    auc: float
    curve: tuple[tuple[int, float], ...]


def _best_prefix(curve: Sequence[float]) -> int:
    """1-based length of the highest value; the shortest wins ties."""
    best = 0
    for i, v in enumerate(curve):
        if v > curve[best]:
            best = i
    return best + 1


def prefix_sweep(ranking: FusedRanking | Sequence[int], ctx: EvalContext) -> PrefixResult:
    if isinstance(ranking, FusedRanking):
        fused = ranking
    else:
        order = list(ranking)
        fused = FusedRanking(tuple(RankEntry(j, 1, 1.0) for j in order), ctx.n_features, "vote")
    if not fused.entries:
        raise FusionError("empty ranking")
    curve = []
    for length in range(1, len(fused.entries) + 1):
        auc = ctx.auc(fused.multipliers(length))
        curve.append(auc if np.isfinite(auc) else 0.0)
    best = _best_prefix(curve)
    return PrefixResult(
        best,
        tuple(fused.features[:best]),
        fused.multipliers(best),
        curve[best - 1],
        tuple((i + 1, v) for i, v in enumerate(curve)),
    )
