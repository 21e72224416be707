"""Binary-chromosome operators and Pareto machinery shared by the optimizers.

Both objectives are maximised: ``f1 = C_max - n_selected`` and ``f2 = AUC``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class ObjectiveVector(NamedTuple):
    f1_features: float  # C_max - number of selected features
    f2_auc: float  # AUC - C_min, C_min = 0


def transform_feature_count(n_selected: int, c_max: int) -> float:
    """Feature-count objective turned into a maximisation target."""
    return float(c_max - n_selected) if n_selected < c_max else 0.0


def transform_auc(auc: float, c_min: float = 0.0) -> float:
    return auc - c_min if auc > c_min else 0.0


def bits_key(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits)


@dataclass
class Individual:
    bits: np.ndarray
    objectives: ObjectiveVector | None = None
    rank: int = 0
    crowding: float = 0.0
    position: np.ndarray | None = None
    velocity: np.ndarray | None = None
    best_position: np.ndarray | None = None
    best_bits: np.ndarray | None = None
    best_objectives: ObjectiveVector | None = None

    @property
    def key(self) -> str:
        return bits_key(self.bits)

    @property
    def n_features(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class FrontMember:
    bits: tuple[int, ...]
    objectives: ObjectiveVector

    @property
    def bitstring(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def n_features(self) -> int:
        return sum(self.bits)

    @property
    def auc(self) -> float:
        return self.objectives.f2_auc


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated, duplicate-free feature subsets from one optimizer."""

    algorithm: str
    members: tuple[FrontMember, ...]
    n_features: int
    evaluations: int = 0
    history: tuple[tuple[str, float, float], ...] = field(default=(), repr=False)

    @classmethod
    def from_individuals(cls, algorithm: str, individuals: Iterable[Individual], n_features: int,
                         evaluations: int = 0, history=()) -> "ParetoFront":
        seen: dict[str, Individual] = {}
        for ind in individuals:
            seen.setdefault(ind.key, ind)
        pool = list(seen.values())
        objs = np.array([ind.objectives for ind in pool], dtype=float).reshape(len(pool), 2)
        front0 = fast_nondominated_sort(objs)[0] if pool else []
        chosen = sorted((pool[i] for i in front0), key=lambda ind: (ind.n_features, ind.key))
        members = tuple(FrontMember(tuple(int(b) for b in ind.bits), ind.objectives) for ind in chosen)
        return cls(algorithm, members, n_features, evaluations, tuple(history))

    def best(self) -> FrontMember:
        """Highest-AUC member; fewer features breaks ties."""
        return max(self.members, key=lambda m: (m.auc, -m.n_features, m.bitstring))


# ---------------------------------------------------------------------------
# dominance, sorting, crowding


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is at least as good everywhere and better somewhere (maximisation)."""
    better = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            better = True
    return better


def _objective_matrix(pop) -> np.ndarray:
    if isinstance(pop, np.ndarray):
        objs = pop.astype(float)
    else:
        objs = np.array([p.objectives if isinstance(p, Individual) else p for p in pop], dtype=float)
    if objs.size == 0:
        return np.empty((0, 2))
    return objs if objs.ndim == 2 else objs.reshape(len(objs), -1)


def dominance_matrix(objs: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row i dominates row j."""
    ge = (objs[:, None, :] >= objs[None, :, :]).all(-1)
    gt = (objs[:, None, :] > objs[None, :, :]).any(-1)
    return ge & gt


def fast_nondominated_sort(pop) -> list[list[int]]:
    """Deb's fast non-dominated sort; returns fronts as lists of indices."""
    objs = _objective_matrix(pop)
    n = len(objs)
    if n == 0:
        return []
    D = dominance_matrix(objs)
    dominated_by = D.sum(axis=0)
    fronts: list[list[int]] = []
    current = [i for i in range(n) if dominated_by[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in np.flatnonzero(D[i]):
                dominated_by[j] -= 1
                if dominated_by[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(front) -> np.ndarray:
    objs = _objective_matrix(front)
    n, m = objs.shape if objs.size else (0, 0)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(objs[:, k], kind="stable")
        lo, hi = objs[order[0], k], objs[order[-1], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = hi - lo
        if span == 0:
            continue
        gaps = (objs[order[2:], k] - objs[order[:-2], k]) / span
        dist[order[1:-1]] += gaps
    return dist


def assign_rank_and_crowding(pop: list[Individual]) -> list[list[int]]:
    fronts = fast_nondominated_sort(pop)
    for r, front in enumerate(fronts):
        cd = crowding_distance([pop[i] for i in front])
        for i, d in zip(front, cd):
            pop[i].rank = r
            pop[i].crowding = float(d)
    return fronts


def select_by_rank_and_crowding(pop: list[Individual], size: int) -> list[Individual]:
    """Elitist truncation: whole fronts first, then the least crowded of the split front."""
    fronts = assign_rank_and_crowding(pop)
    chosen: list[Individual] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(pop[i] for i in front)
            continue
        order = sorted(front, key=lambda i: -pop[i].crowding)
        chosen.extend(pop[i] for i in order[: size - len(chosen)])
        break
    return chosen


# ---------------------------------------------------------------------------
# variation operators


def single_point_crossover(p1, p2, rng: np.random.Generator, cut: int | None = None):
    p1 = np.asarray(p1, dtype=np.int8)
    p2 = np.asarray(p2, dtype=np.int8)
    if p1.shape != p2.shape or len(p1) < 2:
        raise ValueError("parents must share a length of at least 2")
    if cut is None:
        cut = int(rng.integers(1, len(p1)))
    c1 = np.concatenate([p1[:cut], p2[cut:]])
    c2 = np.concatenate([p2[:cut], p1[cut:]])
    return c1, c2


def sbx_beta(u: float, n: float) -> float:
    """Spread factor for a uniform draw ``u`` and distribution index ``n``."""
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    if n < 0:
        raise ValueError("distribution index must be non-negative")
    if u <= 0.5:
        return (2.0 * u) ** (1.0 / (n + 1.0))
    return (1.0 / (2.0 - 2.0 * u)) ** (1.0 / (n + 1.0))


def sbx_beta_cdf(beta, n: float):
    """CDF of the spread-factor density that ``sbx_beta`` samples from."""
    beta = np.asarray(beta, dtype=float)
    low = 0.5 * np.power(np.minimum(beta, 1.0), n + 1.0)
    high = 1.0 - 0.5 * np.power(np.maximum(beta, 1.0), -(n + 1.0))
    return np.where(beta <= 1.0, low, high)


def sbx_beta_pdf(beta, n: float):
    beta = np.asarray(beta, dtype=float)
    return np.where(beta <= 1.0, 0.5 * (n + 1.0) * beta ** n, 0.5 * (n + 1.0) / beta ** (n + 2.0))


def sbx_children(p1: float, p2: float, beta: float) -> tuple[float, float]:
    mid = 0.5 * (p1 + p2)
    half = 0.5 * beta * (p2 - p1)
    return mid - half, mid + half


def polynomial_mutation(x: float, eta: float, rng: np.random.Generator, lower: float = 0.0,
                        upper: float = 1.0) -> float:
    """Deb's polynomial mutation of one real gene (unused by the binary operators)."""
    u = rng.random()
    if u < 0.5:
        delta = (2.0 * u) ** (1.0 / (eta + 1.0)) - 1.0
    else:
        delta = 1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta + 1.0))
    return float(min(max(x + delta * (upper - lower), lower), upper))


def bitflip_mutate(c, pm: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``pm`` flip exactly one uniformly chosen gene."""
    c = np.array(c, dtype=np.int8, copy=True)
    if rng.random() < pm:
        j = int(rng.integers(len(c)))
        c[j] ^= 1
    return c


def repair_chromosome(c, rng: np.random.Generator) -> np.ndarray:
    """Guarantee at least one selected feature."""
    c = np.array(c, dtype=np.int8, copy=True)
    if not c.any():
        c[int(rng.integers(len(c)))] = 1
    return c


def random_chromosome(length: int, rng: np.random.Generator) -> np.ndarray:
    return repair_chromosome((rng.random(length) < 0.5).astype(np.int8), rng)


def binarize(position: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Threshold a continuous surrogate at 0.5, repairing an empty subset.

    A repaired gene has its position lifted to 0.5 so bits and position stay
    consistent.
    """
    bits = (position >= 0.5).astype(np.int8)
    if not bits.any():
        j = int(rng.integers(len(bits)))
        bits[j] = 1
        position = position.copy()
        position[j] = 0.5
    return bits, position


def decode_int(bits) -> int:
    """Read a chromosome as an unsigned binary integer (MSB first)."""
    return int(bits_key(bits), 2) if len(bits) else 0


def best_auc(individuals: Iterable[Individual]) -> float:
    return max((ind.objectives.f2_auc for ind in individuals), default=-math.inf)
