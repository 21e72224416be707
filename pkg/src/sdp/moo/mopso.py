from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Individual, ParetoFront, binarize, dominates
from .evaluation import EvalContext


@dataclass(frozen=True)
class MOPSOParams:
    n_pop: int = 100
    n_iter: int = 100
    n_archive: int = 100
    c1: float = 1.49
    c2: float = 2.0
    v_max: float = 1.0
    v_min: float = -1.0
    n_grid: int = 50  # divisions per objective
    w: float = 0.729
    grid_inflation: float = 0.1


class Archive:
    """External archive of non-dominated particles with an adaptive grid."""

    def __init__(self, capacity: int, n_grid: int, inflation: float):
        self.capacity = capacity
        self.n_grid = n_grid
        self.inflation = inflation
        self.members: list[Individual] = []

    def offer(self, cand: Individual) -> bool:
        if any(m.key == cand.key for m in self.members):
            return False
        if any(dominates(m.objectives, cand.objectives) for m in self.members):
            return False
        self.members = [m for m in self.members if not dominates(cand.objectives, m.objectives)]
        self.members.append(Individual(bits=cand.bits.copy(), objectives=cand.objectives,
                                       position=cand.position.copy()))
        return True

    def cells(self) -> list[tuple[int, ...]]:
        objs = np.array([m.objectives for m in self.members], dtype=float)
        lo, hi = objs.min(0), objs.max(0)
        span = hi - lo
        lo = lo - self.inflation * span
        hi = hi + self.inflation * span
        width = np.where(hi > lo, hi - lo, 1.0)
        idx = np.floor((objs - lo) / width * self.n_grid).astype(int)
        idx = np.clip(idx, 0, self.n_grid - 1)
        return [tuple(r) for r in idx]

    def _groups(self) -> dict[tuple[int, ...], list[int]]:
        groups: dict[tuple[int, ...], list[int]] = {}
        for i, c in enumerate(self.cells()):
            groups.setdefault(c, []).append(i)
        return groups

    def truncate(self, rng: np.random.Generator) -> None:
        while len(self.members) > self.capacity:
            groups = self._groups()
            densest = max(sorted(groups), key=lambda c: len(groups[c]))
            victim = groups[densest][int(rng.integers(len(groups[densest])))]
            del self.members[victim]

    def leader(self, rng: np.random.Generator) -> Individual:
        """Roulette over occupied cells weighted by inverse occupancy."""
        groups = self._groups()
        keys = sorted(groups)
        weights = np.array([1.0 / len(groups[c]) for c in keys])
        cell = keys[int(rng.choice(len(keys), p=weights / weights.sum()))]
        members = groups[cell]
        return self.members[members[int(rng.integers(len(members)))]]


def run_mopso(ctx: EvalContext, params: MOPSOParams | None = None, seed: int = 0,
              callback: Callable[[int, dict], None] | None = None) -> ParetoFront:
    """Grid-archive MOPSO on continuous surrogates in [0, 1]^L, binarized at 0.5."""
    p = params or MOPSOParams()
    rng = np.random.default_rng(seed)
    L = ctx.n_features
    archive = Archive(p.n_archive, p.n_grid, p.grid_inflation)

    swarm: list[Individual] = []
    for _ in range(p.n_pop):
        bits, pos = binarize(rng.random(L), rng)
        ind = Individual(bits=bits, objectives=ctx.evaluate(bits), position=pos, velocity=np.zeros(L))
        ind.best_position, ind.best_bits, ind.best_objectives = pos.copy(), bits.copy(), ind.objectives
        swarm.append(ind)
    for ind in swarm:
        archive.offer(ind)
    archive.truncate(rng)
    if callback:
        callback(0, {"swarm": swarm, "archive": archive.members})

    for it in range(1, p.n_iter + 1):
        for ind in swarm:
            leader = archive.leader(rng)
            r1, r2 = rng.random(L), rng.random(L)
            v = (p.w * ind.velocity + p.c1 * r1 * (ind.best_position - ind.position)
                 + p.c2 * r2 * (leader.position - ind.position))
            ind.velocity = np.clip(v, p.v_min, p.v_max)
            ind.bits, ind.position = binarize(np.clip(ind.position + ind.velocity, 0.0, 1.0), rng)
            ind.objectives = ctx.evaluate(ind.bits)
            if dominates(ind.objectives, ind.best_objectives) or (
                not dominates(ind.best_objectives, ind.objectives) and rng.random() < 0.5
            ):
                ind.best_position, ind.best_bits = ind.position.copy(), ind.bits.copy()
                ind.best_objectives = ind.objectives
        for ind in swarm:
            archive.offer(ind)
        archive.truncate(rng)
        if callback:
            callback(it, {"swarm": swarm, "archive": archive.members})
    history = tuple((r.bitstring, r.objectives.f1_features, r.objectives.f2_auc) for r in ctx.history)
    return ParetoFront.from_individuals("mopso", archive.members, L, ctx.evaluations, history)
