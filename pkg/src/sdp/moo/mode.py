from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Individual, ParetoFront, binarize, dominates, select_by_rank_and_crowding
from .evaluation import EvalContext


@dataclass(frozen=True)
class MODEParams:
    n_pop: int = 100
    n_iter: int = 100
    pc: float = 0.5
    f: float = 0.5


def pick_donors(n: int, target: int, rng: np.random.Generator) -> tuple[int, int, int]:
    """Three distinct indices, all different from ``target``."""
    choices = rng.choice(n - 1, size=3, replace=False)
    r1, r2, r3 = (int(c) + (c >= target) for c in choices)
    return r1, r2, r3


def run_mode(ctx: EvalContext, params: MODEParams | None = None, seed: int = 0,
             callback: Callable[[int, dict], None] | None = None) -> ParetoFront:
    """DE/rand/1/bin with Pareto replacement on [0, 1]^L surrogates.

    A trial replaces its target when it dominates it; when neither
    dominates, both enter the next pool, which is trimmed back to ``n_pop``
    by non-dominated sorting and crowding distance.
    """
    p = params or MODEParams()
    if p.n_pop < 4:
        raise ValueError("DE/rand/1 needs a population of at least 4")
    rng = np.random.default_rng(seed)
    L = ctx.n_features

    pop: list[Individual] = []
    for _ in range(p.n_pop):
        bits, pos = binarize(rng.random(L), rng)
        pop.append(Individual(bits=bits, objectives=ctx.evaluate(bits), position=pos))
    if callback:
        callback(0, {"population": pop, "trials": []})

    for gen in range(1, p.n_iter + 1):
        pool: list[Individual] = []
        trials = []
        for i, target in enumerate(pop):
            r1, r2, r3 = pick_donors(len(pop), i, rng)
            donor = np.clip(pop[r1].position + p.f * (pop[r2].position - pop[r3].position), 0.0, 1.0)
            mask = rng.random(L) < p.pc
            mask[int(rng.integers(L))] = True
            trial_pos = np.where(mask, donor, target.position)
            bits, trial_pos = binarize(trial_pos, rng)
            trial = Individual(bits=bits, objectives=ctx.evaluate(bits), position=trial_pos)
            trials.append((i, (r1, r2, r3), trial_pos))
            if dominates(trial.objectives, target.objectives):
                pool.append(trial)
            elif dominates(target.objectives, trial.objectives):
                pool.append(target)
            else:
                pool.extend([target, trial])
        pop = select_by_rank_and_crowding(pool, p.n_pop) if len(pool) > p.n_pop else pool
        if callback:
            callback(gen, {"population": pop, "trials": trials})
    history = tuple((r.bitstring, r.objectives.f1_features, r.objectives.f2_auc) for r in ctx.history)
    return ParetoFront.from_individuals("mode", pop, L, ctx.evaluations, history)
