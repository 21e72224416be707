from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    Individual,
    ParetoFront,
    assign_rank_and_crowding,
    bitflip_mutate,
    random_chromosome,
    repair_chromosome,
    select_by_rank_and_crowding,
    single_point_crossover,
)
from .evaluation import EvalContext


@dataclass(frozen=True)
class NSGA2Params:
    n_pop: int = 100
    n_iter: int = 100
    pc: float = 0.6
    pm: float = 0.1
    eta_c: float = 1.0  # kept for the SBX utility; the binary operator ignores it
    eta_m: float = 1.0


def _tournament(pop: list[Individual], rng: np.random.Generator) -> Individual:
    a, b = pop[int(rng.integers(len(pop)))], pop[int(rng.integers(len(pop)))]
    if (a.rank, -a.crowding) <= (b.rank, -b.crowding):
        return a
    return b


def _unique_first(pop: list[Individual]) -> list[Individual]:
    """Distinct chromosomes first (in order), duplicates after."""
    seen, uniq, dups = set(), [], []
    for ind in pop:
        (dups if ind.key in seen else uniq).append(ind)
        seen.add(ind.key)
    return uniq + dups


def run_nsga2(ctx: EvalContext, params: NSGA2Params | None = None, seed: int = 0,
              callback: Callable[[int, dict], None] | None = None) -> ParetoFront:
    """Generational NSGA-II over binary feature masks.

    Binary tournament on (rank, crowding), single-point crossover with
    probability ``pc``, one-gene mutation with probability ``pm`` per child,
    and mu+lambda survival by fronts and crowding distance.
    """
    p = params or NSGA2Params()
    rng = np.random.default_rng(seed)
    L = ctx.n_features

    def make(bits):
        return Individual(bits=bits, objectives=ctx.evaluate(bits))

    pop = [make(random_chromosome(L, rng)) for _ in range(p.n_pop)]
    assign_rank_and_crowding(pop)
    if callback:
        callback(0, {"population": pop})
    for gen in range(1, p.n_iter + 1):
        children: list[np.ndarray] = []
        while len(children) < p.n_pop:
            a, b = _tournament(pop, rng), _tournament(pop, rng)
            if L >= 2 and rng.random() < p.pc:
                c1, c2 = single_point_crossover(a.bits, b.bits, rng)
            else:
                c1, c2 = a.bits.copy(), b.bits.copy()
            for c in (c1, c2):
                children.append(repair_chromosome(bitflip_mutate(c, p.pm, rng), rng))
        offspring = [make(c) for c in children[: p.n_pop]]
        pop = select_by_rank_and_crowding(_unique_first(pop + offspring), p.n_pop)
        assign_rank_and_crowding(pop)
        if callback:
            callback(gen, {"population": pop})
    history = tuple((r.bitstring, r.objectives.f1_features, r.objectives.f2_auc) for r in ctx.history)
    return ParetoFront.from_individuals("nsga2", pop, L, ctx.evaluations, history)
