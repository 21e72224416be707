"""Multi-objective wrapper feature selection over binary chromosomes."""

from .core import (
    FrontMember,
    Individual,
    ObjectiveVector,
    ParetoFront,
    bitflip_mutate,
    crowding_distance,
    dominates,
    fast_nondominated_sort,
    polynomial_mutation,
    repair_chromosome,
    sbx_beta,
    sbx_beta_cdf,
    sbx_children,
    single_point_crossover,
)
from .evaluation import EvalContext
from .mode import MODEParams, run_mode
from .mopso import MOPSOParams, run_mopso
from .nsga2 import NSGA2Params, run_nsga2

OPTIMIZERS = {
    "nsga2": (run_nsga2, NSGA2Params),
    "mopso": (run_mopso, MOPSOParams),
    "mode": (run_mode, MODEParams),
}

__all__ = [
    "EvalContext",
    "FrontMember",
    "Individual",
    "MODEParams",
    "MOPSOParams",
    "NSGA2Params",
    "OPTIMIZERS",
    "ObjectiveVector",
    "ParetoFront",
    "bitflip_mutate",
    "crowding_distance",
    "dominates",
    "fast_nondominated_sort",
    "polynomial_mutation",
    "repair_chromosome",
    "run_mode",
    "run_mopso",
    "run_nsga2",
    "sbx_beta",
    "sbx_beta_cdf",
    "sbx_children",
    "single_point_crossover",
]
