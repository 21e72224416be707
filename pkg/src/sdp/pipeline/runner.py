"""Outer cross-validation loop: normalize, resample, optimize, fuse, evaluate."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..classify import Metrics, evaluate_model
from ..data import RawDataset, fit_normalizer, load_dataset, normalize, stratified_kfold
from ..fusion import (
    FusedRanking,
    PrefixResult,
    greedy_forward_select,
    prefix_sweep,
    rank_fisher,
    rank_pearson,
    vote_fuse,
    weight_fuse,
)
from ..moo import OPTIMIZERS, EvalContext, ParetoFront
from ..resample import SamplingReport, resample
from ..stats import StatsError, friedman, nemenyi_cd, nemenyi_pairs, wilcoxon_signed_rank
from .config import OPTIMIZER_NAMES, ExperimentConfig
from .latch import CompletionLatch

log = logging.getLogger(__name__)

# Stream indices fed to derive_seed together with the master seed and fold.
STREAM_RESAMPLE = 1
STREAM_EVAL_SPLIT = 2
STREAM_CLASSIFIER = 3
STREAM_OPTIMIZER = 10  # + position of the algorithm in OPTIMIZER_NAMES


def derive_seed(master: int, fold: int, stream: int) -> int:
    """Mix (master, fold, stream) into a 32-bit seed via numpy's SeedSequence."""
    return int(np.random.SeedSequence([master, fold, stream]).generate_state(1)[0])


@dataclass
class MethodResult:
    method: str
    metrics: Metrics
    n_features: int
    features: tuple[int, ...]


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    test_row_ids: tuple[int, ...]
    sampling: SamplingReport | None = None
    fronts: dict[str, ParetoFront] = field(default_factory=dict)
    rankings: dict[str, FusedRanking] = field(default_factory=dict)
    prefixes: dict[str, PrefixResult] = field(default_factory=dict)
    methods: dict[str, MethodResult] = field(default_factory=dict)
    optimizer_errors: dict[str, str] = field(default_factory=dict)
    latch_initial: int = 0
    latch_completed: tuple[str, ...] = ()
    error: str | None = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    dataset: str
    n_rows: int
    n_features: int
    folds: list[FoldResult]
    aggregate: dict[str, dict[str, float]]
    stats: dict[str, dict]
    seeds: dict[str, int]
    version: str = __version__
    wall_clock: float = 0.0


def _fit_and_score(train: RawDataset, test: RawDataset, cfg: ExperimentConfig, multipliers, seed: int) -> Metrics:
    model = cfg.svm.fit(train.features, train.labels, multipliers, seed=seed)
    return evaluate_model(model, test.features, test.labels)


def run_optimizers(cfg: ExperimentConfig, ctx: EvalContext, fold: int, result: FoldResult) -> dict[str, ParetoFront]:
    """Launch every configured optimizer concurrently and block on the latch."""
    names = [n for n in OPTIMIZER_NAMES if n in cfg.optimizers]
    latch = CompletionLatch(len(names))
    result.latch_initial = latch.initial
    fronts: dict[str, ParetoFront] = {}

    def task(name: str) -> None:
        error = None
        try:
            run, _ = OPTIMIZERS[name]
            seed = derive_seed(cfg.seed, fold, STREAM_OPTIMIZER + OPTIMIZER_NAMES.index(name))
            fronts[name] = run(ctx.fork(), getattr(cfg, name), seed=seed)
        except Exception as exc:  # recorded, never swallowed silently
            log.exception("optimizer %s failed on fold %d", name, fold)
            error = exc
        finally:
            latch.count_down(name, error)

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for name in names:
            pool.submit(task, name)
        latch.wait()
    result.latch_completed = tuple(latch.completed)
    result.optimizer_errors = {k: f"{type(v).__name__}: {v}" for k, v in latch.errors.items()}
    return {n: fronts[n] for n in names if n in fronts}


def run_fold(cfg: ExperimentConfig, ds: RawDataset, fold: int, train_idx, test_idx) -> FoldResult:
    train, test = ds.take(train_idx), ds.take(test_idx)
    result = FoldResult(fold, len(train_idx), len(test_idx), tuple(int(i) for i in test.row_ids))
    if cfg.normalize_scope == "fold":
        params = fit_normalizer(train)
        train, test = normalize(train, params), normalize(test, params)
    train, result.sampling = resample(train, cfg.sampler, seed=derive_seed(cfg.seed, fold, STREAM_RESAMPLE),
                                      m=cfg.smote_m, k=cfg.smote_k)
    ctx = EvalContext(train, cfg.svm, seed=derive_seed(cfg.seed, fold, STREAM_EVAL_SPLIT),
                      validation_fraction=cfg.validation_fraction)
    fit_seed = derive_seed(cfg.seed, fold, STREAM_CLASSIFIER)

    fronts = run_optimizers(cfg, ctx, fold, result) if cfg.optimizers else {}
    result.fronts = fronts
    for name, front in fronts.items():
        best = front.best()
        mult = np.array(best.bits, dtype=float)
        metrics = _fit_and_score(train, test, cfg, mult, fit_seed)
        result.methods[name] = MethodResult(name, metrics, best.n_features,
                                            tuple(int(j) for j in np.flatnonzero(mult)))

    fusers = {"vote": vote_fuse, "weight": weight_fuse}
    if fronts:
        for mode in cfg.fusion:
            ranking = fusers[mode](list(fronts.values()))
            result.rankings[mode] = ranking
            result.prefixes[mode] = prefix = prefix_sweep(ranking, ctx)
            metrics = _fit_and_score(train, test, cfg, prefix.multipliers, fit_seed)
            result.methods[mode] = MethodResult(mode, metrics, prefix.length, prefix.features)

    rankers = {"pearson": lambda: rank_pearson(train), "fisher": lambda: rank_fisher(train),
               "greedy": lambda: greedy_forward_select(ctx.fork())}
    for name in cfg.baselines:
        prefix = prefix_sweep(rankers[name](), ctx)
        result.prefixes[name] = prefix
        metrics = _fit_and_score(train, test, cfg, prefix.multipliers, fit_seed)
        result.methods[name] = MethodResult(name, metrics, prefix.length, prefix.features)
    if not result.methods and cfg.optimizers:
        raise RuntimeError("every optimizer failed: " + "; ".join(result.optimizer_errors.values()))
    return result


def _aggregate(folds: list[FoldResult]) -> dict[str, dict[str, float]]:
    per: dict[str, dict[str, list[float]]] = {}
    for f in folds:
        for name, m in f.methods.items():
            slot = per.setdefault(name, {"acc": [], "f_score": [], "auc": [], "n_features": []})
            slot["acc"].append(m.metrics.acc)
            slot["f_score"].append(m.metrics.f_score)
            if m.metrics.auc is not None:
                slot["auc"].append(m.metrics.auc)
            slot["n_features"].append(float(m.n_features))
    return {
        name: {**{k: float(np.mean(v)) if v else float("nan") for k, v in slot.items()},
               "n_folds": float(len(slot["acc"]))}
        for name, slot in per.items()
    }


def _fold_stats(cfg: ExperimentConfig, folds: list[FoldResult]) -> dict[str, dict]:
    out: dict[str, dict] = {}
    ok = [f for f in folds if f.error is None]

    def auc_rows(names):
        rows = []
        for f in ok:
            vals = [f.methods[n].metrics.auc if n in f.methods else None for n in names]
            if all(v is not None for v in vals):
                rows.append(vals)
        return rows

    opt = [n for n in OPTIMIZER_NAMES if n in cfg.optimizers]
    if len(opt) >= 2:
        rows = auc_rows(opt)
        try:
            res = friedman(rows)
            entry = {"test": "friedman", "methods": opt, "statistic": res.statistic, "p_value": res.p_value,
                     "significant": res.significant, "mean_ranks": list(res.mean_ranks),
                     "n_datasets": res.n_datasets}
            if 2 <= len(opt) <= 10:
                cd = nemenyi_cd(len(opt), res.n_datasets)
                entry["cd"] = cd
                entry["pairs"] = [list(p) for p in nemenyi_pairs(opt, res.mean_ranks, cd)]
            out["optimizers"] = entry
        except StatsError as exc:
            out["optimizers"] = {"test": "friedman", "methods": opt, "error": str(exc)}
    if "vote" in cfg.fusion and "weight" in cfg.fusion:
        rows = auc_rows(["vote", "weight"])
        try:
            res = wilcoxon_signed_rank(rows)
            out["fusion"] = {"test": "wilcoxon", "methods": ["vote", "weight"], "statistic": res.statistic,
                             "p_value": res.p_value, "significant": res.significant, "n": res.n}
        except StatsError as exc:
            out["fusion"] = {"test": "wilcoxon", "methods": ["vote", "weight"], "error": str(exc)}
    return out


def run_experiment(cfg: ExperimentConfig, dataset: RawDataset | None = None) -> ExperimentReport:
    """Run the full pipeline and, when ``cfg.out_dir`` is set, write every artifact."""
    started = time.perf_counter()
    ds = dataset if dataset is not None else load_dataset(
        cfg.dataset, cfg.format, cfg.label_column, drop_columns=cfg.drop_columns)
    if cfg.normalize_scope == "global":
        ds = normalize(ds, fit_normalizer(ds))
    plan = stratified_kfold(ds, cfg.k_folds, cfg.seed)
    folds: list[FoldResult] = []
    for i, (train_idx, test_idx) in enumerate(plan.folds):
        try:
            folds.append(run_fold(cfg, ds, i, train_idx, test_idx))
        except Exception as exc:
            log.exception("fold %d failed", i)
            failed = FoldResult(i, len(train_idx), len(test_idx), tuple(int(r) for r in test_idx))
            failed.error = f"{type(exc).__name__}: {exc}"
            folds.append(failed)
    seeds = {"master": cfg.seed}
    for i in range(cfg.k_folds):
        for name in cfg.optimizers:
            seeds[f"fold{i}.{name}"] = derive_seed(cfg.seed, i, STREAM_OPTIMIZER + OPTIMIZER_NAMES.index(name))
    report = ExperimentReport(
        config=cfg,
        dataset=ds.name,
        n_rows=ds.n_rows,
        n_features=ds.n_features,
        folds=folds,
        aggregate=_aggregate(folds),
        stats=_fold_stats(cfg, folds),
        seeds=seeds,
    )
    report.wall_clock = time.perf_counter() - started
    if cfg.out_dir:
        from .report import write_report

        write_report(report, cfg.out_dir)
    return report
