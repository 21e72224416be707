"""``sdp`` command line: resample, optimize, fuse, stats, run."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import RawDataset, fit_normalizer, load_dataset, normalize, save_csv
from .fusion import prefix_sweep, vote_fuse, weight_fuse
from .moo import OPTIMIZERS, EvalContext, ParetoFront
from .moo.core import FrontMember, ObjectiveVector
from .pipeline.config import OPTIMIZER_NAMES, PROFILES, ExperimentConfig, default_workers, load_config
from .pipeline.report import write_curve_csv, write_csv, write_pareto_csv, write_ranking_csv
from .pipeline.runner import (
    STREAM_EVAL_SPLIT,
    STREAM_RESAMPLE,
    FoldResult,
    derive_seed,
    run_experiment,
    run_optimizers,
)
from .resample import resample
from .stats import friedman, nemenyi_cd, nemenyi_pairs, wilcoxon_signed_rank

SAMPLER_CHOICES = ("bs", "st", "none")


def _add_dataset_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--dataset", required=required, help="CSV or ARFF file")
    p.add_argument("--format", choices=("csv", "arff"), help="default: file extension")
    p.add_argument("--label-column", help="default: last column")
    p.add_argument("--drop-columns", default="", help="comma-separated non-feature columns to skip")


def _load(args) -> RawDataset:
    drop = [c for c in args.drop_columns.split(",") if c.strip()]
    return load_dataset(args.dataset, args.format, args.label_column, drop_columns=drop)


def _prepare(ds: RawDataset, sampler: str, seed: int, cfg: ExperimentConfig):
    """Normalize the whole file, resample it and bind an evaluation context."""
    ds = normalize(ds, fit_normalizer(ds))
    train, report = resample(ds, sampler, seed=derive_seed(seed, 0, STREAM_RESAMPLE), m=cfg.smote_m, k=cfg.smote_k)
    ctx = EvalContext(train, cfg.svm, seed=derive_seed(seed, 0, STREAM_EVAL_SPLIT),
                      validation_fraction=cfg.validation_fraction)
    return train, report, ctx


def cmd_resample(args) -> int:
    ds = _load(args)
    if not args.no_normalize:
        ds = normalize(ds, fit_normalizer(ds))
    out, report = resample(ds, args.method, seed=args.seed, m=args.m, k=args.k)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_csv(out, path)
    Path(str(path) + ".report.json").write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    print(f"{report.method}: {report.before[0]}/{report.before[1]} -> {report.after[0]}/{report.after[1]} "
          f"(synthetic {report.synthetic_created}, tomek pairs removed {report.tomek_pairs_removed})")
    return 0


def _optimizer_config(args) -> ExperimentConfig:
    algos = OPTIMIZER_NAMES if args.algo == "all" else (args.algo,)
    values = {"optimizers": algos, "fusion": (), "seed": args.seed, "workers": args.workers}
    if args.profile:
        values["profile"] = args.profile
    for name in algos:
        if args.pop is not None:
            values[f"{name}.n_pop"] = args.pop
        if args.iters is not None:
            values[f"{name}.n_iter"] = args.iters
    return ExperimentConfig.from_mapping(values)


def cmd_optimize(args) -> int:
    cfg = _optimizer_config(args)
    ds = _load(args)
    _, report, ctx = _prepare(ds, args.sampler, args.seed, cfg)
    holder = FoldResult(0, ds.n_rows, 0, ())
    fronts = run_optimizers(cfg, ctx, 0, holder)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, front in fronts.items():
        write_pareto_csv(front, out / f"pareto_{name}.csv")
        print(f"{name}: {len(front.members)} non-dominated subsets, {front.evaluations} evaluations")
    meta = {
        "dataset": str(Path(args.dataset).resolve()),
        "format": args.format,
        "label_column": args.label_column,
        "drop_columns": args.drop_columns,
        "sampler": args.sampler,
        "seed": args.seed,
        "n_features": ds.n_features,
        "feature_names": list(ds.feature_names),
        "sampling": report.as_dict(),
        "algorithms": sorted(fronts),
    }
    (out / "optimize.json").write_text(json.dumps(meta, indent=2) + "\n")
    if holder.optimizer_errors:
        for name, err in holder.optimizer_errors.items():
            print(f"sdp: {name} failed: {err}", file=sys.stderr)
        return 1
    return 0


def read_front(path: Path, algorithm: str, n_features: int | None = None) -> ParetoFront:
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    members = []
    for row in rows:
        bits = tuple(int(c) for c in row["bitstring"])
        L = len(bits)
        members.append(FrontMember(bits, ObjectiveVector(float(L - sum(bits)), float(row["auc"]))))
    width = n_features if n_features is not None else (len(members[0].bits) if members else 0)
    return ParetoFront(algorithm, tuple(members), width)


def cmd_fuse(args) -> int:
    src = Path(args.fronts)
    files = sorted(src.glob("pareto_*.csv"))
    if not files:
        raise FileNotFoundError(f"no pareto_*.csv files in {src}")
    fronts = [read_front(f, f.stem[len("pareto_"):]) for f in files]
    ranking = (weight_fuse if args.mode == "weight" else vote_fuse)(fronts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_ranking_csv(ranking, out / "fused_ranking.csv")
    print("ranking:", " ".join(f"f{e.feature}({e.votes})" for e in ranking.entries))

    meta_path = src / "optimize.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    dataset = args.dataset or meta.get("dataset")
    if not dataset:
        print("sdp: no dataset known (pass --dataset); prefix_curve.csv not written", file=sys.stderr)
        return 0
    ns = argparse.Namespace(dataset=dataset, format=meta.get("format"), label_column=meta.get("label_column"),
                            drop_columns=meta.get("drop_columns", "") or "")
    cfg = ExperimentConfig.from_mapping({"fusion": ()})
    _, _, ctx = _prepare(_load(ns), args.sampler or meta.get("sampler", "bs"), int(meta.get("seed", args.seed)), cfg)
    prefix = prefix_sweep(ranking, ctx)
    write_curve_csv(prefix, out / "prefix_curve.csv")
    print(f"best prefix: {prefix.length} features, auc {prefix.auc:.3f}")
    return 0


def _read_matrix(path: Path):
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header, body = rows[0], rows[1:]

    def numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    label_col = bool(body) and not numeric(body[0][0])
    methods = header[1:] if label_col else header
    names = [r[0] for r in body] if label_col else [str(i) for i in range(len(body))]
    M = np.array([[float(c) for c in (r[1:] if label_col else r)] for r in body])
    return methods, names, M


def cmd_stats(args) -> int:
    methods, _, M = _read_matrix(Path(args.input))
    if args.columns:
        pick = [c.strip() for c in args.columns.split(",")]
        idx = [methods.index(c) for c in pick]
        methods, M = pick, M[:, idx]
    rows: list[tuple] = []
    if args.test == "wilcoxon":
        if M.shape[1] != 2:
            raise ValueError("wilcoxon needs exactly two method columns (use --columns)")
        res = wilcoxon_signed_rank(M)
        print(f"wilcoxon {methods[0]} vs {methods[1]}: statistic={res.statistic:.3f} p_value={res.p_value:.3f} "
              f"significant={'yes' if res.significant else 'no'}")
        rows.append(("wilcoxon", " ".join(methods), res.statistic, res.p_value, res.significant, res.n, "", ""))
    else:
        res = friedman(M)
        cd = nemenyi_cd(M.shape[1], M.shape[0], args.alpha)
        print(f"friedman: statistic={res.statistic:.3f} p_value={res.p_value:.3f} "
              f"significant={'yes' if res.significant else 'no'}")
        for name, r in zip(methods, res.mean_ranks):
            print(f"  mean rank {name}: {r:.4f}")
        print(f"nemenyi cd (alpha={args.alpha}): {cd:.4f}")
        pairs = nemenyi_pairs(methods, res.mean_ranks, cd)
        if args.test == "nemenyi":
            for a, b, gap, sig in pairs:
                print(f"  {a} vs {b}: gap={gap:.4f} {'significant' if sig else 'not significant'}")
        rows.append(("friedman", " ".join(methods), res.statistic, res.p_value, res.significant, res.n_datasets,
                     cd, " ".join(repr(r) for r in res.mean_ranks)))
        for a, b, gap, sig in pairs:
            rows.append(("nemenyi", f"{a} {b}", gap, "", sig, res.n_datasets, cd, ""))
    if args.out:
        write_csv(Path(args.out), ["test", "methods", "statistic", "p_value", "significant", "n", "cd",
                                   "mean_ranks"], rows)
    return 0


def cmd_run(args) -> int:
    overrides = {"workers": args.workers, "profile": args.profile, "out_dir": args.out, "seed": args.seed}
    cfg = load_config(args.config, **overrides)
    if not cfg.out_dir:
        raise ValueError("no output directory: set out_dir in the config or pass --out")
    report = run_experiment(cfg)
    for name, agg in report.aggregate.items():
        print(f"{name:8s} auc={agg['auc']:.3f} f_score={agg['f_score']:.3f} acc={agg['acc']:.3f} "
              f"features={agg['n_features']:.1f}")
    failed = [f for f in report.folds if f.error]
    for f in failed:
        print(f"sdp: fold {f.fold} failed: {f.error}", file=sys.stderr)
    print(f"artifacts written to {cfg.out_dir}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resample", help="normalize and rebalance a dataset")
    _add_dataset_args(p)
    p.add_argument("--method", choices=SAMPLER_CHOICES, default="bs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV; a .report.json is written next to it")
    p.add_argument("-m", type=int, default=5, help="Borderline-SMOTE danger neighborhood (default 5)")
    p.add_argument("-k", type=int, default=5, help="SMOTE synthesis neighborhood (default 5)")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("optimize", help="run the feature-selection optimizers")
    _add_dataset_args(p)
    p.add_argument("--sampler", choices=SAMPLER_CHOICES, default="bs")
    p.add_argument("--algo", choices=(*OPTIMIZER_NAMES, "all"), default="all")
    p.add_argument("--pop", type=int, help="population size (default 100)")
    p.add_argument("--iters", type=int, help="iterations (default 100)")
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("fuse", help="vote/weight fusion of pareto_*.csv fronts")
    p.add_argument("--fronts", required=True, help="directory written by 'sdp optimize'")
    p.add_argument("--mode", choices=("vote", "weight"), default="vote")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dataset", help="override the dataset recorded in optimize.json")
    p.add_argument("--sampler", choices=SAMPLER_CHOICES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("stats", help="Wilcoxon / Friedman / Nemenyi on a datasets x methods CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--test", choices=("wilcoxon", "friedman", "nemenyi"), required=True)
    p.add_argument("--columns", help="comma-separated subset of method columns")
    p.add_argument("--alpha", type=float, choices=(0.05, 0.10), default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        if args.verbose:
            raise
        print(f"sdp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
