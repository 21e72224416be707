"""Run-directory writers: flat CSV tables, a JSON summary and a manifest.

CSV files depend only on (config, dataset); the JSON summary additionally
carries wall-clock time and latch completion order.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from pathlib import Path

from .runner import ExperimentReport

CSV_FILES = (
    "fold_metrics.csv",
    "aggregate_metrics.csv",
    "sampling.csv",
    "pareto_fronts.csv",
    "solution_space.csv",
    "fused_rankings.csv",
    "prefix_curves.csv",
    "stats.csv",
)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_pareto_csv(front, path: Path) -> None:
    write_csv(path, ["bitstring", "n_features", "auc"],
              [(m.bitstring, m.n_features, m.auc) for m in front.members])


def write_ranking_csv(ranking, path: Path) -> None:
    write_csv(path, ["feature", "votes", "weight", "rank"],
              [(e.feature, e.votes, e.weight, r + 1) for r, e in enumerate(ranking.entries)])


def write_curve_csv(prefix, path: Path) -> None:
    write_csv(path, ["length", "auc"], prefix.curve)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_report(report: ExperimentReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    folds = report.folds

    write_csv(out / "fold_metrics.csv",
              ["fold", "method", "n_features", "tp", "fp", "fn", "tn", "acc", "f_score", "auc", "features"],
              [(f.fold, name, m.n_features, m.metrics.tp, m.metrics.fp, m.metrics.fn, m.metrics.tn,
                m.metrics.acc, m.metrics.f_score, m.metrics.auc, " ".join(map(str, m.features)))
               for f in folds for name, m in f.methods.items()])
    write_csv(out / "aggregate_metrics.csv", ["method", "acc", "f_score", "auc", "n_features", "n_folds"],
              [(name, a["acc"], a["f_score"], a["auc"], a["n_features"], int(a["n_folds"]))
               for name, a in report.aggregate.items()])
    write_csv(out / "sampling.csv",
              ["fold", "method", "before_majority", "before_minority", "after_majority", "after_minority",
               "synthetic_created", "tomek_pairs_removed", "fallback"],
              [(f.fold, *f.sampling.as_dict().values()) for f in folds if f.sampling is not None])
    write_csv(out / "pareto_fronts.csv", ["fold", "algorithm", "bitstring", "n_features", "auc"],
              [(f.fold, algo, m.bitstring, m.n_features, m.auc)
               for f in folds for algo, fr in f.fronts.items() for m in fr.members])
    write_csv(out / "solution_space.csv", ["fold", "algorithm", "bitstring", "n_features", "auc"],
              [(f.fold, algo, bits, bits.count("1"), auc)
               for f in folds for algo, fr in f.fronts.items() for bits, _, auc in fr.history])
    write_csv(out / "fused_rankings.csv", ["fold", "mode", "rank", "feature", "votes", "weight"],
              [(f.fold, mode, r + 1, e.feature, e.votes, e.weight)
               for f in folds for mode, rk in f.rankings.items() for r, e in enumerate(rk.entries)])
    write_csv(out / "prefix_curves.csv", ["fold", "method", "length", "auc", "chosen"],
              [(f.fold, name, n, auc, n == p.length)
               for f in folds for name, p in f.prefixes.items() for n, auc in p.curve])
    stat_rows = []
    for scope, entry in report.stats.items():
        stat_rows.append((scope, entry.get("test"), " ".join(entry.get("methods", [])), entry.get("statistic"),
                          entry.get("p_value"), entry.get("significant"), entry.get("cd"),
                          " ".join(fmt(r) for r in entry.get("mean_ranks", [])), entry.get("error")))
    write_csv(out / "stats.csv",
              ["scope", "test", "methods", "statistic", "p_value", "significant", "cd", "mean_ranks", "error"],
              stat_rows)

    summary = {
        "version": report.version,
        "dataset": report.dataset,
        "n_rows": report.n_rows,
        "n_features": report.n_features,
        "config": report.config.as_dict(),
        "seeds": report.seeds,
        "aggregate": report.aggregate,
        "stats": report.stats,
        "folds": [
            {"fold": f.fold, "n_train": f.n_train, "n_test": f.n_test, "error": f.error,
             "sampling": f.sampling.as_dict() if f.sampling else None,
             "latch_initial": f.latch_initial, "latch_completed": list(f.latch_completed),
             "optimizer_errors": f.optimizer_errors}
            for f in folds
        ],
        "wall_clock_seconds": report.wall_clock,
    }
    (out / "report.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    manifest = {name: hashlib.sha256((out / name).read_bytes()).hexdigest() for name in CSV_FILES}
    manifest["report.json"] = None  # contains wall-clock time, not hashed
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out
