import json
import threading
import time

import numpy as np
import pytest

from sdp.data import save_csv
from sdp.pipeline import runner
from sdp.pipeline.config import ConfigError, ExperimentConfig, load_config
from sdp.pipeline.latch import CompletionLatch
from sdp.pipeline.report import CSV_FILES

from conftest import blobs

TINY = {"nsga2.n_pop": 6, "nsga2.n_iter": 2, "mopso.n_pop": 6, "mopso.n_iter": 2,
        "mode.n_pop": 6, "mode.n_iter": 2, "k_folds": 3}


def tiny_cfg(**extra):
    return ExperimentConfig.from_mapping({**TINY, **extra})


@pytest.fixture(scope="module")
def tiny_ds():
    return blobs(n_neg=45, n_pos=15, p=4, shift=1.2, seed=21)


# ------------------------------------------------------------------- latch


def test_latch_blocks_until_all_count_down():
    latch = CompletionLatch(3)
    released = []

    def waiter():
        latch.wait()
        released.append(len(latch.completed))

    t = threading.Thread(target=waiter)
    t.start()
    for name in ("a", "b"):
        latch.count_down(name)
        time.sleep(0.02)
        assert not released
    latch.count_down("c", error=RuntimeError("x"))
    t.join(2)
    assert released == [3] and set(latch.errors) == {"c"} and latch.count == 0
    with pytest.raises(RuntimeError):
        latch.count_down("d")


def test_latch_timeout_and_zero():
    assert not CompletionLatch(1).wait(timeout=0.01)
    assert CompletionLatch(0).wait(timeout=0)
    with pytest.raises(ValueError):
        CompletionLatch(-1)


def test_runner_latch_protocol(tiny_ds, monkeypatch):
    events = []

    class Recording(CompletionLatch):
        def count_down(self, name="", error=None):
            events.append(("done", name))
            super().count_down(name, error)

        def wait(self, timeout=None):
            ok = super().wait(timeout)
            events.append(("released", self.count))
            return ok

    monkeypatch.setattr(runner, "CompletionLatch", Recording)
    report = runner.run_experiment(tiny_cfg(k_folds=2, workers=3), tiny_ds)
    for f in report.folds:
        assert f.latch_initial == 3 and sorted(f.latch_completed) == ["mode", "mopso", "nsga2"]
    per_fold = [events[i:i + 4] for i in range(0, len(events), 4)]
    for chunk in per_fold:
        assert [e[0] for e in chunk] == ["done", "done", "done", "released"] and chunk[-1][1] == 0


def test_failed_optimizer_still_counts_down(tiny_ds, monkeypatch):
    def boom(ctx, params, seed=0):
        raise RuntimeError("exploded")

    monkeypatch.setitem(runner.OPTIMIZERS, "mopso", (boom, None))
    report = runner.run_experiment(tiny_cfg(k_folds=2), tiny_ds)
    for f in report.folds:
        assert f.error is None
        assert "mopso" in f.optimizer_errors and "exploded" in f.optimizer_errors["mopso"]
        assert len(f.latch_completed) == 3 and "mopso" not in f.fronts and "nsga2" in f.methods


def test_failed_fold_is_recorded(tiny_ds, monkeypatch):
    real = runner.resample
    calls = {"n": 0}

    def flaky(ds, method, **kw):
        calls["n"] += 1
        if calls["n"] == 2:
            raise ValueError("bad fold")
        return real(ds, method, **kw)

    monkeypatch.setattr(runner, "resample", flaky)
    report = runner.run_experiment(tiny_cfg(), tiny_ds)
    assert [f.error is None for f in report.folds] == [True, False, True]
    assert "bad fold" in report.folds[1].error
    assert report.aggregate["nsga2"]["n_folds"] == 2


# ---------------------------------------------------------- no test leaks


def test_test_fold_never_touched(tiny_ds, monkeypatch):
    current = {}
    touched = []

    def guard(name, ds):
        ids = set(ds.row_ids.tolist()) - {-1}
        touched.append(name)
        assert not ids & current["test"], f"{name} saw test rows"

    real_fold = runner.run_fold

    def fold(cfg, ds, i, train_idx, test_idx):
        current["test"] = set(ds.row_ids[test_idx].tolist())
        return real_fold(cfg, ds, i, train_idx, test_idx)

    def wrap(name, fn):
        def inner(ds, *a, **kw):
            guard(name, ds)
            return fn(ds, *a, **kw)
        return inner

    class GuardedCtx(runner.EvalContext):
        def __init__(self, data, *a, **kw):
            guard("optimizer", data)
            super().__init__(data, *a, **kw)

    monkeypatch.setattr(runner, "run_fold", fold)
    monkeypatch.setattr(runner, "fit_normalizer", wrap("normalize", runner.fit_normalizer))
    monkeypatch.setattr(runner, "resample", wrap("resample", runner.resample))
    monkeypatch.setattr(runner, "rank_pearson", wrap("pearson", runner.rank_pearson))
    monkeypatch.setattr(runner, "rank_fisher", wrap("fisher", runner.rank_fisher))
    monkeypatch.setattr(runner, "EvalContext", GuardedCtx)
    report = runner.run_experiment(tiny_cfg(baselines=("pearson", "fisher", "greedy")), tiny_ds)
    assert all(f.error is None for f in report.folds)
    assert {"normalize", "resample", "optimizer", "pearson", "fisher"} <= set(touched)
    tested = sorted(i for f in report.folds for i in f.test_row_ids)
    assert tested == list(range(tiny_ds.n_rows))


# -------------------------------------------------- report and determinism


def test_aggregate_is_mean_of_folds(tiny_ds):
    report = runner.run_experiment(tiny_cfg(baselines=("pearson",)), tiny_ds)
    for name, agg in report.aggregate.items():
        for key in ("acc", "f_score", "auc"):
            vals = [getattr(f.methods[name].metrics, key) for f in report.folds]
            assert abs(agg[key] - float(np.mean(vals))) <= 1e-12
    assert set(report.aggregate) == {"nsga2", "mopso", "mode", "vote", "weight", "pearson"}
    assert report.stats["optimizers"]["test"] == "friedman"


def test_outputs_identical_across_runs_and_workers(tiny_ds, tmp_path):
    data = tmp_path / "d.csv"
    save_csv(tiny_ds, data)
    outs = []
    for i, workers in enumerate((1, 4, 1)):
        out = tmp_path / f"run{i}"
        runner.run_experiment(tiny_cfg(dataset=str(data), workers=workers, out_dir=str(out)))
        outs.append(out)
    for name in CSV_FILES:
        ref = (outs[0] / name).read_bytes()
        assert all((o / name).read_bytes() == ref for o in outs[1:]), name
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert set(manifest) == set(CSV_FILES) | {"report.json"}
    summary = json.loads((outs[0] / "report.json").read_text())
    assert summary["wall_clock_seconds"] > 0 and summary["config"]["k_folds"] == 3


def test_seed_changes_results(tiny_ds):
    a = runner.run_experiment(tiny_cfg(seed=1), tiny_ds)
    b = runner.run_experiment(tiny_cfg(seed=2), tiny_ds)
    assert [f.test_row_ids for f in a.folds] != [f.test_row_ids for f in b.folds]


def test_derive_seed():
    assert runner.derive_seed(0, 0, 1) == runner.derive_seed(0, 0, 1)
    seeds = {runner.derive_seed(m, f, s) for m in range(3) for f in range(10) for s in (1, 2, 3, 10, 11, 12)}
    assert len(seeds) == 180


def test_global_normalization_scope(tiny_ds):
    report = runner.run_experiment(tiny_cfg(normalize_scope="global", optimizers=("nsga2",), fusion=()), tiny_ds)
    assert all(f.error is None for f in report.folds) and set(report.aggregate) == {"nsga2"}


# ------------------------------------------------------------------ config


def test_config_file_parsing(tmp_path):
    (tmp_path / "data").mkdir()
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(
        "# experiment\n"
        "dataset = data/CM1.arff\n"
        "sampler = st   ; inline comment\n"
        "optimizers = nsga2, MODE\n"
        "fusion = vote\n"
        "baselines = pearson, fisher\n"
        "seed = 7\n"
        "nsga2.n_pop = 30\n"
        "mopso.c1 = 1.5\n"
        "svm.C = 2.0\n"
        "svm.gamma = auto\n"
        "\n[mode]\nf = 0.7\n"
    )
    cfg = load_config(cfg_path)
    assert cfg.dataset == str((tmp_path / "data" / "CM1.arff").resolve())
    assert cfg.sampler == "st" and cfg.optimizers == ("nsga2", "mode") and cfg.fusion == ("vote",)
    assert cfg.baselines == ("pearson", "fisher") and cfg.seed == 7 and cfg.k_folds == 10
    assert cfg.nsga2.n_pop == 30 and cfg.nsga2.n_iter == 100
    assert cfg.mopso.c1 == 1.5 and cfg.svm.C == 2.0 and cfg.svm.gamma is None and cfg.mode.f == 0.7


def test_profiles_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("profile = desk\nmopso.n_iter = 4\n")
    cfg = load_config(p, seed=3, workers=2)
    assert cfg.k_folds == 5 and cfg.nsga2.n_pop == 20 and cfg.nsga2.n_iter == 10
    assert cfg.mopso.n_iter == 4 and cfg.seed == 3 and cfg.workers == 2


def test_workers_env(monkeypatch):
    monkeypatch.setenv("SDP_WORKERS", "3")
    assert ExperimentConfig().workers == 3
    monkeypatch.setenv("SDP_WORKERS", "junk")
    assert ExperimentConfig().workers == 1


@pytest.mark.parametrize(
    "values",
    [
        {"k_folds": "1"},
        {"optimizers": "", "fusion": "vote"},
        {"optimizers": "nsga2, cso"},
        {"sampler": "adasyn"},
        {"bogus": "1"},
        {"nsga2.bogus": "1"},
        {"k_folds": "ten"},
        {"profile": "huge"},
        {"normalize_scope": "both"},
    ],
)
def test_config_validation(values):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(values)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
