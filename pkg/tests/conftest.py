from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from sdp.data import RawDataset

DATA_DIR = Path(os.environ.get("SDP_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def make_ds(X, y, name="fixture") -> RawDataset:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return RawDataset(name, tuple(f"f{i}" for i in range(X.shape[1])), X, np.asarray(y))


def blobs(n_neg=40, n_pos=10, p=4, shift=1.5, seed=0) -> RawDataset:
    """Two Gaussian clouds in [0,1]-ish space; the first two features carry the signal."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_neg + n_pos, p))
    y = np.r_[np.zeros(n_neg, int), np.ones(n_pos, int)]
    X[y == 1, :2] += shift
    return make_ds(X, y)


def informative(n=160, p=10, informative_cols=(0, 1, 2), pos_rate=0.3, seed=0) -> RawDataset:
    rng = np.random.default_rng(seed)
    X = rng.random((n, p))
    signal = X[:, list(informative_cols)].sum(axis=1) + rng.normal(scale=0.15, size=n)
    y = (signal > np.quantile(signal, 1 - pos_rate)).astype(int)
    return make_ds(X, y, name="informative")


@pytest.fixture
def small_blobs():
    return blobs()


PROMISE_META_COLUMNS = ("name", "version", "name.1")


def find_dataset_file(stem: str) -> Path | None:
    if not DATA_DIR.is_dir():
        return None
    for path in sorted(DATA_DIR.iterdir()):
        if path.suffix.lower() in (".arff", ".csv") and path.stem.lower() == stem.lower():
            return path
    return None


def load_named(stem: str):
    """Load a NASA (ARFF/CSV, last column label) or PROMISE (CSV, ``bug`` count) file from DATA_DIR."""
    from sdp.data import load_dataset

    path = find_dataset_file(stem)
    if path is None:
        return None
    if "-" in stem:  # PROMISE naming: project-version
        return load_dataset(path, label_column="bug", drop_columns=PROMISE_META_COLUMNS)
    return load_dataset(path)


# ------------------------------------------------------- acceptance report

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_runtest_makereport(item, call):
    number = getattr(item.function, "criterion", None)
    if number is None or call.when != "call":
        return
    ok = call.excinfo is None
    detail = item.function.__doc__.strip().splitlines()[0] if item.function.__doc__ else item.name
    if not ok:
        msg = str(call.excinfo.value).strip().splitlines()
        detail += f" -- {msg[0] if msg else call.excinfo.typename}"
    ACCEPTANCE[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
