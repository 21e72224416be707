"""Experiment configuration and its flat ``key = value`` file format.

Example::

    # exp.cfg
    dataset = data/CM1.arff
    sampler = bs
    optimizers = nsga2, mopso, mode
    fusion = vote, weight
    baselines = pearson, fisher
    k_folds = 10
    seed = 7
    out_dir = runs/cm1
    nsga2.n_pop = 100
    mopso.c1 = 1.49
    svm.C = 1.0

Keys are case-insensitive, ``#`` and ``;`` start comments, and lists are
comma-separated. A ``profile = desk`` line shrinks populations, iterations
and folds; explicit keys still win over the profile.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..classify import RbfSvm
from ..moo import MODEParams, MOPSOParams, NSGA2Params
from ..resample import SAMPLERS

WORKERS_ENV = "SDP_WORKERS"
OPTIMIZER_NAMES = ("nsga2", "mopso", "mode")
FUSION_NAMES = ("vote", "weight")
BASELINE_NAMES = ("pearson", "fisher", "greedy")

PROFILES = {
    "full": {},
    "desk": {"nsga2.n_pop": 20, "nsga2.n_iter": 10, "mopso.n_pop": 20, "mopso.n_iter": 10,
             "mode.n_pop": 20, "mode.n_iter": 10, "k_folds": 5},
}


class ConfigError(ValueError):
    pass


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = ""
    format: str | None = None
    label_column: str | None = None
    drop_columns: tuple[str, ...] = ()
    sampler: str = "bs"
    optimizers: tuple[str, ...] = OPTIMIZER_NAMES
    fusion: tuple[str, ...] = FUSION_NAMES
    baselines: tuple[str, ...] = ()
    k_folds: int = 10
    seed: int = 0
    out_dir: str | None = None
    workers: int = field(default_factory=default_workers)
    normalize_scope: str = "fold"
    validation_fraction: float = 0.2
    smote_m: int = 5
    smote_k: int = 5
    profile: str = "full"
    nsga2: NSGA2Params = NSGA2Params()
    mopso: MOPSOParams = MOPSOParams()
    mode: MODEParams = MODEParams()
    svm: RbfSvm = RbfSvm()

    def __post_init__(self) -> None:
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        for name, allowed, values in (
            ("optimizers", OPTIMIZER_NAMES, self.optimizers),
            ("fusion", FUSION_NAMES, self.fusion),
            ("baselines", BASELINE_NAMES, self.baselines),
        ):
            bad = [v for v in values if v not in allowed]
            if bad:
                raise ConfigError(f"unknown {name}: {', '.join(bad)}")
        if self.fusion and not self.optimizers:
            raise ConfigError("fusion needs at least one optimizer")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be at least 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.normalize_scope not in ("fold", "global"):
            raise ConfigError("normalize_scope must be 'fold' or 'global'")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie in (0, 1)")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        values = {str(k).strip().lower(): v for k, v in values.items()}
        profile = str(values.get("profile", "full")).strip().lower()
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}")
        merged = {**PROFILES[profile], **values, "profile": profile}
        nested = {"nsga2": {}, "mopso": {}, "mode": {}, "svm": {}}
        flat = {}
        for key, raw in merged.items():
            if "." in key:
                group, sub = key.split(".", 1)
                if group not in nested:
                    raise ConfigError(f"unknown key {key!r}")
                nested[group][sub] = raw
            else:
                flat[key] = raw
        kwargs = {}
        hints = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in flat.items():
            if key not in hints or key in nested:
                raise ConfigError(f"unknown key {key!r}")
            kwargs[key] = _coerce(key, raw, cls.__dataclass_fields__[key].default)
        for group, subs in nested.items():
            base = hints[group].default
            known = {f.name: f for f in dataclasses.fields(base)}
            upd = {}
            for sub, raw in subs.items():
                match = next((n for n in known if n.lower() == sub), None)
                if match is None:
                    raise ConfigError(f"unknown key {group}.{sub}")
                upd[match] = _coerce(f"{group}.{sub}", raw, getattr(base, match))
            kwargs[group] = dataclasses.replace(base, **upd)
        return cls(**kwargs)


_LIST_KEYS = {"drop_columns", "optimizers", "fusion", "baselines"}
_OPTIONAL_STR = {"format", "label_column", "out_dir"}
_INT_KEYS = {"k_folds", "seed", "workers", "smote_m", "smote_k"}


def _coerce(key: str, raw, default):
    if not isinstance(raw, str):
        return tuple(raw) if key in _LIST_KEYS else raw
    text = raw.strip()
    try:
        if key in _LIST_KEYS:
            return tuple(t.strip().lower() if key != "drop_columns" else t.strip()
                         for t in text.split(",") if t.strip())
        if key in _OPTIONAL_STR or key == "svm.gamma":
            if text.lower() in ("", "none", "auto"):
                return None
            return float(text) if key == "svm.gamma" else text
        if key in _INT_KEYS:
            return int(text)
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    """Read a flat key/value config file; relative dataset paths resolve against it."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    text = path.read_text()
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values: dict = {}
    for section in parser.sections():
        prefix = "" if section.lower() == "experiment" else section.lower() + "."
        for key, value in parser.items(section):
            values[prefix + key] = value
    if "dataset" in values and not Path(values["dataset"]).is_absolute():
        values["dataset"] = str((path.parent / values["dataset"]).resolve())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_mapping(values)
