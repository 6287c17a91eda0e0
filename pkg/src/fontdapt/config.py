"""Run configuration: embedded defaults, JSON overrides, field-path errors.

A config is a nested dataclass tree. `load_config` starts from the defaults,
merges a JSON file on top, and validates; every complaint names the offending
field with its dotted path so CLI users can fix the file directly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .augment import BUILTIN_PROFILES, DomainProfile

REQUIRED_PROFILES = ("clean", "synthetic_train", "pseudo_real")


class ConfigError(ValueError):
    """Invalid configuration; message starts with the dotted field path."""


@dataclass
class DatasetConfig:
    num_classes: int = 20
    train_per_class: int = 200
    test_per_class: int = 50
    unlabeled_per_class: int = 5
    canvas_height: int = 48
    canvas_width: int = 192
    em_height: int = 32
    delta: float = 0.4  # minimum per-parameter font separation (lattice spacing)


@dataclass
class ScaeConfig:
    epochs: int = 8
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 0.0
    batch_size: int = 32
    patch_count: int = 2000
    patches_per_image: int = 4
    mixing_ratio: float = 0.5  # fraction of patches from the pseudo-real pool


@dataclass
class CnnConfig:
    epochs: int = 5
    learning_rate: float = 0.03
    momentum: float = 0.9
    weight_decay: float = 0.0
    batch_size: int = 32
    frozen_prefix: bool = True


@dataclass
class ExperimentConfig:
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    k_list: list[int] = field(default_factory=lambda: [1, 5])


@dataclass
class Config:
    work_dir: str = "work"
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    profiles: dict = field(default_factory=lambda: dict(BUILTIN_PROFILES))
    scae: ScaeConfig = field(default_factory=ScaeConfig)
    cnn: CnnConfig = field(default_factory=CnnConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def to_dict(self) -> dict:
        return {
            "work_dir": self.work_dir,
            "dataset": dataclasses.asdict(self.dataset),
            "profiles": {name: p.to_dict() for name, p in self.profiles.items()},
            "scae": dataclasses.asdict(self.scae),
            "cnn": dataclasses.asdict(self.cnn),
            "experiment": dataclasses.asdict(self.experiment),
        }


def default_config() -> Config:
    return Config()


def _merge_section(obj, data: dict, path: str):
    fields = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in fields:
            raise ConfigError(f"{path}.{key}: unknown field")
        current = getattr(obj, key)
        if isinstance(current, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{path}.{key}: expected a boolean, got {value!r}")
        elif isinstance(current, int):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
        elif isinstance(current, float):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
            value = float(value)
        elif isinstance(current, list):
            if not isinstance(value, list):
                raise ConfigError(f"{path}.{key}: expected a list, got {value!r}")
        setattr(obj, key, value)


def _parse_profile(name: str, data, path: str) -> DomainProfile:
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {data!r}")
    known = {f.name for f in dataclasses.fields(DomainProfile)}
    kwargs = {"name": name}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}: unknown field")
        if key == "name":
            continue
        if key == "per_op_probability":
            kwargs[key] = value
        else:
            if (not isinstance(value, (list, tuple)) or len(value) != 2):
                raise ConfigError(f"{path}.{key}: expected [lo, hi], got {value!r}")
            kwargs[key] = (float(value[0]), float(value[1]))
    try:
        return DomainProfile(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_from_dict(data: dict) -> Config:
    if not isinstance(data, dict):
        raise ConfigError(f"config root: expected an object, got {type(data).__name__}")
    cfg = default_config()
    for key, value in data.items():
        if key == "work_dir":
            if not isinstance(value, str):
                raise ConfigError(f"work_dir: expected a string, got {value!r}")
            cfg.work_dir = value
        elif key in ("dataset", "scae", "cnn", "experiment"):
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object, got {value!r}")
            _merge_section(getattr(cfg, key), value, key)
        elif key == "profiles":
            if not isinstance(value, dict):
                raise ConfigError(f"profiles: expected an object, got {value!r}")
            for pname, pdata in value.items():
                cfg.profiles[pname] = _parse_profile(pname, pdata, f"profiles.{pname}")
        else:
            raise ConfigError(f"{key}: unknown field")
    validate_config(cfg)
    return cfg


def load_config(path) -> Config:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def validate_config(cfg: Config) -> None:
    d = cfg.dataset
    _require(d.num_classes >= 2, "dataset.num_classes", ">= 2", d.num_classes)
    for name in ("train_per_class", "test_per_class", "unlabeled_per_class",
                 "em_height"):
        _require(getattr(d, name) >= 1, f"dataset.{name}", ">= 1", getattr(d, name))
    _require(d.canvas_height >= 48, "dataset.canvas_height", ">= 48", d.canvas_height)
    _require(d.canvas_width >= 48, "dataset.canvas_width", ">= 48", d.canvas_width)
    _require(0.0 < d.delta <= 1.0, "dataset.delta", "in (0, 1]", d.delta)

    for section, name in ((cfg.scae, "scae"), (cfg.cnn, "cnn")):
        _require(section.epochs >= 0, f"{name}.epochs", ">= 0", section.epochs)
        _require(section.learning_rate >= 0, f"{name}.learning_rate", ">= 0",
                 section.learning_rate)
        _require(0 <= section.momentum < 1, f"{name}.momentum", "in [0, 1)",
                 section.momentum)
        _require(section.weight_decay >= 0, f"{name}.weight_decay", ">= 0",
                 section.weight_decay)
        _require(section.batch_size >= 1, f"{name}.batch_size", ">= 1",
                 section.batch_size)
    _require(cfg.scae.patch_count >= 2, "scae.patch_count", ">= 2",
             cfg.scae.patch_count)
    _require(cfg.scae.patches_per_image >= 1, "scae.patches_per_image", ">= 1",
             cfg.scae.patches_per_image)
    _require(0.0 <= cfg.scae.mixing_ratio <= 1.0, "scae.mixing_ratio",
             "in [0, 1]", cfg.scae.mixing_ratio)

    e = cfg.experiment
    _require(len(e.seeds) >= 1, "experiment.seeds", "non-empty", e.seeds)
    _require(all(isinstance(s, int) for s in e.seeds), "experiment.seeds",
             "all integers", e.seeds)
    _require(len(set(e.seeds)) == len(e.seeds), "experiment.seeds",
             "distinct", e.seeds)
    _require(len(e.k_list) >= 1, "experiment.k_list", "non-empty", e.k_list)
    _require(all(isinstance(k, int) and k >= 1 for k in e.k_list),
             "experiment.k_list", "all integers >= 1", e.k_list)

    for pname in REQUIRED_PROFILES:
        if pname not in cfg.profiles:
            raise ConfigError(f"profiles.{pname}: required profile is missing")


def _require(ok: bool, path: str, what: str, value) -> None:
    if not ok:
        raise ConfigError(f"{path}: must be {what}, got {value!r}")
