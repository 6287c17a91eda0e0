"""Config defaults, JSON merging, and field-path validation."""

import json

import pytest

from fontdapt.augment import DomainProfile
from fontdapt.config import (Config, ConfigError, config_from_dict,
                             default_config, load_config, validate_config)


def test_defaults_are_valid_and_roundtrip():
    cfg = default_config()
    validate_config(cfg)
    again = config_from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_partial_override_keeps_other_defaults():
    cfg = config_from_dict({"cnn": {"epochs": 3}, "work_dir": "w"})
    assert cfg.cnn.epochs == 3
    assert cfg.cnn.learning_rate == default_config().cnn.learning_rate
    assert cfg.work_dir == "w"


@pytest.mark.parametrize("data,path", [
    ({"scae": {"banana": 1}}, "scae.banana"),
    ({"nonsense": {}}, "nonsense"),
    ({"dataset": {"num_classes": 1}}, "dataset.num_classes"),
    ({"dataset": {"num_classes": "many"}}, "dataset.num_classes"),
    ({"cnn": {"learning_rate": -0.1}}, "cnn.learning_rate"),
    ({"cnn": {"momentum": 1.0}}, "cnn.momentum"),
    ({"cnn": {"frozen_prefix": "yes"}}, "cnn.frozen_prefix"),
    ({"scae": {"mixing_ratio": 1.5}}, "scae.mixing_ratio"),
    ({"experiment": {"seeds": []}}, "experiment.seeds"),
    ({"experiment": {"seeds": [1, 1]}}, "experiment.seeds"),
    ({"experiment": {"k_list": [0]}}, "experiment.k_list"),
    ({"work_dir": 7}, "work_dir"),
])
def test_errors_name_the_field_path(data, path):
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        config_from_dict(data)


def test_profile_override_and_errors():
    cfg = config_from_dict({"profiles": {"harsh": {
        "noise_sigma": [0.1, 0.2], "per_op_probability": 1.0}}})
    assert isinstance(cfg.profiles["harsh"], DomainProfile)
    assert cfg.profiles["harsh"].noise_sigma == (0.1, 0.2)
    # built-ins still present
    for name in ("clean", "synthetic_train", "pseudo_real"):
        assert name in cfg.profiles

    with pytest.raises(ConfigError, match=r"profiles\.bad\.wobble"):
        config_from_dict({"profiles": {"bad": {"wobble": [0, 1]}}})
    with pytest.raises(ConfigError, match=r"profiles\.bad"):
        config_from_dict({"profiles": {"bad": {"noise_sigma": [0.2, 0.1]}}})
    with pytest.raises(ConfigError, match=r"profiles\.bad\.noise_sigma"):
        config_from_dict({"profiles": {"bad": {"noise_sigma": 0.2}}})


def test_missing_required_profile():
    cfg = default_config()
    del cfg.profiles["pseudo_real"]
    with pytest.raises(ConfigError, match="pseudo_real"):
        validate_config(cfg)


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"dataset": {"num_classes": 4}}))
    assert load_config(path).dataset.num_classes == 4

    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.json")
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)
