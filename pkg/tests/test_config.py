import json

import pytest

from delmar.admm import AdmmConfig
from delmar.config import RunConfig, build_run_config, load_config_file, to_bool
from delmar.exceptions import ConfigurationError


def test_from_dict_casts_strings():
    config = RunConfig.from_dict(
        {"beta": "5", "max_iter": "20", "mbp": "0", "initial_rank": "4", "mode": "exact"}
    )
    assert config.admm == AdmmConfig(beta=5.0, max_iter=20, mode="exact")
    assert config.mbp is False
    assert config.initial_rank == 4


def test_from_dict_errors():
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"colour": "red"})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"beta": "abc"})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"mbp": "maybe"})
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"max_layers": 0})


def test_dict_round_trip():
    config = RunConfig(AdmmConfig(eta=1.2, seed=7), initial_rank=3, mbp_sweeps=2)
    assert RunConfig.from_dict(config.to_dict()) == config


def test_to_bool():
    assert to_bool("yes") is True
    assert to_bool(0) is False
    with pytest.raises(ValueError):
        to_bool(2)


def test_load_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"beta": 20, "max_layers": 3}))
    assert load_config_file(str(path)) == {"beta": 20, "max_layers": 3}
    path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_config_file(str(path))


def test_load_yaml(tmp_path):
    pytest.importorskip("yaml")
    path = tmp_path / "run.yml"
    path.write_text("beta: 20\nmode: exact\n")
    assert load_config_file(str(path)) == {"beta": 20, "mode": "exact"}
    path.write_text("")
    assert load_config_file(str(path)) == {}


def test_unknown_extension(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config_file(str(tmp_path / "run.ini"))


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"beta": 20, "seed": 4}))
    config = build_run_config(str(path), {"beta": 30.0, "seed": None})
    assert config.admm.beta == 30.0
    assert config.admm.seed == 4
    assert build_run_config() == RunConfig()
