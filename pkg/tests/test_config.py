import pytest

from cxpinn.config import ConfigError, TrainConfig, list_presets, load_config

PRESETS = ["helmholtz2d_a1_4", "helmholtz2d_pikan", "helmholtz2d_88", "helmholtz3d", "heat3d", "poisson5d",
           "poisson10d", "helmholtz2d_desk", "poisson5d_desk", "heat3d_desk", "helmholtz3d_desk", "poisson10d_desk",
           "helmholtz2d_sweep_desk", "helmholtz2d_init_sweep"]


def test_all_presets_ship_and_validate():
    assert set(PRESETS) <= set(list_presets())
    for name in list_presets():
        load_config(name).validate()


def test_poisson5d_preset_echo():
    echo = load_config("poisson5d").to_dict()
    assert echo["weights"]["lambda_f"] == 1.0 and echo["weights"]["lambda_b"] == 100.0
    assert echo["points"]["n_interior"] == 10_000 and echo["points"]["n_boundary"] == 500
    assert echo["width"] == 200 and echo["phases"][0]["iterations"] == 50_000


def test_pikan_preset_echo():
    echo = load_config("helmholtz2d_pikan").to_dict()
    assert echo["points"]["n_interior"] == 2401 and echo["points"]["n_boundary"] == 200
    assert echo["weights"]["lambda_f"] == 0.01 and echo["weights"]["lambda_b"] == 1.0
    assert [p["optimizer"] for p in echo["phases"]] == ["lbfgs"] and echo["phases"][0]["iterations"] == 1800


def test_case_a_preset():
    cfg = load_config("helmholtz2d_a1_4")
    assert [p.optimizer for p in cfg.phases] == ["adam", "lbfgs"]
    assert cfg.phases[0].lr == 5e-3 and cfg.phases[0].decay_rate == 0.7 and cfg.phases[1].iterations == 1000
    assert cfg.points.n_interior == 256_000 and cfg.trials == 3 and cfg.seed == 0


def test_echo_resolves_defaults():
    echo = TrainConfig.from_dict({"problem": {"name": "helmholtz3d"}}).to_dict()
    assert echo["weights"] == {"lambda_f": 1.0, "lambda_b": 1.0, "lambda_i": 1.0}
    assert echo["init"] == {"cauchy_init": 0.1, "mu1": 0.1, "mu2": 0.1, "d": 0.1}
    assert echo["phases"][0]["beta1"] == 0.9 and echo["phases"][0]["history_size"] == 10
    assert echo["metric_every"] == 100 and echo["d_floor"] == 1e-6


def test_init_override_single_param():
    echo = TrainConfig.from_dict({"init": {"d": 0.5}}).to_dict()
    assert echo["init"]["d"] == 0.5 and echo["init"]["mu1"] == 0.1


@pytest.mark.parametrize("data", [
    {"phases": []},
    {"phases": [{"optimizer": "adam", "iterations": 0}]},
    {"phases": [{"optimizer": "sgd", "iterations": 10}]},
    {"problem": {"name": "wave"}},
    {"width": 0},
    {"bogus": 1},
    {"points": {"nf": 3}},
    {"problem": {"name": "poisson5d"}},  # soft boundary needs boundary points
    {"problem": {"name": "helmholtz2d", "a3": 1.0}},
    {"activation": "relu"},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        TrainConfig.from_dict(data)


def test_load_file_and_errors(tmp_path):
    f = tmp_path / "c.toml"
    f.write_text('width = 7\n[problem]\nname = "heat3d"\n[[phases]]\noptimizer = "lbfgs"\niterations = 3\n')
    cfg = load_config(f)
    assert cfg.width == 7 and cfg.problem == "heat3d" and cfg.phases[0].optimizer == "lbfgs"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing")
    bad = tmp_path / "bad.toml"
    bad.write_text("width = = 3")
    with pytest.raises(ConfigError):
        load_config(bad)
