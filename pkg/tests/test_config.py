"""Strict JSON run configuration: parsing, validation, serialization."""

import json

import pytest

from corrvec.config import (
    AnsatzConfig,
    ConfigError,
    GridConfig,
    HamiltonianSource,
    MeasurementConfig,
    NoiseConfig,
    OptimizerConfig,
    RunConfig,
    load_config,
)


def minimal(**overrides):
    data = {"hamiltonian": {"kind": "hubbard-dimer", "t": 1.0, "u": 4.0}}
    data.update(overrides)
    return data


def test_defaults():
    cfg = RunConfig.parse(minimal())
    assert cfg.grid is None and cfg.active_space is None
    assert cfg.mu == 0.0
    assert cfg.number_penalty == 1.0 and cfg.spin_penalty == 1.0
    assert cfg.ansatz == AnsatzConfig()
    assert cfg.optimizer == OptimizerConfig()
    assert cfg.optimizer.gs_tol == 1e-8
    assert cfg.measurement == MeasurementConfig()
    assert cfg.noise == NoiseConfig()
    assert cfg.embedding == "none"
    assert cfg.min_converged_fraction == 0.95


def test_full_roundtrip():
    data = minimal(
        grid={"kind": "retarded", "omega_min": -1.0, "omega_max": 1.0,
              "n": 11, "eta": 0.02},
        active_space=[2, 1],
        mu=0.1,
        number_penalty=2.0,
        spin_penalty=0.5,
        ansatz={"depth": 4, "pattern": ["RX", "RZ"]},
        optimizer={"epsilon": 0.01, "gs_tol": 1e-9},
        measurement={"mode": "sampled", "shots": 2000, "seed": 13},
        noise={"enabled": True, "p2": 1e-3, "boost": 2.0, "zne": True},
        embedding="both",
        min_converged_fraction=0.8,
        out_dir="runs/x")
    cfg = RunConfig.parse(data)
    assert cfg.active_space == (1, 2)
    assert cfg.ansatz.pattern == ("RX", "RZ")
    assert cfg.spin_penalty == 0.5
    assert RunConfig.parse(cfg.to_json_dict()) == cfg


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(typo=1))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(optimizer={"epsilonn": 0.1}))
    with pytest.raises(ConfigError):
        RunConfig.parse({"hamiltonian": {"kind": "fcidump", "path": "x",
                                         "extra": 1}})


def test_missing_required():
    with pytest.raises(ConfigError):
        RunConfig.parse({})
    with pytest.raises(ConfigError):
        GridConfig.parse({"kind": "retarded", "omega_min": -1.0})


def test_hamiltonian_source_validation():
    with pytest.raises(ConfigError):
        HamiltonianSource.parse({"kind": "fcidump"})
    with pytest.raises(ConfigError):
        HamiltonianSource.parse({"kind": "fcidump", "path": "x", "t": 1.0})
    with pytest.raises(ConfigError):
        HamiltonianSource.parse({"kind": "hubbard-dimer", "t": 1.0})
    with pytest.raises(ConfigError):
        HamiltonianSource.parse({"kind": "hubbard-dimer", "t": 1.0, "u": 4.0,
                                 "path": "x"})
    with pytest.raises(ConfigError):
        HamiltonianSource.parse({"kind": "heisenberg"})
    src = HamiltonianSource.parse({"kind": "fcidump", "path": "a.fcidump"})
    assert src.to_json_dict() == {"kind": "fcidump", "path": "a.fcidump"}


def test_grid_validation_and_build():
    g = GridConfig.parse({"kind": "retarded", "omega_min": -1.0,
                          "omega_max": 1.0, "n": 5})
    assert g.eta == 0.05
    built = g.build()
    assert built.kind == "retarded" and len(built) == 5

    m = GridConfig.parse({"kind": "matsubara", "omega_max": 10.0, "n": 8})
    assert m.build().kind == "matsubara"
    assert m.to_json_dict() == {"kind": "matsubara", "omega_max": 10.0, "n": 8}

    for bad in (
        {"kind": "retarded", "omega_min": 1.0, "omega_max": -1.0, "n": 5},
        {"kind": "retarded", "omega_min": -1.0, "omega_max": 1.0, "n": 0},
        {"kind": "retarded", "omega_min": -1.0, "omega_max": 1.0, "n": 5,
         "eta": 0.0},
        {"kind": "matsubara", "omega_max": 0.0, "n": 5},
        {"kind": "matsubara", "omega_max": 1.0, "n": 5, "eta": 0.1},
        {"kind": "legendre", "omega_max": 1.0, "n": 5},
    ):
        with pytest.raises(ConfigError):
            GridConfig.parse(bad)


def test_ansatz_validation():
    with pytest.raises(ConfigError):
        AnsatzConfig.parse({"depth": 0})
    with pytest.raises(ConfigError):
        AnsatzConfig.parse({"pattern": ["RY", "H"]})
    with pytest.raises(ConfigError):
        AnsatzConfig.parse({"pattern": []})


def test_optimizer_validation():
    with pytest.raises(ConfigError):
        OptimizerConfig.parse({"epsilon": 0.0})
    with pytest.raises(ConfigError):
        OptimizerConfig.parse({"sector_penalty": -1.0})
    with pytest.raises(ConfigError):
        OptimizerConfig.parse({"gs_max_sweeps": 0})


def test_measurement_and_noise_validation():
    with pytest.raises(ConfigError):
        MeasurementConfig.parse({"mode": "tomography"})
    with pytest.raises(ConfigError):
        MeasurementConfig.parse({"shots": 0})
    with pytest.raises(ConfigError):
        NoiseConfig.parse({"p2": 1.5})
    with pytest.raises(ConfigError):
        NoiseConfig.parse({"boost": 1.0, "zne": True})
    quiet = NoiseConfig.parse({"boost": 1.0, "zne": False})
    assert not quiet.zne


def test_run_config_cross_field_rules():
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(active_space=[1, 1]))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(active_space=[-1]))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(embedding="dyson"))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(embedding="pade", active_space=[0, 1]))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(min_converged_fraction=1.5))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(number_penalty=-1.0))
    with pytest.raises(ConfigError):
        RunConfig.parse(minimal(spin_penalty=-0.1))
    cfg = RunConfig.parse(minimal(embedding="nondyson", active_space=[0, 1]))
    assert cfg.embedding == "nondyson"


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(minimal(out_dir=str(tmp_path / "out"))))
    cfg = load_config(path)
    assert cfg.hamiltonian.kind == "hubbard-dimer"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
