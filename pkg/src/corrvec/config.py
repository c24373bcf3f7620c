"""Run configuration: a strict, archival JSON schema.

Unknown keys are rejected at every nesting level so an experiment file
cannot silently drift from what the code actually reads.  A parsed config
serializes back to an equivalent dictionary, which the manifest embeds as
the run's permanent record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

VALID_ROTATIONS = ("RX", "RY", "RZ")
EMBED_MODES = ("none", "dyson", "nondyson", "both")


class ConfigError(ValueError):
    """Raised for malformed, inconsistent, or unknown configuration."""


def _take(section: dict, name: str, keys: dict[str, object]) -> dict:
    """Pop known keys with defaults; reject anything left over."""
    if not isinstance(section, dict):
        raise ConfigError(f"{name}: expected an object")
    out = {}
    data = dict(section)
    for key, default in keys.items():
        out[key] = data.pop(key, default)
    if data:
        raise ConfigError(f"{name}: unknown keys {sorted(data)}")
    return out


_REQUIRED = object()


def _require(name: str, values: dict) -> None:
    missing = [k for k, v in values.items() if v is _REQUIRED]
    if missing:
        raise ConfigError(f"{name}: missing required keys {sorted(missing)}")


@dataclass(frozen=True)
class HamiltonianSource:
    kind: str
    path: str | None = None
    t: float | None = None
    u: float | None = None

    @staticmethod
    def parse(section: dict) -> "HamiltonianSource":
        vals = _take(section, "hamiltonian",
                     {"kind": _REQUIRED, "path": None, "t": None, "u": None})
        _require("hamiltonian", vals)
        kind = vals["kind"]
        if kind == "fcidump":
            if not vals["path"]:
                raise ConfigError("hamiltonian: fcidump source requires 'path'")
            if vals["t"] is not None or vals["u"] is not None:
                raise ConfigError("hamiltonian: t/u only apply to hubbard-dimer")
            return HamiltonianSource("fcidump", path=str(vals["path"]))
        if kind == "hubbard-dimer":
            if vals["t"] is None or vals["u"] is None:
                raise ConfigError("hamiltonian: hubbard-dimer requires 't' and 'u'")
            if vals["path"] is not None:
                raise ConfigError("hamiltonian: path only applies to fcidump")
            return HamiltonianSource("hubbard-dimer", t=float(vals["t"]),
                                     u=float(vals["u"]))
        raise ConfigError(f"hamiltonian: unknown kind {kind!r}")

    def to_json_dict(self) -> dict:
        if self.kind == "fcidump":
            return {"kind": "fcidump", "path": self.path}
        return {"kind": "hubbard-dimer", "t": self.t, "u": self.u}


@dataclass(frozen=True)
class GridConfig:
    kind: str
    omega_min: float | None
    omega_max: float
    n: int
    eta: float | None

    @staticmethod
    def parse(section: dict) -> "GridConfig":
        vals = _take(section, "grid", {"kind": _REQUIRED, "omega_min": None,
                                       "omega_max": _REQUIRED, "n": _REQUIRED,
                                       "eta": None})
        _require("grid", vals)
        kind = vals["kind"]
        n = int(vals["n"])
        if n < 1:
            raise ConfigError("grid: n must be at least 1")
        if kind == "retarded":
            if vals["omega_min"] is None:
                raise ConfigError("grid: retarded grid requires omega_min")
            eta = 0.05 if vals["eta"] is None else float(vals["eta"])
            if eta <= 0:
                raise ConfigError("grid: retarded grid requires eta > 0")
            lo, hi = float(vals["omega_min"]), float(vals["omega_max"])
            if not lo < hi:
                raise ConfigError("grid: omega_min must be below omega_max")
            return GridConfig("retarded", lo, hi, n, eta)
        if kind == "matsubara":
            if vals["omega_min"] is not None or vals["eta"] is not None:
                raise ConfigError("grid: matsubara grid takes only omega_max and n")
            hi = float(vals["omega_max"])
            if hi <= 0:
                raise ConfigError("grid: omega_max must be positive")
            return GridConfig("matsubara", None, hi, n, None)
        raise ConfigError(f"grid: unknown kind {kind!r}")

    def build(self):
        from .greens import matsubara_grid, retarded_grid

        if self.kind == "retarded":
            return retarded_grid(self.omega_min, self.omega_max, self.n, self.eta)
        return matsubara_grid(self.omega_max, self.n)

    def to_json_dict(self) -> dict:
        if self.kind == "retarded":
            return {"kind": "retarded", "omega_min": self.omega_min,
                    "omega_max": self.omega_max, "n": self.n, "eta": self.eta}
        return {"kind": "matsubara", "omega_max": self.omega_max, "n": self.n}


@dataclass(frozen=True)
class AnsatzConfig:
    depth: int = 3
    pattern: tuple[str, ...] = ("RY", "RZ")

    @staticmethod
    def parse(section: dict) -> "AnsatzConfig":
        vals = _take(section, "ansatz", {"depth": 3, "pattern": ["RY", "RZ"]})
        depth = int(vals["depth"])
        if depth < 1:
            raise ConfigError("ansatz: depth must be at least 1")
        pattern = tuple(str(p) for p in vals["pattern"])
        if not pattern or any(p not in VALID_ROTATIONS for p in pattern):
            raise ConfigError(f"ansatz: pattern entries must be in {VALID_ROTATIONS}")
        return AnsatzConfig(depth, pattern)

    def to_json_dict(self) -> dict:
        return {"depth": self.depth, "pattern": list(self.pattern)}


@dataclass(frozen=True)
class OptimizerConfig:
    epsilon: float = 0.05
    max_sweeps: int = 60
    stall_sweeps: int = 10
    extra_depth: int = 3
    sector_penalty: float = 1.0
    gs_tol: float = 1e-8
    gs_max_sweeps: int = 200

    @staticmethod
    def parse(section: dict) -> "OptimizerConfig":
        d = OptimizerConfig()
        vals = _take(section, "optimizer", {
            "epsilon": d.epsilon, "max_sweeps": d.max_sweeps,
            "stall_sweeps": d.stall_sweeps, "extra_depth": d.extra_depth,
            "sector_penalty": d.sector_penalty, "gs_tol": d.gs_tol,
            "gs_max_sweeps": d.gs_max_sweeps})
        out = OptimizerConfig(
            epsilon=float(vals["epsilon"]), max_sweeps=int(vals["max_sweeps"]),
            stall_sweeps=int(vals["stall_sweeps"]),
            extra_depth=int(vals["extra_depth"]),
            sector_penalty=float(vals["sector_penalty"]),
            gs_tol=float(vals["gs_tol"]),
            gs_max_sweeps=int(vals["gs_max_sweeps"]))
        if out.epsilon <= 0 or out.max_sweeps < 1 or out.gs_max_sweeps < 1:
            raise ConfigError("optimizer: epsilon and sweep budgets must be positive")
        if out.sector_penalty < 0:
            raise ConfigError("optimizer: sector_penalty must be non-negative")
        return out

    def to_json_dict(self) -> dict:
        return {"epsilon": self.epsilon, "max_sweeps": self.max_sweeps,
                "stall_sweeps": self.stall_sweeps, "extra_depth": self.extra_depth,
                "sector_penalty": self.sector_penalty, "gs_tol": self.gs_tol,
                "gs_max_sweeps": self.gs_max_sweeps}


@dataclass(frozen=True)
class MeasurementConfig:
    mode: str = "exact"
    shots: int = 10**6
    seed: int = 7

    @staticmethod
    def parse(section: dict) -> "MeasurementConfig":
        d = MeasurementConfig()
        vals = _take(section, "measurement",
                     {"mode": d.mode, "shots": d.shots, "seed": d.seed})
        mode = str(vals["mode"])
        if mode not in ("exact", "sampled"):
            raise ConfigError("measurement: mode must be 'exact' or 'sampled'")
        shots = int(vals["shots"])
        if shots < 1:
            raise ConfigError("measurement: shots must be positive")
        return MeasurementConfig(mode, shots, int(vals["seed"]))

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "shots": self.shots, "seed": self.seed}


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = False
    p2: float = 1e-3
    boost: float = 2.0
    zne: bool = True

    @staticmethod
    def parse(section: dict) -> "NoiseConfig":
        d = NoiseConfig()
        vals = _take(section, "noise", {"enabled": d.enabled, "p2": d.p2,
                                        "boost": d.boost, "zne": d.zne})
        out = NoiseConfig(bool(vals["enabled"]), float(vals["p2"]),
                          float(vals["boost"]), bool(vals["zne"]))
        if not 0 <= out.p2 <= 1:
            raise ConfigError("noise: p2 must lie in [0, 1]")
        if out.boost <= 1 and out.zne:
            raise ConfigError("noise: extrapolation needs boost > 1")
        return out

    def to_json_dict(self) -> dict:
        return {"enabled": self.enabled, "p2": self.p2, "boost": self.boost,
                "zne": self.zne}


@dataclass(frozen=True)
class RunConfig:
    hamiltonian: HamiltonianSource
    grid: GridConfig | None = None
    active_space: tuple[int, ...] | None = None
    mu: float = 0.0
    number_penalty: float = 1.0
    spin_penalty: float = 1.0
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    embedding: str = "none"
    min_converged_fraction: float = 0.95
    out_dir: str = "runs/out"

    @staticmethod
    def parse(data: dict) -> "RunConfig":
        d = RunConfig.__dataclass_fields__
        vals = _take(data, "config", {
            "hamiltonian": _REQUIRED, "grid": None, "active_space": None,
            "mu": 0.0, "number_penalty": d["number_penalty"].default,
            "spin_penalty": d["spin_penalty"].default, "ansatz": None,
            "optimizer": None, "measurement": None, "noise": None,
            "embedding": "none",
            "min_converged_fraction": d["min_converged_fraction"].default,
            "out_dir": d["out_dir"].default})
        _require("config", vals)
        active = vals["active_space"]
        if active is not None:
            active = tuple(sorted(int(a) for a in active))
            if len(set(active)) != len(active) or any(a < 0 for a in active):
                raise ConfigError("active_space: need distinct non-negative orbitals")
        embedding = str(vals["embedding"])
        if embedding not in EMBED_MODES:
            raise ConfigError(f"embedding: must be one of {EMBED_MODES}")
        if embedding != "none" and active is None:
            raise ConfigError("embedding requires an active_space")
        frac = float(vals["min_converged_fraction"])
        if not 0 <= frac <= 1:
            raise ConfigError("min_converged_fraction must lie in [0, 1]")
        if float(vals["number_penalty"]) < 0 or float(vals["spin_penalty"]) < 0:
            raise ConfigError("number_penalty and spin_penalty must be non-negative")
        return RunConfig(
            hamiltonian=HamiltonianSource.parse(vals["hamiltonian"]),
            grid=None if vals["grid"] is None else GridConfig.parse(vals["grid"]),
            active_space=active,
            mu=float(vals["mu"]),
            number_penalty=float(vals["number_penalty"]),
            spin_penalty=float(vals["spin_penalty"]),
            ansatz=AnsatzConfig.parse(vals["ansatz"] or {}),
            optimizer=OptimizerConfig.parse(vals["optimizer"] or {}),
            measurement=MeasurementConfig.parse(vals["measurement"] or {}),
            noise=NoiseConfig.parse(vals["noise"] or {}),
            embedding=embedding,
            min_converged_fraction=frac,
            out_dir=str(vals["out_dir"]))

    def to_json_dict(self) -> dict:
        return {
            "hamiltonian": self.hamiltonian.to_json_dict(),
            "grid": None if self.grid is None else self.grid.to_json_dict(),
            "active_space": None if self.active_space is None
            else list(self.active_space),
            "mu": self.mu,
            "number_penalty": self.number_penalty,
            "spin_penalty": self.spin_penalty,
            "ansatz": self.ansatz.to_json_dict(),
            "optimizer": self.optimizer.to_json_dict(),
            "measurement": self.measurement.to_json_dict(),
            "noise": self.noise.to_json_dict(),
            "embedding": self.embedding,
            "min_converged_fraction": self.min_converged_fraction,
            "out_dir": self.out_dir,
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    return RunConfig.parse(data)
