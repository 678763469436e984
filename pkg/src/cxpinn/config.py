"""Experiment configuration: TOML files, presets and validation.

A config file has top-level run settings and the sections ``[problem]``,
``[points]``, ``[weights]``, ``[init]`` and one ``[[phases]]`` table per
optimizer phase. Every field has a default; :meth:`TrainConfig.to_dict`
returns the fully resolved form that is echoed into ``report.json``.
For the heat problem the time coordinate is the last network input.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .activation import D_FLOOR
from .network import ActivationKind, InitConfig
from .problems import PROBLEMS, LossWeights, get_problem

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

OPTIMIZERS = ("adam", "lbfgs")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class PhaseConfig:
    optimizer: str = "adam"
    iterations: int = 1000
    lr: float = 1e-3
    decay_rate: float = 1.0
    decay_step: int = 1000
    lr_floor: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    history_size: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    max_ls: int = 25
    tol_grad: float = 1e-10


@dataclass
class PointsConfig:
    n_interior: int = 10_000
    n_boundary: int = 0
    n_initial: int = 0
    n_test: int = 90_000
    test_grid: int = 300


@dataclass
class TrainConfig:
    name: str = "custom"
    problem: str = "helmholtz2d"
    problem_params: dict = field(default_factory=dict)
    width: int = 100
    activation: str = "cauchy"
    seed: int = 0
    trials: int = 1
    points: PointsConfig = field(default_factory=PointsConfig)
    weights: LossWeights | None = None  # None: the problem's defaults
    init: InitConfig = field(default_factory=InitConfig)
    phases: list[PhaseConfig] = field(default_factory=lambda: [PhaseConfig()])
    metric_every: int = 100
    out_dir: str = "runs/out"
    deterministic: bool = True
    threads: int = 1
    engine: str = "numba"
    d_floor: float = D_FLOOR

    # ---- construction ---------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = copy.deepcopy(data)
        kw = {}
        prob = data.pop("problem", {})
        if isinstance(prob, str):
            prob = {"name": prob}
        if "name" in prob:
            kw["problem"] = prob.pop("name")
        kw["problem_params"] = prob
        kw["points"] = _build(PointsConfig, data.pop("points", {}), "points")
        if "weights" in data:
            kw["weights"] = _build(LossWeights, data.pop("weights"), "weights")
        kw["init"] = _build(InitConfig, data.pop("init", {}), "init")
        if "phases" in data:
            kw["phases"] = [_build(PhaseConfig, p, f"phases[{i}]") for i, p in enumerate(data.pop("phases"))]
        scalars = {f.name for f in fields(cls)} - {"problem", "problem_params", "points", "weights", "init", "phases"}
        unknown = set(data) - scalars
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        kw.update(data)
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        """Resolved configuration, including the problem's default weights."""
        out = asdict(self)
        out["problem"] = {"name": self.problem, **self.problem_params}
        del out["problem_params"]
        out["weights"] = asdict(self.resolved_weights())
        out["init"] = {"cauchy_init": self.init.cauchy_init, **self.init.resolved()}
        return out

    def replace(self, **changes) -> "TrainConfig":
        new = copy.deepcopy(self)
        for k, v in changes.items():
            setattr(new, k, v)
        return new

    # ---- derived --------------------------------------------------------

    def build_problem(self):
        params = dict(self.problem_params)
        if self.weights is not None:
            params["weights"] = self.weights
        try:
            return get_problem(self.problem, **params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for problem {self.problem!r}: {exc}") from None

    def resolved_weights(self) -> LossWeights:
        return self.weights if self.weights is not None else self.build_problem().weights

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if not self.phases:
            raise ConfigError("at least one training phase is required")
        for i, ph in enumerate(self.phases):
            if ph.optimizer not in OPTIMIZERS:
                raise ConfigError(f"phases[{i}]: optimizer must be one of {OPTIMIZERS}")
            if int(ph.iterations) < 1:
                raise ConfigError(f"phases[{i}]: iterations must be positive")
            if not ph.lr > 0 or ph.decay_step < 1 or not 0 < ph.decay_rate <= 1:
                raise ConfigError(f"phases[{i}]: need lr > 0, decay_step >= 1, 0 < decay_rate <= 1")
        if self.width < 1 or self.trials < 1 or self.metric_every < 1 or self.threads < 1:
            raise ConfigError("width, trials, metric_every and threads must be positive")
        if self.points.n_interior < 1:
            raise ConfigError("points.n_interior must be positive")
        try:
            ActivationKind(self.activation)
        except ValueError:
            raise ConfigError(f"unknown activation {self.activation!r}") from None
        if self.engine not in ("numba", "numpy"):
            raise ConfigError("engine must be 'numba' or 'numpy'")
        if not self.d_floor > 0:
            raise ConfigError("d_floor must be positive")
        problem = self.build_problem()
        if problem.soft_boundary and self.points.n_boundary < 1:
            raise ConfigError(f"{problem.name} has soft boundary conditions; set points.n_boundary")
        if problem.soft_initial and self.points.n_initial < 1:
            raise ConfigError(f"{problem.name} has a soft initial condition; set points.n_initial")


def _build(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"[{section}]: unknown keys {sorted(unknown)}")
    return cls(**data)


def list_presets() -> list[str]:
    root = resources.files("cxpinn") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_config(source: str | Path) -> TrainConfig:
    """Load a TOML file, or a shipped preset by name."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    else:
        res = resources.files("cxpinn") / "presets" / f"{source}.toml"
        if not res.is_file():
            raise ConfigError(f"no config file or preset named {str(source)!r}; presets: {', '.join(list_presets())}")
        text = res.read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    try:
        return TrainConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
