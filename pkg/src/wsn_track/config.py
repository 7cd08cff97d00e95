"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` and blank lines are ignored. Lists are comma
separated. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import get_args, get_origin, get_type_hints

from .agents import AGENT_KINDS

# where and how fast a run executes, never what it computes
EXECUTION_KEYS = ("out_dir", "workers")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # world
    field_width: float = 360.0
    field_height: float = 600.0
    grid_spacing: float = 24.0
    init_speed: float = 7.84
    process_noise: float = 0.03
    meas_noise: float = 400.0
    speed_bound: float = 30.0
    max_steps: int = 500
    # radio and power
    bandwidth_hz: float = 1e6
    bits_per_task: float = 2e4
    noise_dbm: float = -110.0
    rho0: float = 1e-3
    p_tx_w: float = 0.1
    p_rx_w: float = 0.1
    p_work_w: float = 5.0
    p_idle_w: float = 0.05
    # learning
    gamma: float = 0.9
    replay_capacity: int = 2000
    batch_size: int = 30
    target_sync_steps: int = 500
    eps_start: float = 0.9
    eps_min: float = 0.01
    eps_decay: float = 0.001
    literal_epsilon: bool = False
    soft_update: float = 0.01
    weight_scale: float = 0.5
    hidden: list[int] = field(default_factory=lambda: [64, 64])
    lr_dqn: float = 1e-3
    lr_actor: float = 1e-4
    lr_critic: float = 1e-3
    ddpg_noise: float = 0.2
    ddpg_noise_decay: float = 0.999
    ql_alpha: float = 0.1
    ql_cell_m: float = 30.0
    # experiment
    agent: str = "dqn-greedy"
    agents: list[str] = field(default_factory=lambda: list(AGENT_KINDS))
    rs_list: list[float] = field(default_factory=lambda: [40.0, 60.0, 80.0, 100.0])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    episodes: int = 1800
    final_window: int = 100
    smoothing_window: int = 50
    workers: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = ["field_width", "field_height", "grid_spacing", "init_speed", "meas_noise",
                    "speed_bound", "max_steps", "bandwidth_hz", "bits_per_task", "rho0", "p_tx_w",
                    "p_work_w", "replay_capacity", "batch_size", "target_sync_steps", "soft_update",
                    "weight_scale", "lr_dqn", "lr_actor", "lr_critic", "ql_alpha", "ql_cell_m",
                    "episodes", "final_window", "smoothing_window", "workers"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("process_noise", "p_rx_w", "p_idle_w", "ddpg_noise", "eps_decay"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not self.p_work_w > self.p_idle_w:
            raise ConfigError("p_work_w must exceed p_idle_w")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1)")
        if not 0.0 <= self.eps_min <= self.eps_start <= 1.0:
            raise ConfigError("need 0 <= eps_min <= eps_start <= 1")
        if not 0.0 < self.soft_update <= 1.0 or not 0.0 < self.ddpg_noise_decay <= 1.0:
            raise ConfigError("soft_update and ddpg_noise_decay must lie in (0, 1]")
        if self.batch_size > self.replay_capacity:
            raise ConfigError("batch_size exceeds replay_capacity")
        if len(self.hidden) != 2 or min(self.hidden) < 1:
            raise ConfigError("hidden must list two positive layer widths")
        if not self.rs_list or min(self.rs_list) <= 0:
            raise ConfigError("rs_list needs at least one positive radius")
        if not self.seeds or min(self.seeds) < 0:
            raise ConfigError("seeds must be non-negative integers")
        for kind in [self.agent, *self.agents]:
            if kind not in AGENT_KINDS:
                raise ConfigError(f"unknown agent {kind!r}; choose from {', '.join(AGENT_KINDS)}")

    def items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def dumps(self, results_only: bool = False) -> str:
        """Config file text; ``results_only`` drops settings that cannot change any result."""
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.items() if not (results_only and k in EXECUTION_KEYS))

    def digest(self) -> str:
        """Hash of every setting except the output directory and worker count."""
        text = "".join(f"{k}={_fmt(v)}\n" for k, v in self.items() if k not in EXECUTION_KEYS)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_scalar(text: str, kind: type, key: str):
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind.__name__}") from None


def _kind(tp):
    if get_origin(tp) is list:
        return list, get_args(tp)[0]
    return tp


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    types = {name: _kind(tp) for name, tp in get_type_hints(ExperimentConfig).items()}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = types[key]
        if isinstance(kind, tuple):
            values[key] = [_parse_scalar(x.strip(), kind[1], key) for x in val.split(",") if x.strip()]
        else:
            values[key] = _parse_scalar(val, kind, key)
    base = base or ExperimentConfig()
    try:
        return dataclasses.replace(base, **values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
