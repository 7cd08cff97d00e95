"""Training runs, r_s sweeps, and their CSV records."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comms
from .agents import DdpgAgent, DdpgConfig, DqnAgent, DqnConfig, QlAgent, QlConfig
from .config import ExperimentConfig
from .env import N_FEATURES, EnvConfig, TrackingEnv

log = logging.getLogger(__name__)

STREAM_NAMES = ("vehicle", "measurement", "fusion", "exploration", "init", "replay")
EPISODE_COLUMNS = ("episode", "steps", "avg_reward", "avg_energy_J", "avg_sint_m2", "eps_or_noise", "wall_ms")
SUMMARY_COLUMNS = ("rs_m", "agent", "seed", "final_avg_reward", "final_avg_energy_J",
                   "final_avg_sint_m2", "episodes")
DIAGNOSTIC_COLUMNS = ("rs_m", "agent", "seed", "status", "reward_min", "reward_max",
                      "clamp_warnings", "softmax_sum_err", "wall_s")


class RunAbort(RuntimeError):
    """A training run stopped early; ``episode`` is the index that failed."""

    def __init__(self, msg: str, episode: int):
        super().__init__(msg)
        self.episode = episode


def make_streams(seed: int, r_s: float) -> dict[str, np.random.Generator]:
    """Independent generators for every stochastic source of one (seed, r_s) cell.

    ``SeedSequence([seed, round(1000 * r_s)])`` is split with ``spawn`` into one
    child per name in :data:`STREAM_NAMES`, in that order. The agent kind is not
    part of the key, so all agents of a cell see the same vehicle entry.
    """
    root = np.random.SeedSequence([int(seed), int(round(1000 * r_s))])
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, root.spawn(len(STREAM_NAMES)))}


def env_config(cfg: ExperimentConfig, r_s: float) -> EnvConfig:
    return EnvConfig(
        r_s=float(r_s), width=cfg.field_width, height=cfg.field_height, spacing=cfg.grid_spacing,
        init_speed=cfg.init_speed, process_noise=cfg.process_noise, meas_noise=cfg.meas_noise,
        speed_bound=cfg.speed_bound, max_steps=cfg.max_steps,
        channel=comms.ChannelParams(cfg.rho0, cfg.bandwidth_hz, cfg.bits_per_task, cfg.p_tx_w,
                                    comms.dbm_to_watts(cfg.noise_dbm)),
        power=comms.PowerParams(cfg.p_tx_w, cfg.p_rx_w, cfg.p_work_w, cfg.p_idle_w))


def build(cfg: ExperimentConfig, kind: str, r_s: float, streams):
    """Environment and agent for one training run."""
    env = TrackingEnv(env_config(cfg, r_s), "continuous" if kind == "ddpg" else "discrete")
    hidden = tuple(cfg.hidden)
    if kind == "ql":
        agent = QlAgent(cfg.field_width, cfg.field_height,
                        QlConfig(cfg.ql_alpha, cfg.gamma, cfg.ql_cell_m, cfg.eps_start, cfg.eps_min,
                                 cfg.eps_decay, cfg.literal_epsilon), streams)
    elif kind in ("dqn-greedy", "dqn-softmax"):
        agent = DqnAgent(N_FEATURES, env.spec.n,
                         DqnConfig(cfg.gamma, cfg.batch_size, cfg.target_sync_steps, cfg.replay_capacity,
                                   cfg.eps_start, cfg.eps_min, cfg.eps_decay, cfg.lr_dqn,
                                   kind.split("-")[1], cfg.literal_epsilon, hidden, cfg.weight_scale),
                         streams)
    elif kind == "ddpg":
        lo, hi = env.spec.continuous_range
        agent = DdpgAgent(N_FEATURES, lo, hi,
                          DdpgConfig(cfg.gamma, cfg.soft_update, cfg.lr_actor, cfg.lr_critic, cfg.batch_size,
                                     cfg.replay_capacity, cfg.ddpg_noise, cfg.ddpg_noise_decay, hidden,
                                     cfg.weight_scale),
                          streams)
    else:
        raise ValueError(f"unknown agent {kind!r}")
    return env, agent


def run_episode(env: TrackingEnv, agent, streams):
    obs = env.reset(streams)
    while True:
        tr, _ = env.step(agent.act(obs))
        agent.observe(tr)
        obs = tr.s_next
        if tr.done:
            return env.log


@dataclass
class RunRecord:
    agent: str
    r_s: float
    seed: int
    rows: list[tuple] = field(default_factory=list)
    reward_min: float = math.inf
    reward_max: float = -math.inf
    clamp_warnings: int = 0
    softmax_sum_err: float = 0.0
    wall_s: float = 0.0
    window: int = 100

    def final(self, column: str) -> float:
        k = EPISODE_COLUMNS.index(column)
        tail = self.rows[-self.window:]
        return math.fsum(r[k] for r in tail) / len(tail)

    def summary_row(self) -> tuple:
        return (self.r_s, self.agent, self.seed, self.final("avg_reward"), self.final("avg_energy_J"),
                self.final("avg_sint_m2"), len(self.rows))


def _num(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_header(fh, cfg: ExperimentConfig, extra: dict | None = None) -> None:
    """Echo the run settings as ``# key = value`` lines.

    The output directory and worker count are left out, so identical runs
    produce identical files wherever and however they execute.
    """
    for k, v in (extra or {}).items():
        fh.write(f"# {k} = {v}\n")
    fh.write(f"# config_hash = {cfg.digest()}\n")
    for line in cfg.dumps(results_only=True).splitlines():
        fh.write(f"# {line}\n")


def read_csv(path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Rows of an emitted CSV plus the ``# key = value`` header block."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k.strip()] = v.strip()
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))


def episode_csv_name(kind: str, r_s: float, seed: int) -> str:
    return f"{kind}_rs{r_s:g}_seed{seed}.csv"


def run_training(cfg: ExperimentConfig, kind: str, r_s: float, seed: int, out_csv=None) -> RunRecord:
    """Train one agent for ``cfg.episodes`` episodes, appending one CSV row per episode.

    ``wall_ms`` holds the simulated duration of the episode (sum of slot
    lengths) so the file is reproducible; compute time is kept on the record.
    """
    streams = make_streams(seed, r_s)
    env, agent = build(cfg, kind, r_s, streams)
    rec = RunRecord(kind, float(r_s), int(seed), window=cfg.final_window)
    fh = None
    if out_csv is not None:
        Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
        fh = open(out_csv, "w", newline="")
        write_header(fh, cfg.replace(agent=kind), {"rs_m": f"{r_s:g}", "seed": seed})
        fh.write(",".join(EPISODE_COLUMNS) + "\n")
    t0 = time.perf_counter()
    try:
        for ep in range(cfg.episodes):
            exploration = agent.exploration
            try:
                ep_log = run_episode(env, agent, streams)
            except Exception as exc:
                if fh:
                    fh.write(f"# aborted at episode {ep}: {type(exc).__name__}: {exc}\n")
                raise RunAbort(f"{kind} r_s={r_s:g} seed={seed} failed in episode {ep}: {exc}", ep) from exc
            agent.end_episode()
            rewards = ep_log.column("reward")
            rec.reward_min = min(rec.reward_min, float(rewards.min()))
            rec.reward_max = max(rec.reward_max, float(rewards.max()))
            row = (ep, ep_log.T, ep_log.average_reward(), ep_log.average_energy(), ep_log.average_sint(),
                   exploration, 1000.0 * ep_log.elapsed())
            rec.rows.append(row)
            if fh:
                fh.write(",".join(_num(v) for v in row) + "\n")
                fh.flush()
    finally:
        if fh:
            fh.close()
        rec.clamp_warnings = env.clamp_warnings
        softmax = getattr(agent, "softmax", None)
        rec.softmax_sum_err = softmax.max_sum_error if softmax is not None else 0.0
        rec.wall_s = time.perf_counter() - t0
    rec.agent_obj = agent
    return rec


def _cell(args):
    cfg, kind, r_s, seed, out_dir = args
    path = Path(out_dir) / "episodes" / episode_csv_name(kind, r_s, seed)
    try:
        rec = run_training(cfg, kind, r_s, seed, path)
    except RunAbort as exc:
        log.error("%s", exc)
        return (r_s, kind, seed), None, str(exc)
    rec.agent_obj = None
    return (r_s, kind, seed), rec, None


def sweep_cells(cfg: ExperimentConfig):
    return [(float(r_s), kind, int(seed)) for r_s in cfg.rs_list for kind in cfg.agents for seed in cfg.seeds]


def run_sweep(cfg: ExperimentConfig, out_dir, progress=None) -> list[tuple]:
    """Train every (r_s, agent, seed) cell and write ``summary.csv`` and ``diagnostics.csv``.

    A failing cell is logged and reported with NaN aggregates; the sweep goes on.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, kind, r_s, seed, out_dir) for r_s, kind, seed in sweep_cells(cfg)]
    results = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            for key, rec, err in pool.map(_cell, jobs):
                results[key] = (rec, err)
                if progress:
                    progress(key, rec, err)
    else:
        for job in jobs:
            key, rec, err = _cell(job)
            results[key] = (rec, err)
            if progress:
                progress(key, rec, err)

    summary, diagnostics = [], []
    nan = float("nan")
    for key in sweep_cells(cfg):
        rec, err = results[key]
        r_s, kind, seed = key
        if rec is None:
            summary.append((r_s, kind, seed, nan, nan, nan, 0))
            diagnostics.append((r_s, kind, seed, "failed", nan, nan, 0, nan, nan))
        else:
            summary.append(rec.summary_row())
            diagnostics.append((r_s, kind, seed, "ok", rec.reward_min, rec.reward_max, rec.clamp_warnings,
                                rec.softmax_sum_err, rec.wall_s))
    write_table(out_dir / "summary.csv", SUMMARY_COLUMNS, summary, cfg)
    write_table(out_dir / "diagnostics.csv", DIAGNOSTIC_COLUMNS, diagnostics, cfg)
    return summary


def write_table(path, columns, rows, cfg: ExperimentConfig) -> None:
    with open(path, "w", newline="") as fh:
        write_header(fh, cfg)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")


def summarize_episode_files(summary_rows, episodes_dir, window: int) -> list[tuple]:
    """Recompute summary rows from the per-episode CSVs (used to cross-check a sweep)."""
    out = []
    for r_s, kind, seed, *_ in summary_rows:
        _, rows = read_csv(Path(episodes_dir) / episode_csv_name(kind, float(r_s), int(seed)))
        tail = rows[-window:]
        means = [math.fsum(float(r[c]) for r in tail) / len(tail)
                 for c in ("avg_reward", "avg_energy_J", "avg_sint_m2")]
        out.append((float(r_s), kind, int(seed), *means, len(rows)))
    return out
