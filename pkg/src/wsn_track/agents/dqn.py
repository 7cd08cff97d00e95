from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .nn import Mlp
from .policies import EpsilonSchedule, RewardSoftmax, epsilon_greedy_select
from .replay import ReplayMemory, replay_push

log = logging.getLogger(__name__)


class TrainingAbort(RuntimeError):
    """A loss or weight became non-finite."""


@dataclass
class DqnConfig:
    gamma: float = 0.9
    batch_size: int = 30
    target_sync: int = 500
    capacity: int = 2000
    eps_start: float = 0.9
    eps_min: float = 0.01
    eps_decay: float = 0.001
    lr: float = 1e-3
    policy: str = "greedy"
    literal_epsilon: bool = False
    hidden: tuple[int, ...] = (64, 64)
    weight_scale: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.batch_size > self.capacity:
            raise ValueError("batch larger than replay capacity")
        if self.policy not in ("greedy", "softmax"):
            raise ValueError(f"unknown policy {self.policy!r}")


def dqn_targets(r, q_next_target, terminal, gamma: float) -> np.ndarray:
    """``r + gamma * max_a' Q_target(s', a')``, without the bootstrap on terminal rows."""
    return r + gamma * np.where(terminal, 0.0, q_next_target.max(axis=1))


def dqn_loss_and_grad(net: Mlp, s, a, y):
    """Mean squared TD loss over the batch and its parameter gradients."""
    q, cache = net.forward(s)
    rows = np.arange(len(a))
    cols = a.astype(np.int64)
    err = q[rows, cols] - y
    g = np.zeros_like(q)
    g[rows, cols] = 2.0 * err / len(a)
    grads, _ = net.backward(cache, g)
    return float(np.mean(err * err)), grads


def dqn_train_step(online: Mlp, target: Mlp, batch, cfg: DqnConfig) -> float:
    s, a, r, s_next, terminal = batch
    y = dqn_targets(r, target(s_next), terminal, cfg.gamma)
    loss, grads = dqn_loss_and_grad(online, s, a, y)
    if not np.isfinite(loss):
        raise TrainingAbort(f"non-finite DQN loss {loss}")
    online.sgd(grads, cfg.lr)
    return loss


class DqnAgent:
    """DQN over the discrete radius levels with replay and a periodically synced target net."""

    kind = "dqn"

    def __init__(self, n_features: int, n_actions: int, cfg: DqnConfig, streams):
        self.cfg = cfg
        self.rng = streams["exploration"]
        self.replay_rng = streams["replay"]
        self.online = Mlp((n_features, *cfg.hidden, n_actions), streams["init"], cfg.weight_scale)
        self.target = self.online.clone()
        self.memory = ReplayMemory(cfg.capacity, n_features)
        self.eps = EpsilonSchedule(cfg.eps_start, cfg.eps_min, cfg.eps_decay)
        self.softmax = RewardSoftmax(n_actions) if cfg.policy == "softmax" else None
        self.steps = 0
        self.losses: list[float] = []

    @property
    def exploration(self) -> float:
        return float("nan") if self.softmax else self.eps.value

    def act(self, obs) -> int:
        if self.softmax is not None:
            return self.softmax.select(self.rng)
        return epsilon_greedy_select(self.online(obs)[0], self.eps.value, self.rng,
                                     self.cfg.literal_epsilon)

    def observe(self, tr) -> None:
        if self.softmax is not None:
            self.softmax.record(int(tr.a), tr.r)
        replay_push(self.memory, tr)
        self.steps += 1
        if self.memory.full:
            batch = self.memory.sample(self.cfg.batch_size, self.replay_rng)
            self.losses.append(dqn_train_step(self.online, self.target, batch, self.cfg))
        if self.steps % self.cfg.target_sync == 0:
            self.target.copy_from(self.online)

    def end_episode(self) -> None:
        self.eps.end_episode()

    def networks(self) -> dict[str, Mlp]:
        return {"online": self.online, "target": self.target}
