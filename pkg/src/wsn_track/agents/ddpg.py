from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dqn import TrainingAbort
from .nn import Mlp
from .replay import ReplayMemory


@dataclass
class DdpgConfig:
    gamma: float = 0.9
    tau_soft: float = 0.01
    lr_actor: float = 1e-4
    lr_critic: float = 1e-3
    batch_size: int = 30
    capacity: int = 2000
    noise_scale: float = 0.2  # fraction of r_s
    noise_decay: float = 0.999  # per episode
    hidden: tuple[int, ...] = (64, 64)
    weight_scale: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.tau_soft <= 1.0:
            raise ValueError("soft-update rate must lie in (0, 1]")


def critic_loss_and_grad(critic: Mlp, s, a, y):
    """Mean squared TD error of ``Q(s, a)`` against fixed targets ``y``."""
    x = np.concatenate([s, np.reshape(a, (-1, 1))], axis=1)
    q, cache = critic.forward(x)
    err = q[:, 0] - y
    grads, _ = critic.backward(cache, (2.0 / len(y)) * err[:, None])
    return float(np.mean(err * err)), grads


def actor_objective_and_grad(actor: Mlp, critic: Mlp, s):
    """Mean critic value of the actor's squashed action, and its gradient w.r.t. the actor."""
    o, a_cache = actor.forward(s)
    a = np.tanh(o)
    q, c_cache = critic.forward(np.concatenate([s, a], axis=1))
    _, g_in = critic.backward(c_cache, np.full_like(q, 1.0 / len(s)))
    g_o = g_in[:, -1:] * (1.0 - a * a)
    grads, _ = actor.backward(a_cache, g_o)
    return float(q.mean()), grads


def ddpg_train_step(actor: Mlp, actor_t: Mlp, critic: Mlp, critic_t: Mlp, batch, cfg: DdpgConfig) -> float:
    s, a, r, s_next, terminal = batch
    a_next = np.tanh(actor_t(s_next))
    q_next = critic_t(np.concatenate([s_next, a_next], axis=1))[:, 0]
    y = r + cfg.gamma * np.where(terminal, 0.0, q_next)
    loss, c_grads = critic_loss_and_grad(critic, s, a, y)
    if not np.isfinite(loss):
        raise TrainingAbort(f"non-finite critic loss {loss}")
    critic.sgd(c_grads, cfg.lr_critic)
    _, a_grads = actor_objective_and_grad(actor, critic, s)
    actor.sgd(a_grads, -cfg.lr_actor)  # ascend Q
    critic_t.soft_update(critic, cfg.tau_soft)
    actor_t.soft_update(actor, cfg.tau_soft)
    return loss


class DdpgAgent:
    """Deterministic actor over a continuous radius in ``[r_lo, r_hi]``.

    The actor's tanh-squashed output ``u`` in ``(-1, 1)`` maps affinely onto the
    radius range; the critic sees ``u``, not meters.
    """

    kind = "ddpg"

    def __init__(self, n_features: int, r_lo: float, r_hi: float, cfg: DdpgConfig, streams):
        self.cfg = cfg
        self.r_lo, self.r_hi = r_lo, r_hi
        self.rng = streams["exploration"]
        self.replay_rng = streams["replay"]
        init = streams["init"]
        self.actor = Mlp((n_features, *cfg.hidden, 1), init, cfg.weight_scale)
        self.critic = Mlp((n_features + 1, *cfg.hidden, 1), init, cfg.weight_scale)
        self.actor_t = self.actor.clone()
        self.critic_t = self.critic.clone()
        self.memory = ReplayMemory(cfg.capacity, n_features)
        self.noise = cfg.noise_scale * r_hi
        self.losses: list[float] = []

    @property
    def exploration(self) -> float:
        return self.noise

    def to_radius(self, u):
        return self.r_lo + 0.5 * (np.asarray(u) + 1.0) * (self.r_hi - self.r_lo)

    def to_unit(self, radius):
        return 2.0 * (np.asarray(radius) - self.r_lo) / (self.r_hi - self.r_lo) - 1.0

    def act(self, obs) -> float:
        u = np.tanh(self.actor(obs)[0, 0])
        r = float(self.to_radius(u)) + self.noise * self.rng.standard_normal()
        return min(max(r, self.r_lo), self.r_hi)

    def observe(self, tr) -> None:
        self.memory.push(tr.s, float(self.to_unit(tr.a)), tr.r, tr.s_next, tr.done and not tr.truncated)
        if self.memory.full:
            batch = self.memory.sample(self.cfg.batch_size, self.replay_rng)
            self.losses.append(ddpg_train_step(self.actor, self.actor_t, self.critic, self.critic_t,
                                               batch, self.cfg))

    def end_episode(self) -> None:
        self.noise *= self.cfg.noise_decay

    def networks(self) -> dict[str, Mlp]:
        return {"actor": self.actor, "actor_target": self.actor_t,
                "critic": self.critic, "critic_target": self.critic_t}
