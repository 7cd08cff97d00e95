"""Action-selection rules: epsilon-greedy with per-episode decay, and reward softmax."""

from __future__ import annotations

import math

import numpy as np


def epsilon_greedy_select(qvalues, eps: float, rng: np.random.Generator, literal: bool = False) -> int:
    """Greedy w.r.t. ``qvalues`` except with probability ``eps``, where a uniform action is drawn.

    ``literal=True`` swaps the roles (exploit when the uniform draw is below ``eps``).
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"epsilon out of range: {eps}")
    explore = rng.random() < eps
    if literal:
        explore = not explore
    if explore:
        return int(rng.integers(len(qvalues)))
    return int(np.argmax(qvalues))


class EpsilonSchedule:
    """Linear decay ``eps <- max(eps_min, eps - step)`` applied once per episode."""

    def __init__(self, start: float = 0.9, floor: float = 0.01, step: float = 0.001):
        if not 0.0 <= floor <= start <= 1.0:
            raise ValueError("need 0 <= floor <= start <= 1")
        self.value = start
        self.floor = floor
        self.step = step

    def end_episode(self) -> float:
        self.value = max(self.floor, self.value - self.step)
        return self.value


def softmax_probs(mean_rewards) -> np.ndarray:
    m = np.asarray(mean_rewards, dtype=float)
    w = np.exp(m - m.max())
    return w / w.sum()


class RewardSoftmax:
    """Running per-action mean rewards over a whole training run; unseen actions count as 0."""

    def __init__(self, n_actions: int):
        self.sums = np.zeros(n_actions)
        self.counts = np.zeros(n_actions, dtype=np.int64)
        self.t = 0
        self.max_sum_error = 0.0

    @property
    def means(self) -> np.ndarray:
        return np.divide(self.sums, self.counts, out=np.zeros_like(self.sums), where=self.counts > 0)

    def select(self, rng: np.random.Generator) -> int:
        a, p = softmax_select(self.means, max(self.t, 1), rng)
        self.max_sum_error = max(self.max_sum_error, abs(math.fsum(p) - 1.0))
        return a

    def record(self, action: int, reward: float) -> None:
        self.sums[action] += reward
        self.counts[action] += 1
        self.t += 1


def softmax_select(mean_rewards, t: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Sample an action with probability proportional to ``exp(mean reward)``.

    Returns the action and the probability vector it was drawn from.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    p = softmax_probs(mean_rewards)
    a = int(np.searchsorted(np.cumsum(p), rng.random() * p.sum(), side="right"))
    return min(a, len(p) - 1), p
