from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..env import RADIUS_LEVELS
from .policies import EpsilonSchedule, epsilon_greedy_select


@dataclass
class QlConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    cell: float = 30.0
    eps_start: float = 0.9
    eps_min: float = 0.01
    eps_decay: float = 0.001
    literal_epsilon: bool = False


class QTable:
    """Q-values keyed by a hashable discrete state; unseen states read as zeros."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.values: dict = defaultdict(lambda: np.zeros(n_actions))

    def __getitem__(self, state) -> np.ndarray:
        return self.values[state]

    def __len__(self) -> int:
        return len(self.values)

    def bound(self) -> float:
        return max((float(np.abs(v).max()) for v in self.values.values()), default=0.0)


def ql_update(table: QTable, s, a: int, r: float, s_next, terminal: bool,
              alpha: float, gamma: float) -> float:
    """One tabular Q-learning backup; returns the TD error."""
    if not 0 <= a < table.n_actions:
        raise IndexError(f"action {a} out of range")
    target = r if terminal else r + gamma * float(table[s_next].max())
    row = table[s]
    td = target - row[a]
    row[a] += alpha * td
    return td


class QlAgent:
    """Tabular baseline on (30 m cell of the estimated position, current radius level)."""

    kind = "ql"

    def __init__(self, width: float, height: float, cfg: QlConfig, streams, n_actions: int = len(RADIUS_LEVELS)):
        self.cfg = cfg
        self.width, self.height = width, height
        self.rng = streams["exploration"]
        self.table = QTable(n_actions)
        self.eps = EpsilonSchedule(cfg.eps_start, cfg.eps_min, cfg.eps_decay)
        self._levels = np.array(RADIUS_LEVELS)

    @property
    def exploration(self) -> float:
        return self.eps.value

    def discretize(self, obs) -> tuple[int, int, int]:
        # features 4 and 6 hold the normalized posterior position, 8 holds r_a / r_s
        x = 0.5 * (obs[4] + 1.0) * self.width
        y = 0.5 * (obs[6] + 1.0) * self.height
        level = int(np.argmin(np.abs(self._levels - obs[8])))
        return math.floor(x / self.cfg.cell), math.floor(y / self.cfg.cell), level

    def act(self, obs) -> int:
        return epsilon_greedy_select(self.table[self.discretize(obs)], self.eps.value, self.rng,
                                     self.cfg.literal_epsilon)

    def observe(self, tr) -> None:
        ql_update(self.table, self.discretize(tr.s), int(tr.a), tr.r, self.discretize(tr.s_next),
                  tr.done and not tr.truncated, self.cfg.alpha, self.cfg.gamma)

    def end_episode(self) -> None:
        self.eps.end_episode()
