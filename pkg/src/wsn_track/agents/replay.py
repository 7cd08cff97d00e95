from __future__ import annotations

import numpy as np


class ReplayMemory:
    """Fixed-capacity ring of ``(s, a, r, s_next, terminal)`` rows."""

    def __init__(self, capacity: int, state_dim: int):
        self.capacity = int(capacity)
        self.s = np.zeros((capacity, state_dim))
        self.s_next = np.zeros((capacity, state_dim))
        self.a = np.zeros(capacity)
        self.r = np.zeros(capacity)
        self.terminal = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.head = 0

    def __len__(self) -> int:
        return self.size

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def push(self, s, a, r, s_next, terminal) -> None:
        i = self.head
        self.s[i], self.a[i], self.r[i], self.s_next[i], self.terminal[i] = s, a, r, s_next, terminal
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, k: int, rng: np.random.Generator):
        """``k`` distinct rows chosen uniformly. Only legal once the memory is full."""
        if not self.full:
            raise RuntimeError("replay memory sampled before it filled up")
        idx = rng.choice(self.capacity, size=k, replace=False)
        return self.s[idx], self.a[idx], self.r[idx], self.s_next[idx], self.terminal[idx]

    def oldest(self) -> int:
        """Ring index of the oldest stored row."""
        return self.head if self.full else 0


def replay_push(memory: ReplayMemory, transition) -> None:
    memory.push(transition.s, transition.a, transition.r, transition.s_next,
                transition.done and not transition.truncated)


def replay_sample(memory: ReplayMemory, k: int, rng: np.random.Generator):
    return memory.sample(k, rng)
