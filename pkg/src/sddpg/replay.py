"""Fixed-capacity FIFO replay memory with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool
    cause: str | None = None

    @property
    def terminal(self) -> bool:
        """True when the next state has no future value (goal or collision)."""
        return self.cause in ("goal", "collision")


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    def __len__(self):
        return len(self.rewards)


class ReplayBuffer:
    """Ring buffer; once full, each push overwrites the oldest transition."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int = 2):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.terminals = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.head = 0

    def __len__(self):
        return self.size

    def push(self, tr: Transition) -> None:
        i = self.head
        self.states[i] = tr.state
        self.actions[i] = tr.action
        self.rewards[i] = tr.reward
        self.next_states[i] = tr.next_state
        self.terminals[i] = tr.terminal
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator) -> Batch:
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=n)
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx],
                     self.next_states[idx], self.terminals[idx])

    def oldest_index(self) -> int:
        return self.head if self.size == self.capacity else 0

    def state_dict(self) -> dict:
        return {"states": self.states, "actions": self.actions, "rewards": self.rewards,
                "next_states": self.next_states, "terminals": self.terminals,
                "size": np.array(self.size), "head": np.array(self.head)}

    def load_state_dict(self, d) -> None:
        for key in ("states", "actions", "rewards", "next_states", "terminals"):
            getattr(self, key)[...] = d[key]
        self.size = int(d["size"])
        self.head = int(d["head"])
