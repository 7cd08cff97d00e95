"""Agent checkpoints as ``.npz`` archives.

Layout (format version 1):

``format_version``  int scalar, currently 1
``config_hash``     unicode scalar, :meth:`ExperimentConfig.digest` of the run
``agent_kind``      unicode scalar, one of ``ql``, ``dqn-greedy``, ``dqn-softmax``, ``ddpg``
``<net>/W<k>``      float64 weight of layer ``k``, shape ``(fan_in, fan_out)``
``<net>/b<k>``      float64 bias of layer ``k``
``qtable/keys``     int64 ``(n, 3)`` rows of (cell_x, cell_y, radius_level), tabular agent only
``qtable/values``   float64 ``(n, n_actions)``, aligned with ``qtable/keys``

``<net>`` is ``online``/``target`` for DQN and ``actor``, ``actor_target``,
``critic``, ``critic_target`` for DDPG.
"""

from __future__ import annotations

import numpy as np

FORMAT_VERSION = 1


def checkpoint_arrays(agent, kind: str, config_hash: str) -> dict[str, np.ndarray]:
    arrays = {"format_version": np.array(FORMAT_VERSION), "config_hash": np.array(config_hash),
              "agent_kind": np.array(kind)}
    if hasattr(agent, "networks"):
        for name, net in agent.networks().items():
            for k, (W, b) in enumerate(zip(net.W, net.b)):
                arrays[f"{name}/W{k}"] = W
                arrays[f"{name}/b{k}"] = b
    else:
        keys = sorted(agent.table.values)
        arrays["qtable/keys"] = np.array(keys, dtype=np.int64).reshape(-1, 3)
        arrays["qtable/values"] = np.array([agent.table.values[k] for k in keys]).reshape(
            -1, agent.table.n_actions)
    return arrays


def save_checkpoint(path, agent, kind: str, config_hash: str) -> None:
    np.savez(path, **checkpoint_arrays(agent, kind, config_hash))


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with np.load(path) as data:
        out = {k: data[k] for k in data.files}
    if int(out["format_version"]) != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {int(out['format_version'])}")
    return out


def restore(agent, arrays) -> None:
    """Load weights or table entries from ``arrays`` into an agent built with the same config."""
    if hasattr(agent, "networks"):
        for name, net in agent.networks().items():
            for k in range(len(net.W)):
                net.W[k][...] = arrays[f"{name}/W{k}"]
                net.b[k][...] = arrays[f"{name}/b{k}"]
    else:
        agent.table.values.clear()
        for key, row in zip(arrays["qtable/keys"], arrays["qtable/values"]):
            agent.table.values[tuple(int(v) for v in key)] = row.copy()
