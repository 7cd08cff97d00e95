"""Learning agents: tabular Q-learning, DQN (epsilon-greedy or softmax), and DDPG."""

from .ddpg import DdpgAgent, DdpgConfig
from .dqn import DqnAgent, DqnConfig, TrainingAbort
from .nn import Mlp
from .qlearning import QlAgent, QlConfig, QTable

AGENT_KINDS = ("ql", "dqn-greedy", "dqn-softmax", "ddpg")

__all__ = ["AGENT_KINDS", "DdpgAgent", "DdpgConfig", "DqnAgent", "DqnConfig", "Mlp",
           "QTable", "QlAgent", "QlConfig", "TrainingAbort"]
