"""Energy-aware vehicle tracking in a wireless sensor network with RL-chosen activation radii."""

__version__ = "0.1.0"
