"""Ground truth: vehicle kinematics, the sensor grid, and noisy per-sensor measurements.

Vehicle states are plain ``(4,)`` float arrays ordered ``[x, vx, y, vy]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

FIELD_WIDTH = 360.0
FIELD_HEIGHT = 600.0
INIT_SPEED = 7.84  # m/s per axis, 40 km/h overall

H_MATRIX = np.array([[1.0, 0.0, 0.0, 0.0],
                     [0.0, 0.0, 1.0, 0.0]])


class SimulationFault(RuntimeError):
    """Raised when the simulated world reaches a non-finite state."""


def vehicle_state(x: float, vx: float, y: float, vy: float) -> np.ndarray:
    return np.array([x, vx, y, vy], dtype=float)


def in_field(state, width: float = FIELD_WIDTH, height: float = FIELD_HEIGHT) -> bool:
    return 0.0 <= state[0] <= width and 0.0 <= state[2] <= height


def psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix (works for singular covariances)."""
    cov = np.asarray(cov, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    if vals.min() < -1e-12 * max(1.0, abs(vals).max()):
        raise ValueError("covariance is not positive semi-definite")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def transition_matrices(tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Constant-velocity ``A`` (4x4) and acceleration-noise gain ``D`` (4x2) for slot length ``tau``."""
    A = np.array([[1.0, tau, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, tau],
                  [0.0, 0.0, 0.0, 1.0]])
    h = 0.5 * tau * tau
    D = np.array([[h, 0.0],
                  [tau, 0.0],
                  [0.0, h],
                  [0.0, tau]])
    return A, D


@dataclass
class MotionModel:
    """Linear motion model. ``tau`` is reassigned every slot."""

    Qw: np.ndarray = field(default_factory=lambda: 0.03 * np.eye(2))
    tau: float = 1.0

    def __post_init__(self):
        self.Qw = np.asarray(self.Qw, dtype=float)
        self._w_sqrt = psd_sqrt(self.Qw)

    @property
    def A(self) -> np.ndarray:
        return transition_matrices(self.tau)[0]

    @property
    def D(self) -> np.ndarray:
        return transition_matrices(self.tau)[1]

    def process_cov(self) -> np.ndarray:
        """4x4 process covariance D Qw D^T for the current slot length."""
        _, D = transition_matrices(self.tau)
        return D @ self.Qw @ D.T

    def noise_draw(self, rng: np.random.Generator) -> np.ndarray:
        return self._w_sqrt @ rng.standard_normal(2)


@njit(cache=True)
def _advance(x, tau, w):
    h = 0.5 * tau * tau
    return np.array([x[0] + tau * x[1] + h * w[0], x[1] + tau * w[0],
                     x[2] + tau * x[3] + h * w[1], x[3] + tau * w[1]])


def step_motion(state, model: MotionModel, rng: np.random.Generator) -> np.ndarray:
    """Advance the vehicle by one slot: ``A x + D w`` with ``w ~ N(0, Qw)``.

    Consumes exactly one 2-D Gaussian draw from ``rng``.
    """
    if not model.tau > 0:
        raise ValueError(f"slot duration must be positive, got {model.tau}")
    nxt = _advance(np.asarray(state, dtype=np.float64), float(model.tau), model.noise_draw(rng))
    if not (np.isfinite(nxt[0]) and np.isfinite(nxt[1]) and np.isfinite(nxt[2]) and np.isfinite(nxt[3])):
        raise SimulationFault(f"non-finite vehicle state {nxt}")
    return nxt


@dataclass
class MeasurementModel:
    H: np.ndarray = field(default_factory=lambda: H_MATRIX.copy())
    Ri: np.ndarray = field(default_factory=lambda: 400.0 * np.eye(2))

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float)
        self.Ri = np.asarray(self.Ri, dtype=float)
        self._v_sqrt = psd_sqrt(self.Ri)

    def noise(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        if n is None:
            return self._v_sqrt @ rng.standard_normal(2)
        return rng.standard_normal((n, 2)) @ self._v_sqrt.T


def measure(state, model: MeasurementModel, rng: np.random.Generator) -> np.ndarray:
    """One noisy position fix ``H x + v`` with ``v ~ N(0, Ri)``."""
    return model.H @ np.asarray(state, dtype=float) + model.noise(rng)


def measure_many(state, model: MeasurementModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent fixes of the same state, shape ``(n, 2)``.

    Draws the same normals, in the same order, as ``n`` calls to :func:`measure`.
    """
    return model.H @ np.asarray(state, dtype=float) + model.noise(rng, n)


@dataclass(frozen=True)
class SensorNode:
    id: int
    position: tuple[float, float]


class SensorField:
    """Fixed sensor deployment. Node ids are the row indices of ``positions``."""

    def __init__(self, positions, width: float = FIELD_WIDTH, height: float = FIELD_HEIGHT):
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        self.width = float(width)
        self.height = float(height)
        p = self.positions
        if ((p < 0).any() or (p[:, 0] > self.width).any() or (p[:, 1] > self.height).any()):
            raise ValueError("sensor outside the field rectangle")

    @classmethod
    def grid(cls, spacing: float = 24.0, width: float = FIELD_WIDTH,
             height: float = FIELD_HEIGHT) -> "SensorField":
        """Uniform lattice with one node at the center of every ``spacing`` x ``spacing`` cell.

        The default 360 x 600 m field gives 15 x 25 = 375 nodes.
        """
        nx = int(round(width / spacing))
        ny = int(round(height / spacing))
        xs = spacing * (np.arange(nx) + 0.5)
        ys = spacing * (np.arange(ny) + 0.5)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return cls(np.column_stack([gx.ravel(), gy.ravel()]), width, height)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def nodes(self) -> list[SensorNode]:
        return [SensorNode(i, (float(x), float(y))) for i, (x, y) in enumerate(self.positions)]

    def in_disk(self, center, radius: float) -> np.ndarray:
        """Sorted ids of the nodes in the closed disk, as an int array."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        return _disk_members(self.positions, float(center[0]), float(center[1]), float(radius))

    def in_disk_among(self, ids, center, radius: float) -> np.ndarray:
        """The members of ``ids`` (sorted int array) that also lie in the closed disk."""
        return _subset_in_disk(self.positions, ids, float(center[0]), float(center[1]), float(radius))


@njit(cache=True)
def _disk_members(pos, cx, cy, radius):
    r2 = radius * radius
    out = np.empty(len(pos), dtype=np.int64)
    n = 0
    for i in range(len(pos)):
        dx = pos[i, 0] - cx
        dy = pos[i, 1] - cy
        if dx * dx + dy * dy <= r2:
            out[n] = i
            n += 1
    return out[:n]


@njit(cache=True)
def _subset_in_disk(pos, ids, cx, cy, radius):
    r2 = radius * radius
    out = np.empty(len(ids), dtype=np.int64)
    n = 0
    for i in ids:
        dx = pos[i, 0] - cx
        dy = pos[i, 1] - cy
        if dx * dx + dy * dy <= r2:
            out[n] = i
            n += 1
    return out[:n]


def sensors_in_disk(field: SensorField, center, radius: float) -> set[int]:
    """Ids of the sensors within ``radius`` (inclusive) of ``center``."""
    return set(field.in_disk(center, radius).tolist())
