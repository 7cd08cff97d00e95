"""Channel model, three-phase slot timing, and per-slot energy accounting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

D_MIN = 1.0  # m, floor on link distance so the per-meter gain stays finite


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class ChannelParams:
    rho0: float = 1e-3
    bandwidth: float = 1e6
    bits: float = 2e4
    p_tx: float = 0.1
    noise_power: float = dbm_to_watts(-110.0)

    def __post_init__(self):
        if min(self.rho0, self.bandwidth, self.bits, self.p_tx, self.noise_power) <= 0:
            raise ValueError(f"channel parameters must be positive: {self}")


@dataclass(frozen=True)
class PowerParams:
    p_tx: float = 0.1
    p_rx: float = 0.1
    p_work: float = 5.0
    p_idle: float = 0.05

    def __post_init__(self):
        if min(self.p_tx, self.p_rx, self.p_work, self.p_idle) < 0 or not self.p_work > self.p_idle:
            raise ValueError(f"invalid power parameters: {self}")


@dataclass
class StepTiming:
    gather: np.ndarray
    fuse: np.ndarray
    broadcast: np.ndarray
    fusion_head: int
    gather_max: float = field(init=False)
    fuse_max: float = field(init=False)
    broadcast_max: float = field(init=False)
    total: float = field(init=False)

    def __post_init__(self):
        self.gather_max = float(self.gather.max()) if self.gather.size else 0.0
        self.fuse_max = float(self.fuse.max()) if self.fuse.size else 0.0
        self.broadcast_max = float(self.broadcast.max()) if self.broadcast.size else 0.0
        self.total = self.gather_max + self.fuse_max + self.broadcast_max


@dataclass(frozen=True)
class EnergyBreakdown:
    e_com: float
    e_w: float
    e: float
    e_max: float = math.inf


def channel_gain(p1, p2, rho0: float) -> float:
    """Path-loss gain ``rho0 / ||p1 - p2||`` with the distance floored at 1 m."""
    d = math.hypot(p1[0] - p2[0], p1[1] - p2[1])
    return rho0 / max(d, D_MIN)


def tx_duration(gain, params: ChannelParams):
    """Seconds to push ``params.bits`` through a link with the given gain (scalar or array)."""
    snr = params.p_tx * np.asarray(gain, dtype=float) / params.noise_power
    tau = params.bits / (params.bandwidth * np.log2(1.0 + snr))
    return float(tau) if np.ndim(tau) == 0 else tau


@njit(cache=True)
def _durations(sx, sy, dst, rho0, snr_scale, bits_per_hz):
    out = np.empty(len(dst))
    for k in range(len(dst)):
        d = max(math.hypot(dst[k, 0] - sx, dst[k, 1] - sy), D_MIN)
        out[k] = bits_per_hz / math.log2(1.0 + snr_scale * rho0 / d)
    return out


@njit(cache=True)
def _slot_durations(ex, ey, members, j, nxt, rho0, snr_scale, bits_per_hz):
    gather = _durations(ex, ey, members, rho0, snr_scale, bits_per_hz)
    hx, hy = members[j, 0], members[j, 1]
    others = np.empty((len(members) - 1, 2))
    others[:j] = members[:j]
    others[j:] = members[j + 1:]
    fuse = _durations(hx, hy, others, rho0, snr_scale, bits_per_hz)
    broadcast = _durations(hx, hy, nxt, rho0, snr_scale, bits_per_hz)
    return gather, fuse, broadcast


def link_durations(src, dst, params: ChannelParams) -> np.ndarray:
    """Durations from one point ``src`` to every row of ``dst``."""
    dst = np.ascontiguousarray(dst, dtype=np.float64).reshape(-1, 2)
    return _durations(float(src[0]), float(src[1]), dst, params.rho0,
                      params.p_tx / params.noise_power, params.bits / params.bandwidth)


def slot_timing(est_pos, members, next_activation, params: ChannelParams,
                rng: np.random.Generator, member_ids=None) -> StepTiming:
    """Gather, fuse and broadcast durations of one slot.

    Args:
        est_pos: estimated vehicle position; every member uploads its fix from there.
        members: ``(n, 2)`` positions of the tracking sensors ``m(t)``.
        next_activation: positions of the sensors woken for the next slot.
        member_ids: sensor ids aligned with ``members`` (defaults to row indices).
    """
    members = np.asarray(members, dtype=float).reshape(-1, 2)
    if not len(members):
        from .tracking import TargetLost
        raise TargetLost("no tracking sensors in this slot")
    j = int(rng.integers(len(members)))
    nxt = np.ascontiguousarray(next_activation, dtype=np.float64).reshape(-1, 2)
    gather, fuse, broadcast = _slot_durations(float(est_pos[0]), float(est_pos[1]), members, j, nxt,
                                              params.rho0, params.p_tx / params.noise_power,
                                              params.bits / params.bandwidth)
    head_id = j if member_ids is None else int(member_ids[j])
    return StepTiming(gather, fuse, broadcast, head_id)


def slot_energy(timing: StepTiming, n_members: int, n_active: int, n_next_active: int,
                power: PowerParams, e_max: float = math.inf) -> EnergyBreakdown:
    """Communication energy plus wake/idle energy of the activation set over ``timing.total``."""
    if n_members > n_active:
        raise ValueError(f"|m(t)|={n_members} exceeds |m_a(t)|={n_active}")
    if len(timing.gather) != n_members or len(timing.broadcast) != n_next_active:
        raise ValueError("timing lists do not match the membership counts")
    # correctly rounded sums, so any exact re-summation reproduces e_com bit for bit
    e_com = math.fsum((power.p_rx * math.fsum(timing.gather),
                       power.p_rx * timing.fuse_max,
                       power.p_tx * math.fsum(timing.fuse),
                       power.p_tx * timing.broadcast_max,
                       power.p_rx * math.fsum(timing.broadcast)))
    e_w = (power.p_work * n_members + power.p_idle * (n_active - n_members)) * timing.total
    return EnergyBreakdown(float(e_com), float(e_w), float(e_com + e_w), e_max)


def max_nodes_in_disk(radius: float, spacing: float) -> int:
    """Largest number of square-lattice points any closed disk of ``radius`` can hold.

    The count is piecewise constant in the disk center and peaks on a vertex of
    the arrangement of radius-``radius`` circles around the lattice points, so
    it is enough to test lattice points and pairwise circle intersections near
    one cell.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    r = radius / spacing
    k = int(math.ceil(r)) + 2
    pts = np.array([(i, j) for i in range(-k, k + 2) for j in range(-k, k + 2)], dtype=float)
    cands = [np.array([0.0, 0.0])]
    near = pts[np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5) <= r + 1.0]
    for a, b in itertools.combinations(near, 2):
        d = math.hypot(*(b - a))
        if d == 0 or d > 2 * r:
            continue
        mid = 0.5 * (a + b)
        h = math.sqrt(max(r * r - 0.25 * d * d, 0.0))
        perp = np.array([a[1] - b[1], b[0] - a[0]]) / d
        cands.append(mid + h * perp)
        cands.append(mid - h * perp)
    cands = np.array(cands)
    tol = 1e-9 * max(r, 1.0)
    best = 0
    for c in cands:
        inside = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) <= r + tol
        best = max(best, int(inside.sum()))
    return best


def energy_normalizer(r_s: float, spacing: float, width: float, height: float,
                      channel: ChannelParams, power: PowerParams) -> float:
    """Upper bound on the energy of any single slot.

    Every link is at most one field diagonal long, so each phase lasts at most
    ``tau_ub`` and a slot at most ``3 tau_ub``; no disk of radius ``<= r_s``
    holds more than ``n`` sensors.
    """
    n = max_nodes_in_disk(r_s, spacing)
    tau_ub = tx_duration(channel.rho0 / max(math.hypot(width, height), D_MIN), channel)
    e_w = 3.0 * power.p_work * n * tau_ub
    e_com = ((2.0 * power.p_rx + power.p_tx) * n + power.p_rx) * tau_ub
    return e_w + e_com
