"""MDP wrapper: activation-radius actions in, tracking-vs-energy rewards out."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import comms
from .geometry import CirclePair, intersection_area, prediction_error
from .sim import (H_MATRIX, INIT_SPEED, MeasurementModel, MotionModel, SensorField,
                  in_field, step_motion, transition_matrices, vehicle_state)
from .tracking import TargetLost, FilterState, fuse, initial_filter_state, predict, select_best, update_covariance

log = logging.getLogger(__name__)

RADIUS_LEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)
CONTINUOUS_MIN = 0.1
N_FEATURES = 9


@dataclass(frozen=True)
class EnvConfig:
    r_s: float = 40.0
    width: float = 360.0
    height: float = 600.0
    spacing: float = 24.0
    init_speed: float = INIT_SPEED
    process_noise: float = 0.03
    meas_noise: float = 400.0
    speed_bound: float = 30.0
    max_steps: int = 500
    channel: comms.ChannelParams = field(default_factory=comms.ChannelParams)
    power: comms.PowerParams = field(default_factory=comms.PowerParams)


@dataclass(frozen=True)
class ActionSpec:
    mode: str
    r_s: float

    @property
    def discrete_levels(self) -> tuple[float, ...]:
        return tuple(f * self.r_s for f in RADIUS_LEVELS)

    @property
    def continuous_range(self) -> tuple[float, float]:
        return CONTINUOUS_MIN * self.r_s, self.r_s

    @property
    def n(self) -> int:
        return len(RADIUS_LEVELS)

    def radius(self, action) -> float:
        """Activation radius for a level index (discrete) or a radius in meters (continuous)."""
        if self.mode == "discrete":
            return self.discrete_levels[int(action)]
        lo, hi = self.continuous_range
        r = float(action)
        if not lo - 1e-9 <= r <= hi + 1e-9:
            raise ValueError(f"radius {r} outside [{lo}, {hi}]")
        return min(max(r, lo), hi)


@dataclass
class MdpTransition:
    s: np.ndarray
    a: float
    r: float
    s_next: np.ndarray
    done: bool
    truncated: bool = False


STEP_FIELDS = ("t", "tau", "n_m", "n_ma", "s_int", "e_com", "e_w", "e", "reward", "L",
               "true_x", "true_y", "est_x", "est_y")


@dataclass
class EpisodeLog:
    rows: list = field(default_factory=list)

    def append(self, row: tuple):
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        k = STEP_FIELDS.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)

    @property
    def T(self) -> int:
        return len(self.rows)

    def average_reward(self) -> float:
        return average_total_reward(self)

    def average_energy(self) -> float:
        return float(self.column("e").sum() / self.T)

    def average_sint(self) -> float:
        return float(self.column("s_int").sum() / self.T)

    def total_energy(self) -> float:
        return float(self.column("e").sum())

    def elapsed(self) -> float:
        return float(self.column("tau").sum())


def average_total_reward(log_: EpisodeLog) -> float:
    """Per-episode objective: mean of ``R(t)`` over the ``T`` emitted slots."""
    if log_.T < 1:
        raise ValueError("empty episode")
    k = STEP_FIELDS.index("reward")
    return math.fsum(r[k] for r in log_.rows) / log_.T


def slot_reward(s_int: float, r_s: float, e: float, e_max: float) -> float:
    """``R = S_int / (pi r_s^2) - e / e_max``; lies in ``[-1, 1]`` once ``e`` is clamped to ``e_max``."""
    return s_int / (math.pi * r_s * r_s) - e / e_max


@dataclass
class SlotTrace:
    """What one slot's timing and energy were computed from, kept for auditing."""

    est_pos: np.ndarray
    member_ids: np.ndarray
    active_ids: np.ndarray
    next_ids: np.ndarray
    timing: comms.StepTiming
    energy: comms.EnergyBreakdown


class TrackingEnv:
    """One vehicle crossing the sensor field.

    Each ``step`` takes the activation radius for the next slot. ``streams``
    is a mapping with independent generators under the keys ``vehicle``,
    ``measurement`` and ``fusion``.
    """

    def __init__(self, config: EnvConfig, mode: str = "discrete"):
        self.cfg = config
        self.spec = ActionSpec(mode, config.r_s)
        self.field = SensorField.grid(config.spacing, config.width, config.height)
        self.motion = MotionModel(config.process_noise * np.eye(2))
        self.meas = MeasurementModel(H_MATRIX.copy(), config.meas_noise * np.eye(2))
        self.e_max = comms.energy_normalizer(config.r_s, config.spacing, config.width, config.height,
                                             config.channel, config.power)
        self.clamp_warnings = 0
        self._feat_lo = np.array([0.0, -config.speed_bound, 0.0, -config.speed_bound] * 2 + [0.0])
        self._feat_span = np.array([config.width, 2 * config.speed_bound,
                                    config.height, 2 * config.speed_bound] * 2 + [2.0 * config.r_s])
        self._feat_off = np.array([1.0] * 8 + [0.0])

    # -- features -----------------------------------------------------------------------------

    def features(self) -> np.ndarray:
        raw = np.concatenate([self.filter.x_prior, self.filter.x_post, [self.r_a]])
        f = 2.0 * (raw - self._feat_lo) / self._feat_span - self._feat_off
        if np.abs(f).max() > 1.5:
            log.debug("feature vector out of range, clamping: %s", f)
            f = np.clip(f, -1.5, 1.5)
        return f

    def discrete_state(self, cell: float) -> tuple[int, int, int]:
        """Coarse state for tabular agents: estimated-position cell and radius level."""
        x, y = self.filter.x_post[0], self.filter.x_post[2]
        level = int(np.argmin(np.abs(np.array(RADIUS_LEVELS) - self.r_a / self.cfg.r_s)))
        return int(math.floor(x / cell)), int(math.floor(y / cell)), level

    # -- dynamics -----------------------------------------------------------------------------

    def spawn(self, rng: np.random.Generator) -> np.ndarray:
        """Entry on the bottom edge at a uniform abscissa, heading into the field."""
        v = self.cfg.init_speed
        return vehicle_state(rng.uniform(0.0, self.cfg.width), v, 0.0, v)

    def reset(self, streams) -> np.ndarray:
        self.streams = streams
        self.truth = self.spawn(streams["vehicle"])
        center = H_MATRIX @ self.truth
        self.r_a = self.cfg.r_s
        self.active_ids = self.field.in_disk(center, self.r_a)
        self.member_ids = self.active_ids
        if not len(self.member_ids):
            raise TargetLost("vehicle entered where no sensor can see it")
        z = self._fixes(self.member_ids)
        k = int(np.argmin(np.hypot(*(self.field.positions[self.member_ids] - center).T)))
        self.filter = initial_filter_state(z[k])
        self.tau_prev = 0.0
        self.t = 0
        self.log = EpisodeLog()
        self.obs = self.features()
        return self.obs

    def _fixes(self, ids) -> np.ndarray:
        return H_MATRIX @ self.truth + self.meas.noise(self.streams["measurement"], len(ids))

    def step(self, action):
        """Run one slot with the chosen radius for the upcoming activation area.

        Returns ``(transition, log_row)``.
        """
        cfg = self.cfg
        s = self.obs
        r_next = self.spec.radius(action)
        positions = self.field.positions

        # activation area for the next slot, centered on the predicted position
        A_prev, _ = transition_matrices(self.tau_prev)
        center = H_MATRIX @ (A_prev @ self.filter.x_post)
        next_ids = self.field.in_disk(center, r_next)

        est = H_MATRIX @ self.filter.x_post
        timing = comms.slot_timing(est, positions[self.member_ids], positions[next_ids],
                                   cfg.channel, self.streams["fusion"], self.member_ids)
        energy = comms.slot_energy(timing, len(self.member_ids), len(self.active_ids),
                                   len(next_ids), cfg.power, self.e_max)
        self.last_slot = SlotTrace(est, self.member_ids, self.active_ids, next_ids, timing, energy)
        e = energy.e
        if e > self.e_max:
            self.clamp_warnings += 1
            log.warning("slot energy %.6g J exceeds e_max %.6g J; clamped", e, self.e_max)
            e = self.e_max

        tau = timing.total
        self.motion.tau = tau
        self.truth = step_motion(self.truth, self.motion, self.streams["vehicle"])
        pos = H_MATRIX @ self.truth

        members = self.field.in_disk_among(next_ids, pos, cfg.r_s)
        x_prior, P_prior = predict(self.filter, self.motion)
        lost = len(members) == 0
        if lost:
            x_post, P_post = x_prior, P_prior
            s_int, L = 0.0, float("nan")
        else:
            z = self._fixes(members)
            P_i = update_covariance(P_prior, H_MATRIX, self.meas.Ri)
            pred = H_MATRIX @ x_prior
            dist = np.hypot(*(positions[members] - pred).T)
            best = select_best([(int(i), P_i) for i in members], dist)
            z_o = z[int(np.searchsorted(members, best.selected_sensor))]
            x_post, P_post = fuse(x_prior, P_prior, z_o, self.meas.Ri)
            L = prediction_error(H_MATRIX @ x_prior, H_MATRIX @ x_post)
            s_int = intersection_area(CirclePair(r_next, cfg.r_s, L))
        self.filter = FilterState(x_prior, x_post, P_prior, P_post)
        self.r_a = r_next
        self.active_ids, self.member_ids = next_ids, members
        self.tau_prev = tau
        self.t += 1

        reward = slot_reward(s_int, cfg.r_s, e, self.e_max)
        terminated = lost or not in_field(self.truth, cfg.width, cfg.height)
        truncated = not terminated and self.t >= cfg.max_steps
        row = (self.t, tau, len(members), len(next_ids), s_int, energy.e_com, energy.e_w, e,
               reward, L, pos[0], pos[1], x_post[0], x_post[2])
        self.log.append(row)
        self.obs = self.features()
        tr = MdpTransition(s, action, reward, self.obs, terminated or truncated, truncated)
        return tr, row
