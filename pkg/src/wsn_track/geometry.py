"""Circle-circle lens area and the prediction-error distance used by the reward."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CirclePair:
    """Activation circle of radius ``r_a`` and sensing circle of radius ``r_s``
    whose centers are ``L`` meters apart."""

    r_a: float
    r_s: float
    L: float

    def __post_init__(self):
        if self.r_a < 0 or self.r_s <= 0 or self.L < 0:
            raise ValueError(f"invalid circle pair {self}")


def prediction_error(l_pred, l_est) -> float:
    """Euclidean distance between the predicted and the estimated position."""
    d = np.asarray(l_pred, dtype=float) - np.asarray(l_est, dtype=float)
    return math.hypot(d[0], d[1])


def _half_lens(r: float, cos_arg: float) -> float:
    # r^2 (theta - sin(theta) cos(theta)) with the cosine argument clamped at tangency
    theta = math.acos(min(1.0, max(-1.0, cos_arg)))
    return r * r * (theta - math.sin(theta) * math.cos(theta))


def intersection_area(pair: CirclePair) -> float:
    """Area of ``n_s ∩ n_a`` in square meters.

    Disjoint circles give 0, a circle contained in the other gives the area of
    the smaller one, and partial overlaps use the two circular-segment terms
    with half-angles theta_1 (activation side) and theta_2 (sensing side).
    """
    r_a, r_s, L = pair.r_a, pair.r_s, pair.L
    if r_a == 0.0 or L >= r_a + r_s:
        return 0.0
    if L <= abs(r_a - r_s):
        r = min(r_a, r_s)
        return math.pi * r * r
    cos1 = (r_a * r_a + L * L - r_s * r_s) / (2.0 * r_a * L)
    cos2 = (r_s * r_s + L * L - r_a * r_a) / (2.0 * r_s * L)
    area = _half_lens(r_a, cos1) + _half_lens(r_s, cos2)
    r = min(r_a, r_s)
    return min(max(area, 0.0), math.pi * r * r)
