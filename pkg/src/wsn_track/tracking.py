"""Information-form Kalman filtering with min-trace sensor selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .sim import H_MATRIX, MotionModel

EIG_FLOOR = -1e-8
INIT_COV_DIAG = (400.0, 100.0, 400.0, 100.0)


class FilterFault(RuntimeError):
    """Covariance lost positive definiteness or became singular."""


class TargetLost(RuntimeError):
    """No sensor can observe the vehicle."""


@dataclass
class FilterState:
    x_prior: np.ndarray
    x_post: np.ndarray
    P_prior: np.ndarray
    P_post: np.ndarray


@dataclass
class FusionResult:
    selected_sensor: int
    P_o: np.ndarray
    z_o: np.ndarray | None = None
    R_o: np.ndarray | None = None


def symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def _checked(P: np.ndarray, lo: float, name: str) -> np.ndarray:
    # eigvalsh of a non-finite matrix is NaN, so one check covers both faults
    if not math.isfinite(lo):
        raise FilterFault(f"{name} is not finite")
    if lo < EIG_FLOOR:
        raise FilterFault(f"{name} has eigenvalue {lo:.3e}")
    return P


def check_covariance(P: np.ndarray, name: str = "P") -> np.ndarray:
    """Re-symmetrize ``P`` and reject it if an eigenvalue is below ``-1e-8``."""
    P = symmetrize(np.asarray(P, dtype=float))
    if not np.all(np.isfinite(P)):
        raise FilterFault(f"{name} is not finite")
    return _checked(P, np.linalg.eigvalsh(P)[0], name)


@njit(cache=True)
def _propagate(x, P, tau, Qw):
    A = np.eye(4)
    A[0, 1] = tau
    A[2, 3] = tau
    D = np.zeros((4, 2))
    D[0, 0] = D[2, 1] = 0.5 * tau * tau
    D[1, 0] = D[3, 1] = tau
    Pp = A @ P @ A.T + D @ Qw @ D.T
    Pp = 0.5 * (Pp + Pp.T)
    return A @ x, Pp, np.linalg.eigvalsh(Pp)[0]


@njit(cache=True)
def _info_update(x_prior, P_prior, z, H, R):
    P_inv = np.linalg.inv(P_prior)
    R_inv = np.linalg.inv(R)
    HtRinv = H.T @ R_inv
    P = np.linalg.inv(P_inv + HtRinv @ H)
    P = 0.5 * (P + P.T)
    x = P @ (P_inv @ x_prior + HtRinv @ z)
    return x, P, np.linalg.eigvalsh(P)[0]


def _f(a) -> np.ndarray:
    if type(a) is np.ndarray and a.dtype == np.float64 and a.flags.c_contiguous:
        return a
    return np.ascontiguousarray(a, dtype=np.float64)


def initial_filter_state(z) -> FilterState:
    """Filter seeded from a first position fix, with zero velocity."""
    x0 = np.array([z[0], 0.0, z[1], 0.0], dtype=float)
    P0 = np.diag(INIT_COV_DIAG)
    return FilterState(x0.copy(), x0, P0.copy(), P0)


def predict(prev: FilterState, model: MotionModel) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance propagation over a slot of ``model.tau`` seconds.

    The process noise enters the covariance as ``D Qw D^T``; it has zero mean so
    the point prediction is ``A x``.
    """
    x, P, lo = _propagate(_f(prev.x_post), _f(prev.P_post), float(model.tau), _f(model.Qw))
    return x, _checked(P, lo, "P_prior")


def update_covariance(P_prior: np.ndarray, H: np.ndarray, Ri: np.ndarray) -> np.ndarray:
    """Posterior covariance ``(P'^-1 + H^T Ri^-1 H)^-1`` if sensor ``i`` alone is fused."""
    return fuse(np.zeros(len(P_prior)), P_prior, np.zeros(len(Ri)), Ri, H)[1]


def select_best(candidates: Sequence[tuple[int, np.ndarray]], distances: Sequence[float] | None = None,
                rtol: float = 1e-12) -> FusionResult:
    """Pick the candidate ``(sensor_id, P_i)`` with the smallest ``trace(P_i)``.

    Traces within ``rtol`` of the minimum count as ties. Ties go to the sensor
    closest to the current position estimate (``distances``, aligned with
    ``candidates``), then to the lowest id.
    """
    if not candidates:
        raise TargetLost("no candidate sensors")
    traces = [P[0, 0] + P[1, 1] + P[2, 2] + P[3, 3] if P.shape == (4, 4) else np.trace(P)
              for _, P in candidates]
    best = min(traces)
    tied = [j for j, tr in enumerate(traces) if tr <= best + rtol * abs(best)]
    if len(tied) > 1 and distances is not None:
        k = min(tied, key=lambda j: (distances[j], candidates[j][0]))
    else:
        k = min(tied, key=lambda j: candidates[j][0])
    sid, P = candidates[k]
    return FusionResult(int(sid), P)


def fuse(x_prior: np.ndarray, P_prior: np.ndarray, z_o, Ri_o: np.ndarray,
         H: np.ndarray = H_MATRIX) -> tuple[np.ndarray, np.ndarray]:
    """Information-form update with the selected sensor's measurement ``z_o``."""
    try:
        x, P, lo = _info_update(_f(x_prior), _f(P_prior), _f(z_o), _f(H), _f(Ri_o))
    except np.linalg.LinAlgError as exc:
        raise FilterFault("singular covariance in the information update") from exc
    return x, _checked(P, lo, "P_post")


def gain_form_update(x_prior, P_prior, z, R, H=H_MATRIX):
    """Textbook Kalman-gain update, kept as an independent reference."""
    S = H @ P_prior @ H.T + R
    K = P_prior @ H.T @ np.linalg.inv(S)
    x = x_prior + K @ (np.asarray(z, dtype=float) - H @ x_prior)
    P = (np.eye(len(x_prior)) - K @ H) @ P_prior
    return x, symmetrize(P)
