"""Odometry motion model and the position and rigid-body measurement models."""
from typing import NamedTuple

import numpy as np


class Pose(NamedTuple):
    x: float
    y: float
    theta: float


class ControlInput(NamedTuple):
    """Rotate by ``alpha``, drive ``r`` metres, then rotate by ``beta``."""

    alpha: float
    r: float
    beta: float


def wrap_angle(a):
    """Map angles to the interval (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


def motion_step(prev, u, w=(0.0, 0.0, 0.0)):
    """Apply one odometry step with additive noise ``w``; heading is wrapped."""
    x, y, th = prev
    alpha, r, beta = u
    return Pose(
        x + r * np.cos(th + alpha) + w[0],
        y + r * np.sin(th + alpha) + w[1],
        wrap_angle(th + alpha + beta + w[2]),
    )


def position_measurement(pose, v=(0.0, 0.0)):
    """Noisy position fix of one robot."""
    return np.array([pose[0] + v[0], pose[1] + v[1]])


def auxiliary_measurement(poses):
    """Distance and relative heading between consecutive robots of a group.

    For robots ``j_1..j_N`` returns, for ``n = 2..N``, the pair
    ``(|p_n - p_{n-1}|, theta_n - theta_{n-1})`` stacked into one vector.
    The relative heading is wrapped to (-pi, pi].
    """
    if len(poses) < 2:
        raise ValueError("need at least two robots")
    out = []
    for a, b in zip(poses[:-1], poses[1:]):
        out.append(np.hypot(b[0] - a[0], b[1] - a[1]))
        out.append(wrap_angle(b[2] - a[2]))
    return np.array(out)


def control_towards(pose, target_xy, target_theta):
    """Control that moves ``pose`` exactly to ``(target_xy, target_theta)``
    in the absence of noise."""
    dx, dy = target_xy[0] - pose[0], target_xy[1] - pose[1]
    r = float(np.hypot(dx, dy))
    alpha = wrap_angle(np.arctan2(dy, dx) - pose[2]) if r > 0 else 0.0
    beta = target_theta - pose[2] - alpha
    return ControlInput(alpha, r, beta)


# Stacked versions used by the estimator.  States are flat arrays
# (x_1, y_1, theta_1, x_2, ...) and headings are not wrapped, so that the
# maps stay smooth across sigma points.


def fleet_motion(state, controls, noise):
    s = np.asarray(state).reshape(-1, 3)
    u = np.asarray(controls).reshape(-1, 3)
    w = np.asarray(noise).reshape(-1, 3)
    heading = s[:, 2] + u[:, 0]
    out = np.column_stack(
        [
            s[:, 0] + u[:, 1] * np.cos(heading),
            s[:, 1] + u[:, 1] * np.sin(heading),
            heading + u[:, 2],
        ]
    )
    return (out + w).ravel()


def fleet_positions(state):
    return np.asarray(state).reshape(-1, 3)[:, :2].ravel()


def fleet_auxiliary(state, group):
    s = np.asarray(state).reshape(-1, 3)
    out = []
    for a, b in zip(group[:-1], group[1:]):
        out.append(np.hypot(s[b, 0] - s[a, 0], s[b, 1] - s[a, 1]))
        out.append(s[b, 2] - s[a, 2])
    return np.array(out)
