"""Scenario configuration and simulation of the cooperative transport task.

Robots first drive independently to staging points around an object, move
into a fixed formation at the first step of the cooperation window, carry the
object along a gently curving path while rigidly attached, and finally drive
away independently.  Robots outside the cooperating group drive on their own
throughout.
"""
import csv
import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from .models import Pose, auxiliary_measurement, control_towards, motion_step, wrap_angle

MIN_SPACING = 0.1
STAGING_OFFSET = 1.2
DEPARTURE_STEP = 0.35
FREE_SPEED = 0.4


def default_formation(count):
    """Positions (relative to the object) and heading offsets of ``count``
    robots holding the object."""
    rows = []
    for i in range(count):
        angle = -2.5 + 2.0 * np.pi * 0.95 * i / count
        radius = 1.5 + 0.1 * i
        rows.append((radius * np.cos(angle), radius * np.sin(angle), 0.2 * np.sin(1.7 * i)))
    return tuple(rows)


@dataclass(frozen=True)
class WorldConfig:
    """Scenario parameters.

    :param robot_count: number of robots in the fleet
    :param steps: number of time steps ``K``
    :param window: first and last step of cooperation, or None
    :param cooperating: indices of the robots that carry the object
    :param formation: per cooperating robot ``(dx, dy, dtheta)`` relative to
        the object; default from :func:`default_formation`
    :param size: scale of the object; the simulated truth uses the formation
        as given, hypotheses may rescale the distances
    :param motion_noise: 3x3 covariance of the odometry noise per robot
    :param measurement_noise: 2x2 covariance of a position fix
    :param prior_variance: variance of each initial pose coordinate
    :param speed: distance the object moves per step during transport
    :param seed: random seed
    """

    robot_count: int = 3
    steps: int = 40
    window: tuple = (11, 30)
    cooperating: tuple = (0, 1, 2)
    formation: tuple = None
    size: float = 1.0
    motion_noise: tuple = ((0.01, 0.0, 0.0), (0.0, 0.01, 0.0), (0.0, 0.0, 0.02**2))
    measurement_noise: tuple = ((0.04, 0.0), (0.0, 0.04))
    prior_variance: float = 0.1
    speed: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if self.window is not None:
            object.__setattr__(self, "window", tuple(int(k) for k in self.window))
        object.__setattr__(self, "cooperating", tuple(int(j) for j in self.cooperating))
        if self.formation is None:
            object.__setattr__(self, "formation", default_formation(len(self.cooperating)))
        else:
            object.__setattr__(self, "formation", tuple(tuple(float(v) for v in row) for row in self.formation))
        object.__setattr__(self, "motion_noise", tuple(tuple(float(v) for v in r) for r in self.motion_noise))
        object.__setattr__(self, "measurement_noise", tuple(tuple(float(v) for v in r) for r in self.measurement_noise))
        validate_config(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def pickup_step(self):
        """Last step before the robots hold the object."""
        return None if self.window is None else self.window[0] - 1

    def in_window(self, k):
        return self.window is not None and self.window[0] <= k <= self.window[1]

    def auxiliary_targets(self):
        """Distances and relative headings between consecutive cooperating
        robots implied by the formation and ``size``."""
        out = []
        for a, b in zip(self.formation[:-1], self.formation[1:]):
            out.append(self.size * np.hypot(b[0] - a[0], b[1] - a[1]))
            out.append(wrap_angle(b[2] - a[2]))
        return np.array(out)

    def start_poses(self):
        """Nominal initial poses (mean of the initial-state prior)."""
        poses = np.zeros((self.robot_count, 3))
        approach = 0 if self.window is None else self.window[0] - 1
        for j in range(self.robot_count):
            if j in self.cooperating:
                stage = _staging_point(self.formation[self.cooperating.index(j)])
                poses[j] = (stage[0] - 0.45 * approach, stage[1], 0.0)
            else:
                poses[j] = (-4.5, 3.0 + 1.0 * j, 0.0)
        return poses


def _staging_point(offset):
    p = np.array(offset[:2])
    return p * (1.0 + STAGING_OFFSET / np.linalg.norm(p))


def _check_psd(name, M, size):
    M = np.asarray(M, dtype=float)
    if M.shape != (size, size) or not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} must be a finite {size}x{size} matrix")
    if np.abs(M - M.T).max() > 1e-12:
        raise InvalidInputError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(M)[0] < -1e-12:
        raise InvalidInputError(f"{name} is not positive semi-definite")


def validate_config(cfg):
    if cfg.robot_count < 1 or cfg.steps < 1:
        raise InvalidInputError("need at least one robot and one step")
    if len(set(cfg.cooperating)) != len(cfg.cooperating):
        raise InvalidInputError("cooperating robots must be distinct")
    if any(j < 0 or j >= cfg.robot_count for j in cfg.cooperating):
        raise InvalidInputError("cooperating robot index out of range")
    if cfg.window is not None:
        ks, ke = cfg.window
        if not 1 <= ks <= ke <= cfg.steps:
            raise InvalidInputError(f"window {cfg.window} must satisfy 1 <= start <= end <= {cfg.steps}")
        if len(cfg.cooperating) < 2:
            raise InvalidInputError("a cooperation window needs at least two robots")
    if len(cfg.formation) != len(cfg.cooperating) or any(len(r) != 3 for r in cfg.formation):
        raise InvalidInputError("formation needs one (dx, dy, dtheta) per cooperating robot")
    if cfg.size <= 0:
        raise InvalidInputError("size must be positive")
    pts = np.array([r[:2] for r in cfg.formation]) * cfg.size
    for i in range(len(pts)):
        if np.linalg.norm(pts[i]) < MIN_SPACING:
            raise InvalidInputError("formation point too close to the object reference")
        for j in range(i):
            if np.linalg.norm(pts[i] - pts[j]) < MIN_SPACING:
                raise InvalidInputError(f"robots {i} and {j} closer than {MIN_SPACING} m in the formation")
    _check_psd("motion_noise", cfg.motion_noise, 3)
    _check_psd("measurement_noise", cfg.measurement_noise, 2)
    if cfg.prior_variance <= 0:
        raise InvalidInputError("prior_variance must be positive")


@dataclass
class SimulationRecord:
    """Ground truth, controls and measurements of one simulated run.

    ``poses[k]`` is the true fleet state at step ``k = 0..K``;
    ``controls[k - 1]`` and ``positions[k - 1]`` belong to step ``k``;
    ``auxiliary`` maps window steps to the stacked rigid-body readings.
    """

    config: WorldConfig
    poses: np.ndarray
    controls: np.ndarray
    positions: np.ndarray
    auxiliary: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.controls.shape[0]

    def measurement(self, k, include_auxiliary=True):
        """Stacked measurement vector of step ``k``."""
        z = self.positions[k - 1].ravel()
        if include_auxiliary and k in self.auxiliary:
            z = np.concatenate([z, self.auxiliary[k]])
        return z


def _sample(rng, cov):
    cov = np.asarray(cov)
    return rng.multivariate_normal(np.zeros(cov.shape[0]), cov, method="eigh")


def _path_heading(cfg, k):
    ks, ke = cfg.window
    span = max(ke - ks, 1)
    return 0.3 * np.sin(np.pi * (k - ks) / span)


def simulate(config):
    """Simulate one run; the result depends only on ``config`` (incl. seed)."""
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    N, K = cfg.robot_count, cfg.steps
    Sw, Sv = np.array(cfg.motion_noise), np.array(cfg.measurement_noise)
    nominal = cfg.start_poses()
    x0 = nominal + rng.normal(scale=np.sqrt(cfg.prior_variance), size=nominal.shape)
    x0[:, 2] = wrap_angle(x0[:, 2])
    poses = [x0]
    controls, positions, auxiliary = [], [], {}
    group = list(cfg.cooperating)
    offsets = np.array(cfg.formation)
    obj = None
    for k in range(1, K + 1):
        prev = poses[-1]
        new = np.zeros((N, 3))
        u = np.zeros((N, 3))
        if cfg.in_window(k):
            ks = cfg.window[0]
            if k == ks:
                target_obj = np.array([0.0, 0.0, 0.0])
            else:
                psi_prev, psi = _path_heading(cfg, k - 1), _path_heading(cfg, k)
                step = cfg.speed * np.array([np.cos(psi), np.sin(psi)])
                target_obj = obj + np.array([step[0], step[1], psi - psi_prev])
            w = _sample(rng, Sw)
            obj = target_obj + w
            for i, j in enumerate(group):
                tx, ty = target_obj[:2] + offsets[i, :2]
                u[j] = control_towards(Pose(*prev[j]), (tx, ty), target_obj[2] + offsets[i, 2])
                new[j] = (obj[0] + offsets[i, 0], obj[1] + offsets[i, 1], wrap_angle(obj[2] + offsets[i, 2]))
        for j in range(N):
            if cfg.in_window(k) and j in group:
                continue
            p = Pose(*prev[j])
            if j in group and k < cfg.window[0]:
                i = group.index(j)
                stage = _staging_point(offsets[i])
                frac = k / (cfg.window[0] - 1)
                target = nominal[j, :2] + (stage - nominal[j, :2]) * frac
            elif j in group:
                i = group.index(j)
                direction = offsets[i, :2] / np.linalg.norm(offsets[i, :2])
                target = np.array(p[:2]) + DEPARTURE_STEP * direction + np.array([0.25, 0.0])
            else:
                heading = 0.1 * np.sin(k / 5.0)
                target = np.array(p[:2]) + FREE_SPEED * np.array([np.cos(heading), np.sin(heading)])
            d = target - np.array(p[:2])
            ctrl = control_towards(p, target, np.arctan2(d[1], d[0]))
            u[j] = (ctrl.alpha, ctrl.r, 0.0)
            new[j] = motion_step(p, tuple(u[j]), _sample(rng, Sw))
        z = np.array([new[j, :2] + _sample(rng, Sv) for j in range(N)])
        if cfg.in_window(k):
            auxiliary[k] = auxiliary_measurement([new[j] for j in group])
        poses.append(new)
        controls.append(u)
        positions.append(z)
    return SimulationRecord(cfg, np.array(poses), np.array(controls), np.array(positions), auxiliary)


TRAJECTORY_HEADER = ["k", "robot", "x", "y", "theta", "u_alpha", "u_r", "u_beta", "z_x", "z_y"]
AUXILIARY_HEADER = ["k", "pair", "robot_a", "robot_b", "distance", "relative_heading"]


def _fmt(v):
    return repr(float(v))


def write_record(record, directory):
    """Write ``trajectory.csv`` and ``auxiliary.csv`` into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    N = record.config.robot_count
    with open(os.path.join(directory, "trajectory.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(TRAJECTORY_HEADER)
        for k in range(record.steps + 1):
            for j in range(N):
                row = [k, j] + [_fmt(v) for v in record.poses[k, j]]
                if k == 0:
                    row += [""] * 5
                else:
                    row += [_fmt(v) for v in record.controls[k - 1, j]]
                    row += [_fmt(v) for v in record.positions[k - 1, j]]
                out.writerow(row)
    group = record.config.cooperating
    with open(os.path.join(directory, "auxiliary.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(AUXILIARY_HEADER)
        for k in sorted(record.auxiliary):
            vals = record.auxiliary[k]
            for p in range(len(group) - 1):
                out.writerow([k, p, group[p], group[p + 1], _fmt(vals[2 * p]), _fmt(vals[2 * p + 1])])


def read_record(config, directory):
    """Inverse of :func:`write_record` for a known configuration."""
    N, K = config.robot_count, config.steps
    poses = np.zeros((K + 1, N, 3))
    controls = np.zeros((K, N, 3))
    positions = np.zeros((K, N, 2))
    with open(os.path.join(directory, "trajectory.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            k, j = int(row["k"]), int(row["robot"])
            poses[k, j] = [float(row[c]) for c in ("x", "y", "theta")]
            if k > 0:
                controls[k - 1, j] = [float(row[c]) for c in ("u_alpha", "u_r", "u_beta")]
                positions[k - 1, j] = [float(row[c]) for c in ("z_x", "z_y")]
    auxiliary = {}
    with open(os.path.join(directory, "auxiliary.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            k, p = int(row["k"]), int(row["pair"])
            vals = auxiliary.setdefault(k, np.zeros(2 * (len(config.cooperating) - 1)))
            vals[2 * p] = float(row["distance"])
            vals[2 * p + 1] = float(row["relative_heading"])
    return SimulationRecord(config, poses, controls, positions, auxiliary)
