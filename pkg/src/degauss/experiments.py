"""Experiment drivers: one estimation run, the ridge sweep and model comparison."""
import csv
import dataclasses
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import settings
from .degenerate import moments
from .errors import DegaussError, InferenceInconsistency, InvalidInputError
from .graph import Schedule, log_evidence, pass_messages, posterior
from .plotting import beliefs_svg
from .robotsim import METHODS, WorldConfig, build_problem, simulate
from .subspace import rank

BELIEF_HEADER = ["k", "robot", "mean_x", "mean_y", "mean_theta", "cov_xx", "cov_xy", "cov_yy", "cov_tt", "rank"]


@dataclass
class ExperimentConfig:
    """Everything an experiment needs besides the code.

    :param world: scenario configuration; its seed is replaced per run
    :param method: ``degenerate``, ``ridge`` or ``no-auxiliary``
    :param ridge: diagonal loading used by the ``ridge`` method
    :param ridge_grid: values swept by :func:`sweep_ridge`
    :param pickup_grid: hypothesised pickup steps for :func:`compare_models`
    :param size_grid: hypothesised object sizes for :func:`compare_models`
    :param seeds: seeds aggregated by the sweeps
    """

    world: WorldConfig = field(default_factory=WorldConfig)
    method: str = "degenerate"
    ridge: float = 1e-4
    ridge_grid: tuple = tuple(float(v) for v in np.logspace(-12, 0, 13))
    pickup_grid: tuple = tuple(range(6, 15))
    size_grid: tuple = tuple(round(v, 2) for v in np.linspace(0.6, 1.4, 9))
    seeds: tuple = tuple(range(20))
    out_dir: str = "out"
    plots: bool = True
    max_sweeps: int = 50
    tol: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}; choose from {METHODS}")
        self.ridge_grid = tuple(float(v) for v in self.ridge_grid)
        self.pickup_grid = tuple(int(v) for v in self.pickup_grid)
        self.size_grid = tuple(float(v) for v in self.size_grid)
        self.seeds = tuple(int(v) for v in self.seeds)
        if self.ridge <= 0 or any(v <= 0 for v in self.ridge_grid):
            raise InvalidInputError("ridge values must be positive")

    @classmethod
    def from_mapping(cls, data):
        """Build from a nested mapping; scenario fields may sit under
        ``world`` or at the top level."""
        data = dict(data or {})
        world_fields = {f.name for f in dataclasses.fields(WorldConfig)}
        own_fields = {f.name for f in dataclasses.fields(cls)}
        world = dict(data.pop("world", {}) or {})
        for key in list(data):
            if key in world_fields and key not in own_fields:
                world[key] = data.pop(key)
        unknown = set(data) - own_fields
        if unknown:
            raise InvalidInputError(f"unknown configuration keys {sorted(unknown)}")
        unknown = set(world) - world_fields
        if unknown:
            raise InvalidInputError(f"unknown world keys {sorted(unknown)}")
        return cls(world=WorldConfig(**world), **data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class RunReport:
    """Outcome of one estimation run.

    ``means[k - 1, j]`` and ``covs[k - 1, j]`` are the posterior pose mean
    and covariance of robot ``j`` at step ``k``.  ``failure`` holds a message
    when the run did not complete; numeric fields are then nan.
    """

    seed: int
    method: str
    means: np.ndarray = None
    covs: np.ndarray = None
    ranks: np.ndarray = None
    log_evidence: float = np.nan
    max_condition: float = np.nan
    duration: float = 0.0
    sweeps: int = 0
    failure: str = None

    @property
    def ok(self):
        return self.failure is None

    def window_trace(self, window):
        """Mean over window steps of the summed (x, y) covariance traces."""
        ks = range(window[0], window[1] + 1)
        return float(np.mean([sum(np.trace(self.covs[k - 1, j, :2, :2]) for j in range(self.covs.shape[1])) for k in ks]))


def infer(record, hypothesis=None, method="degenerate", ridge=1e-4, schedule=None):
    """Build the problem, pass messages and collect per-robot posteriors."""
    start = time.perf_counter()
    problem = build_problem(record, hypothesis, method=method, ridge=ridge)
    msgs = pass_messages(problem.graph, schedule or Schedule())
    N, K = record.config.robot_count, record.config.steps
    means, covs, ranks = np.zeros((K, N, 3)), np.zeros((K, N, 3, 3)), np.zeros((K, N), dtype=int)
    for k in range(1, K + 1):
        m = moments(posterior(msgs, k))
        for j in range(N):
            block = m.cov[3 * j : 3 * j + 3, 3 * j : 3 * j + 3]
            means[k - 1, j] = m.mean[3 * j : 3 * j + 3]
            covs[k - 1, j] = block
            ranks[k - 1, j] = rank(block, rtol=settings.COV_RTOL)
    logz = np.nan if settings.moments_only() else log_evidence(msgs)
    report = RunReport(record.config.seed, method, means, covs, ranks, logz, problem.max_condition)
    report.sweeps = msgs.sweeps
    report.duration = time.perf_counter() - start
    return report


def _guarded(record, hypothesis, method, ridge, schedule):
    """Like :func:`infer` but numerical failures become a failure marker."""
    try:
        return infer(record, hypothesis, method, ridge, schedule)
    except InferenceInconsistency as exc:
        return RunReport(record.config.seed, method, failure=f"inconsistent: {exc}")
    except (DegaussError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        return RunReport(record.config.seed, method, failure=f"{type(exc).__name__}: {exc}")


def write_beliefs(report, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(BELIEF_HEADER)
        K, N = report.means.shape[:2]
        for k in range(1, K + 1):
            for j in range(N):
                m, C = report.means[k - 1, j], report.covs[k - 1, j]
                row = [k, j] + [repr(float(v)) for v in (*m, C[0, 0], C[0, 1], C[1, 1], C[2, 2])]
                out.writerow(row + [int(report.ranks[k - 1, j])])


def run_estimation(config, seed=None, write=True):
    """Simulate, estimate and (optionally) write ``beliefs.csv`` and ``beliefs.svg``.

    :raises InferenceInconsistency: if the evidence contradicts a hard constraint
    """
    seed = config.world.seed if seed is None else seed
    world = config.world.replace(seed=seed)
    record = simulate(world)
    schedule = Schedule(max_sweeps=config.max_sweeps, tol=config.tol)
    report = infer(record, None, config.method, config.ridge, schedule)
    if write:
        os.makedirs(config.out_dir, exist_ok=True)
        write_beliefs(report, os.path.join(config.out_dir, "beliefs.csv"))
        if config.plots:
            beliefs_svg(
                os.path.join(config.out_dir, "beliefs.svg"),
                record.poses[:, :, :2],
                report.means[:, :, :2],
                report.covs[:, :, :2, :2],
                window=world.window,
            )
    return report


def _stats(values):
    v = np.array([x for x in values if np.isfinite(x)])
    if v.size == 0:
        return np.nan, np.nan
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


def sweep_ridge(config, write=True):
    """Ridge baseline over ``config.ridge_grid`` aggregated over seeds.

    :return: dict with ``rows`` (one per value: ``lam, kappa, logz_mean,
        logz_std, failures``), the per-seed matrix ``logz`` and the
        ``reference`` log evidence of the degenerate method per seed
    """
    if not config.ridge_grid:
        raise InvalidInputError("ridge grid is empty")
    schedule = Schedule(max_sweeps=config.max_sweeps, tol=config.tol)
    records = [simulate(config.world.replace(seed=s)) for s in config.seeds]
    reference = [_guarded(r, None, "degenerate", 1.0, schedule).log_evidence for r in records]
    logz = np.full((len(config.ridge_grid), len(records)), np.nan)
    kappa = np.full_like(logz, np.nan)
    rows = []
    for i, lam in enumerate(config.ridge_grid):
        failures = 0
        for s, record in enumerate(records):
            rep = _guarded(record, None, "ridge", lam, schedule)
            failures += not rep.ok
            logz[i, s], kappa[i, s] = rep.log_evidence, rep.max_condition
        mean, std = _stats(logz[i])
        k_max = float(np.nanmax(kappa[i])) if np.any(np.isfinite(kappa[i])) else np.nan
        rows.append({"lam": lam, "kappa": k_max, "logz_mean": mean, "logz_std": std, "failures": failures})
    result = {"rows": rows, "logz": logz, "kappa": kappa, "reference": np.array(reference)}
    if write:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "sweep_ridge.csv"), "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["lambda", "kappa", "logz_mean", "logz_std", "failures"])
            for r in rows:
                out.writerow([repr(r["lam"]), repr(r["kappa"]), repr(r["logz_mean"]), repr(r["logz_std"]), r["failures"]])
            mean, std = _stats(reference)
            out.writerow(["degenerate", "", repr(mean), repr(std), int(np.sum(~np.isfinite(reference)))])
    return result


def _hypotheses(world, grid_name, grid):
    if grid_name == "pickup":
        end = world.window[1]
        return [world.replace(window=(k + 1, max(end, k + 1))) for k in grid]
    return [world.replace(size=a) for a in grid]


def compare_models(config, grids=("pickup", "size"), write=True):
    """Log evidence of alternative hypotheses about the pickup step and the
    object size.

    :return: dict keyed by grid name; each entry has ``values``, the per-seed
        ``logz`` matrix (values x seeds), ``rows`` with mean, std, argmax flag
        and the number of seeds for which the value wins
    """
    schedule = Schedule(max_sweeps=config.max_sweeps, tol=config.tol)
    records = [simulate(config.world.replace(seed=s)) for s in config.seeds]
    results = {}
    for name in grids:
        values = config.pickup_grid if name == "pickup" else config.size_grid
        if not values:
            raise InvalidInputError(f"{name} grid is empty")
        logz = np.full((len(values), len(records)), np.nan)
        for s, record in enumerate(records):
            for i, hyp in enumerate(_hypotheses(record.config, name, values)):
                logz[i, s] = _guarded(record, hyp, config.method, config.ridge, schedule).log_evidence
        masked = np.where(np.isfinite(logz), logz, -np.inf)
        winners = np.argmax(masked, axis=0)
        means = [_stats(row) for row in logz]
        best = int(np.nanargmax([m for m, _ in means])) if any(np.isfinite(m) for m, _ in means) else -1
        rows = [
            {
                "value": v,
                "logz_mean": means[i][0],
                "logz_std": means[i][1],
                "argmax": i == best,
                "wins": int(np.sum(winners == i)),
                "failures": int(np.sum(~np.isfinite(logz[i]))),
            }
            for i, v in enumerate(values)
        ]
        results[name] = {"values": list(values), "logz": logz, "rows": rows}
    if write:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "compare_models.csv"), "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["grid", "value", "logz_mean", "logz_std", "argmax", "wins", "failures"])
            for name, res in results.items():
                for r in res["rows"]:
                    out.writerow([name, r["value"], repr(r["logz_mean"]), repr(r["logz_std"]), int(r["argmax"]), r["wins"], r["failures"]])
    return results
