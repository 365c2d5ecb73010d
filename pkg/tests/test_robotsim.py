import math

import numpy as np
import pytest

from degauss.degenerate import moments, normalise, reduce
from degauss.errors import InvalidInputError
from degauss.robotsim import (
    ControlInput,
    Pose,
    WorldConfig,
    auxiliary_measurement,
    build_problem,
    condition_number,
    measurement_vector,
    motion_step,
    position_measurement,
    read_record,
    ridge_baseline,
    simulate,
    wrap_angle,
    write_record,
)

QUIET = WorldConfig(motion_noise=np.zeros((3, 3)), measurement_noise=np.zeros((2, 2)))


def scalar_motion(x, y, th, a, r, b, w1, w2, w3):
    """Odometry step written out with math-module scalars."""
    nx = x + r * math.cos(th + a) + w1
    ny = y + r * math.sin(th + a) + w2
    nt = math.remainder(th + a + b + w3, 2 * math.pi)
    if nt == -math.pi:
        nt = math.pi
    return nx, ny, nt


def test_motion_step_examples():
    np.testing.assert_allclose(motion_step(Pose(2.0, 3.0, 0.0), ControlInput(0.0, 1.0, 0.0)), (3.0, 3.0, 0.0))
    np.testing.assert_allclose(motion_step(Pose(0.0, 0.0, 0.0), ControlInput(np.pi / 2, 1.0, 0.0)), (0.0, 1.0, np.pi / 2), atol=1e-15)


def test_motion_step_matches_scalar_recomputation(rng):
    for _ in range(200):
        pose = rng.uniform(-5, 5, 3)
        u = rng.uniform(-4, 4, 3)
        w = rng.normal(0, 0.3, 3)
        got = motion_step(Pose(*pose), ControlInput(*u), w)
        np.testing.assert_allclose(got, scalar_motion(*pose, *u, *w), atol=1e-12)


def test_wrap_angle_interval():
    np.testing.assert_allclose(wrap_angle([-np.pi, np.pi, 3 * np.pi, 0.5]), [np.pi, np.pi, np.pi, 0.5])


def test_position_measurement_examples():
    np.testing.assert_allclose(position_measurement(Pose(1.0, 2.0, 0.3)), [1.0, 2.0])
    np.testing.assert_allclose(position_measurement(Pose(1.0, 2.0, 0.3), (0.1, -0.1)), [1.1, 1.9])


def test_position_noise_monte_carlo():
    rng = np.random.default_rng(7)
    Sv = np.array([[0.04, 0.01], [0.01, 0.02]])
    n = 100_000
    v = rng.multivariate_normal(np.zeros(2), Sv, size=n)
    z = np.array([position_measurement((1.0, 2.0, 0.0), vi) for vi in v[:2000]])
    np.testing.assert_allclose(z - [1.0, 2.0], v[:2000], atol=1e-15)
    S = np.cov(v.T)
    # Standard error of a sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / n).
    se = np.sqrt((np.outer(np.diag(Sv), np.diag(Sv)) + Sv**2) / n)
    assert np.all(np.abs(S - Sv) <= 3 * se)


def test_auxiliary_measurement_examples():
    np.testing.assert_allclose(auxiliary_measurement([(0.0, 0.0, 0.0), (3.0, 4.0, np.pi / 2)]), [5.0, np.pi / 2])
    np.testing.assert_allclose(auxiliary_measurement([(1.0, 1.0, 0.2)] * 2), [0.0, 0.0])
    poses = [(0.0, 0.0, 0.1), (1.0, 2.0, -0.4), (-2.0, 0.5, 3.0)]
    expected = [math.hypot(1.0, 2.0), -0.5, math.hypot(3.0, 1.5), math.remainder(3.4, 2 * math.pi)]
    np.testing.assert_allclose(auxiliary_measurement(poses), expected)
    with pytest.raises(ValueError):
        auxiliary_measurement([(0.0, 0.0, 0.0)])


def test_simulation_is_deterministic():
    a, b = simulate(WorldConfig(seed=3)), simulate(WorldConfig(seed=3))
    np.testing.assert_array_equal(a.poses, b.poses)
    np.testing.assert_array_equal(a.controls, b.controls)
    np.testing.assert_array_equal(a.positions, b.positions)
    c = simulate(WorldConfig(seed=4))
    assert not np.array_equal(a.positions, c.positions)


def test_auxiliary_rows_only_in_window():
    record = simulate(WorldConfig())
    assert sorted(record.auxiliary) == list(range(11, 31))
    assert record.measurement(10).shape == (6,)
    assert record.measurement(11).shape == (10,)
    assert record.measurement(11, include_auxiliary=False).shape == (6,)


def test_rigid_geometry_is_constant():
    for seed in range(3):
        record = simulate(WorldConfig(seed=seed))
        values = np.array([record.auxiliary[k] for k in sorted(record.auxiliary)])
        assert np.abs(values - values[0]).max() <= 1e-12
        np.testing.assert_allclose(values[0], record.config.auxiliary_targets(), atol=1e-12)


def test_noise_free_controls_reproduce_trajectory():
    record = simulate(QUIET)
    for k in range(1, record.steps + 1):
        for j in range(QUIET.robot_count):
            step = motion_step(Pose(*record.poses[k - 1, j]), ControlInput(*record.controls[k - 1, j]))
            np.testing.assert_allclose(step[:2], record.poses[k, j, :2], atol=1e-12)
            assert abs(wrap_angle(step[2] - record.poses[k, j, 2])) <= 1e-12
    np.testing.assert_allclose(record.positions, record.poses[1:, :, :2], atol=1e-15)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        WorldConfig(window=(0, 30))
    with pytest.raises(InvalidInputError):
        WorldConfig(window=(31, 30))
    with pytest.raises(InvalidInputError):
        WorldConfig(cooperating=(0,), formation=((1.0, 0.0, 0.0),))
    with pytest.raises(InvalidInputError):
        WorldConfig(motion_noise=np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        WorldConfig(measurement_noise=[[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        WorldConfig(size=0.0)
    with pytest.raises(InvalidInputError):
        WorldConfig(formation=((1.0, 0.0, 0.0), (1.05, 0.0, 0.0), (0.0, 1.0, 0.0)))
    assert WorldConfig(window=None, cooperating=(0,), formation=((1.0, 0.0, 0.0),)).pickup_step is None
    assert WorldConfig().pickup_step == 10


def test_record_csv_round_trip(tmp_path):
    record = simulate(WorldConfig(seed=2))
    write_record(record, tmp_path)
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "k,robot,x,y,theta,u_alpha,u_r,u_beta,z_x,z_y"
    back = read_record(record.config, tmp_path)
    np.testing.assert_array_equal(back.poses, record.poses)
    np.testing.assert_array_equal(back.controls, record.controls)
    np.testing.assert_array_equal(back.positions, record.positions)
    assert sorted(back.auxiliary) == sorted(record.auxiliary)
    for k in record.auxiliary:
        np.testing.assert_array_equal(back.auxiliary[k], record.auxiliary[k])


def test_problem_structure_and_degeneracy():
    record = simulate(WorldConfig(seed=1))
    problem = build_problem(record)
    assert len(problem.graph.clusters) == 80
    expected = [4 if 11 <= k <= 30 else 0 for k in range(1, 41)]
    assert problem.noise_degeneracy == expected
    assert build_problem(record, method="no-auxiliary").noise_degeneracy == [0] * 40
    assert build_problem(record, method="ridge", ridge=1e-3).noise_degeneracy == [0] * 40


def test_position_rows_are_linear():
    cfg = WorldConfig(seed=1, steps=12, window=(5, 12))
    record = simulate(cfg)
    problem = build_problem(record)
    n = 3 * cfg.robot_count
    rng = np.random.default_rng(0)
    for k in (3, 8):
        rho = problem.measurement_factors[k - 1]
        x0 = record.poses[k].ravel()
        dx = 0.01 * rng.standard_normal(n)
        m0 = moments(normalise(reduce(rho, {f"x{k}": x0}))).mean
        m1 = moments(normalise(reduce(rho, {f"x{k}": x0 + dx}))).mean
        sel = dx.reshape(-1, 3)[:, :2].ravel()
        np.testing.assert_allclose(m1[: 2 * cfg.robot_count] - m0[: 2 * cfg.robot_count], sel, atol=1e-8)


def test_measurement_vector_uses_hypothesis():
    record = simulate(WorldConfig(seed=0))
    hyp = record.config.replace(size=1.2)
    z = measurement_vector(record, hyp, "degenerate", 15)
    np.testing.assert_allclose(z[6:], hyp.auxiliary_targets())
    assert measurement_vector(record, hyp, "no-auxiliary", 15).shape == (6,)


def test_ridge_baseline_examples():
    out, kappa = ridge_baseline(np.zeros((2, 2)), 1.0)
    np.testing.assert_array_equal(out, np.eye(2))
    assert kappa == 1.0
    _, kappa = ridge_baseline(np.diag([1.0, 0.0]), 1e-6)
    assert kappa == pytest.approx(1e6 + 1)
    with pytest.raises(InvalidInputError):
        ridge_baseline(np.eye(2), 0.0)


def test_ridge_condition_monotone():
    S = np.diag([2.0, 0.5, 0.0, 0.0])
    kappas = [ridge_baseline(S, lam)[1] for lam in np.logspace(-12, 0, 13)]
    assert all(b <= a for a, b in zip(kappas, kappas[1:]))
    assert condition_number(np.zeros((2, 2))) == np.inf
