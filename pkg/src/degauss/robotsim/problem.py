"""Estimation problem for a simulated run.

The fleet state ``x_k`` stacks the poses of all robots.  Motion clusters
are over ``(x_{k-1}, x_k, u_k)`` and measurement clusters over ``(x_k, z_k)``.
Both are obtained by statistical linearisation around the filtered belief,
so the factors are built during one forward pass.  During the cooperation
window of a hypothesis the measurement vector gains noiseless rigid-body rows,
which makes the measurement noise degenerate.
"""
from dataclasses import dataclass, field

import numpy as np

from ..degenerate import (
    UnscentedParams,
    dirac,
    equivalent_transformation,
    from_gaussian,
    marginalise,
    moments,
    multiply,
    normalise,
    reduce,
    represent_conditional,
)
from ..errors import InferenceInconsistency, InvalidInputError
from ..graph import build_chain
from .models import fleet_auxiliary, fleet_motion, fleet_positions

METHODS = ("degenerate", "ridge", "no-auxiliary")


def condition_number(M):
    """Ratio of the largest to the smallest eigenvalue of a symmetric PSD matrix."""
    w = np.clip(np.linalg.eigvalsh(M), 0.0, None)
    if w.size == 0:
        return 1.0
    return np.inf if w[0] == 0.0 else float(w[-1] / w[0])


def ridge_baseline(singular_cov, lam):
    """Add ``lam`` to the diagonal of a singular covariance.

    :return: ``(covariance, kappa)`` with the condition number ``kappa`` of
        the regularised matrix
    """
    if not lam > 0:
        raise InvalidInputError("ridge parameter must be positive")
    S = np.asarray(singular_cov, dtype=float)
    out = S + lam * np.eye(S.shape[0])
    return out, condition_number(out)


@dataclass
class EstimationProblem:
    """Factors, evidence and chain for one hypothesis and method."""

    hypothesis: object
    method: str
    prior: object
    motion_factors: list
    measurement_factors: list
    controls: list
    measurements: list
    graph: object
    max_condition: float = 1.0
    noise_degeneracy: list = field(default_factory=list)


def _uses_auxiliary(hypothesis, method, k):
    return method != "no-auxiliary" and hypothesis.in_window(k)


def measurement_vector(record, hypothesis, method, k):
    """Measurement ``z_k`` under a hypothesis: position fixes, followed by
    the hypothesised object geometry during its window."""
    z = record.positions[k - 1].ravel()
    if _uses_auxiliary(hypothesis, method, k):
        z = np.concatenate([z, hypothesis.auxiliary_targets()])
    return z


def _measurement_noise(hypothesis, method, k):
    N = hypothesis.robot_count
    Sv = np.kron(np.eye(N), np.array(hypothesis.measurement_noise))
    if not _uses_auxiliary(hypothesis, method, k):
        return Sv, 0
    m = 2 * (len(hypothesis.cooperating) - 1)
    cov = np.zeros((2 * N + m, 2 * N + m))
    cov[: 2 * N, : 2 * N] = Sv
    return cov, m


def build_problem(record, hypothesis=None, method="degenerate", ridge=1e-4, params=UnscentedParams()):
    """Linearise the models along the filtered trajectory and wire the chain.

    :param record: simulated run providing controls and position fixes
    :param hypothesis: configuration whose window and object size are
        assumed; defaults to the simulated configuration
    :param method: ``"degenerate"`` keeps the rigid-body rows exact,
        ``"ridge"`` adds ``ridge`` to the diagonal of their singular noise
        covariance, ``"no-auxiliary"`` drops them
    """
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}; choose from {METHODS}")
    hyp = hypothesis if hypothesis is not None else record.config
    if hyp.robot_count != record.config.robot_count or hyp.steps != record.config.steps:
        raise InvalidInputError("hypothesis and record disagree on fleet size or horizon")
    N, K = hyp.robot_count, hyp.steps
    n = 3 * N
    group = list(hyp.cooperating)
    Sw = np.kron(np.eye(N), np.array(hyp.motion_noise))

    prior = from_gaussian(hyp.start_poses().ravel(), hyp.prior_variance * np.eye(n), scope=[("x0", n)])
    fwd = prior
    motion_factors, measurement_factors, controls, measurements = [], [], [], []
    kappa, degeneracy = 1.0, []
    for k in range(1, K + 1):
        xp, xk, uk, zk = f"x{k - 1}", f"x{k}", f"u{k}", f"z{k}"
        u = record.controls[k - 1].ravel()

        context = multiply(normalise(fwd), dirac([(uk, n)], u))
        context = multiply(context, from_gaussian(np.zeros(n), Sw, scope=[(f"w{k}", n)]))
        A, b, noise = equivalent_transformation(
            context, lambda s, w: fleet_motion(s[:n], s[n:], w), [xp, uk], params, noise_scope=[(xk, n)]
        )
        psi = represent_conditional(noise, A, b, [(xp, n), (uk, n)], [(xk, n)])
        pred = marginalise(multiply(reduce(psi, {uk: u}), fwd), [xp])

        cov_v, m = _measurement_noise(hyp, method, k)
        nz = cov_v.shape[0]

        def observe(s, v, aux=m > 0):
            y = fleet_positions(s)
            if aux:
                y = np.concatenate([y, fleet_auxiliary(s, group)])
            return y + v

        context = multiply(normalise(pred), from_gaussian(np.zeros(nz), cov_v, scope=[(f"v{k}", nz)]))
        A, b, noise = equivalent_transformation(context, observe, [xk], params)
        resid = moments(noise).cov.copy()
        if m:
            # The rigid-body rows are exact; linearisation error is not noise.
            resid[2 * N :, :] = 0.0
            resid[:, 2 * N :] = 0.0
        if m and method == "ridge":
            resid, cond = ridge_baseline(resid, ridge)
            kappa = max(kappa, cond)
            noise = from_gaussian(np.zeros(nz), resid, scope=[(zk, nz)], rtol=0.0)
        else:
            noise = from_gaussian(np.zeros(nz), resid, scope=[(zk, nz)])
        degeneracy.append(noise.k)
        rho = represent_conditional(noise, A, b, [(xk, n)], [(zk, nz)])
        z = measurement_vector(record, hyp, method, k)

        fwd = multiply(pred, reduce(rho, {zk: z}))
        if fwd.is_zero:
            raise InferenceInconsistency(f"measurement {k} contradicts the hard constraints", cluster=f"rho{k}")
        motion_factors.append(psi)
        measurement_factors.append(rho)
        controls.append({uk: u})
        measurements.append({zk: z})

    graph = build_chain(prior, motion_factors, measurement_factors, controls, measurements)
    return EstimationProblem(hyp, method, prior, motion_factors, measurement_factors, controls, measurements, graph, kappa, degeneracy)
