"""Belief propagation on a chain of motion and measurement clusters.

The chain has a prior over the initial state ``x0``, motion clusters
``psi_k(x_{k-1}, x_k, u_k)`` and measurement clusters ``rho_k(x_k, z_k)`` for
``k = 1..K``.  Controls ``u_k`` and measurements ``z_k`` are evidence that is
reduced into the clusters before messages are formed.  Four message families
run over the state sepsets:

* rightward ``fwd[k]``: prior information about ``x_k`` from the past,
* leftward ``bwd[k]``: likelihood of the future given ``x_k``,
* upward ``up[k]``: the reduced measurement cluster,
* downward ``down[k]``: everything except the measurement at ``k``.

Messages are kept unnormalised so that the model evidence can be read off.
"""
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import settings
from .errors import ContractViolation, InferenceInconsistency, ScopeError
from .degenerate import (
    divide,
    is_normalisable,
    kl_divergence,
    marginalise,
    multiply,
    normalise,
    reduce,
    to_dict,
    vacuous,
)


@dataclass
class Cluster:
    label: str
    kind: str
    index: int
    factor: object
    evidence: dict

    def reduced(self):
        if not self.evidence:
            return self.factor
        return reduce(self.factor, self.evidence)


@dataclass
class ClusterGraph:
    """Chain-structured cluster graph.

    ``clusters`` alternates motion and measurement clusters
    ``psi1, rho1, psi2, rho2, ...``; ``state_names[k]`` names ``x_k``.
    """

    prior: object
    clusters: list
    state_names: list

    @property
    def steps(self):
        return len(self.state_names) - 1

    @property
    def sepsets(self):
        """Sepset variable of every edge: one between consecutive motion
        clusters and one between each motion cluster and its measurement."""
        K = self.steps
        return [self.state_names[k] for k in range(1, K)] + [self.state_names[k] for k in range(1, K + 1)]

    def motion(self, k):
        return self.clusters[2 * (k - 1)]

    def measurement(self, k):
        return self.clusters[2 * (k - 1) + 1]


def _evidence_for(factor, value, known, label):
    """Turn an evidence value into a ``{name: value}`` mapping."""
    if value is None:
        return {}
    free = [name for name in factor.scope.names if name not in known]
    if isinstance(value, dict):
        unknown = set(value) - set(free)
        if unknown:
            raise ScopeError(f"{label}: evidence for unknown variables {sorted(unknown)}")
        return dict(value)
    if len(free) != 1:
        raise ScopeError(f"{label}: evidence given as array but factor has variables {free}")
    return {free[0]: np.asarray(value, dtype=float)}


def build_chain(prior, motion_factors, measurement_factors, controls=None, measurements=None, state_names=None):
    """Wire a chain of ``2K`` clusters.

    :param prior: factor over the initial state ``x0``
    :param motion_factors: ``K`` factors over ``(x_{k-1}, x_k)`` and
        optionally control variables
    :param measurement_factors: ``K`` factors over ``x_k`` and optionally
        measurement variables
    :param controls: per-step evidence for the motion factors (dict or array)
    :param measurements: per-step evidence for the measurement factors
    :param state_names: names of ``x_0..x_K``; default ``"x0".."xK"``
    """
    K = len(motion_factors)
    if K < 1 or len(measurement_factors) != K:
        raise ScopeError("need K >= 1 motion factors and as many measurement factors")
    if state_names is None:
        state_names = [f"x{k}" for k in range(K + 1)]
    state_names = list(state_names)
    if len(state_names) != K + 1:
        raise ScopeError("need K + 1 state names")
    if list(prior.scope.names) != [state_names[0]]:
        raise ScopeError(f"prior must be over {state_names[0]!r}, got {prior.scope!r}")
    controls = controls if controls is not None else [None] * K
    measurements = measurements if measurements is not None else [None] * K
    clusters = []
    for k in range(1, K + 1):
        psi, rho = motion_factors[k - 1], measurement_factors[k - 1]
        prev, cur = state_names[k - 1], state_names[k]
        for name in (prev, cur):
            if name not in psi.scope:
                raise ScopeError(f"motion factor {k} lacks state {name!r}")
        if cur not in rho.scope or prev in rho.scope:
            raise ScopeError(f"measurement factor {k} must involve {cur!r} only among states")
        if psi.scope.dim_of(prev) != prior.scope.dim_of(state_names[0]) and k == 1:
            raise ScopeError("prior and first motion factor disagree on the state dimension")
        states = set(state_names)
        clusters.append(Cluster(f"psi{k}", "motion", k, psi, _evidence_for(psi, controls[k - 1], states, f"psi{k}")))
        clusters.append(Cluster(f"rho{k}", "measurement", k, rho, _evidence_for(rho, measurements[k - 1], states, f"rho{k}")))
    return ClusterGraph(prior, clusters, state_names)


@dataclass
class Schedule:
    """Message schedule and stopping rule.

    :param max_sweeps: upper bound on forward-backward sweeps
    :param tol: convergence threshold on the change of any message
    :param variant: ``"sum-product"`` computes leftward messages by
        marginalising products; ``"belief-update"`` divides the cluster
        belief by the incoming rightward message instead
    :param smoothing: when False the leftward messages are not computed
    """

    max_sweeps: int = 50
    tol: float = 1e-6
    variant: str = "sum-product"
    smoothing: bool = True

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ContractViolation("max_sweeps must be at least 1")
        if self.variant not in ("sum-product", "belief-update"):
            raise ContractViolation(f"unknown schedule variant {self.variant!r}")


@dataclass
class MessageSet:
    """Messages keyed by ``(direction, k)`` plus convergence information."""

    graph: ClusterGraph
    messages: dict = field(default_factory=dict)
    converged: bool = False
    sweeps: int = 0
    last_change: float = np.inf

    def __getitem__(self, key):
        return self.messages[key]

    def get(self, direction, k):
        try:
            return self.messages[(direction, k)]
        except KeyError:
            raise ContractViolation(f"no {direction} message at index {k}") from None


def _check(phi, label):
    if phi.is_zero:
        raise InferenceInconsistency(f"contradictory hard constraints at cluster {label}", cluster=label)
    return phi


def _parameter_distance(a, b):
    """Distance between two factors for which KL is unavailable."""
    Ka, Kb = (a.Q * a.lam) @ a.Q.T, (b.Q * b.lam) @ b.Q.T
    d = np.abs(Ka - Kb).max(initial=0.0)
    d = max(d, np.abs(a.Q @ a.h - b.Q @ b.h).max(initial=0.0))
    d = max(d, np.abs(a.R @ a.R.T - b.R @ b.R.T).max(initial=0.0))
    d = max(d, np.abs(a.R @ a.c - b.R @ b.c).max(initial=0.0))
    if np.isfinite(a.g) and np.isfinite(b.g):
        d = max(d, abs(a.g - b.g))
    return float(d)


def message_change(old, new):
    """KL divergence between normalised versions of successive messages,
    or a parameter distance when either cannot be normalised."""
    if old.k != new.k:
        return np.inf
    if settings.moments_only() or not (is_normalisable(old) and is_normalisable(new)):
        return _parameter_distance(old, new)
    kl = kl_divergence(normalise(new), normalise(old))
    return max(kl, abs(new.g - old.g))


def _sweep(graph, schedule):
    K = graph.steps
    names = graph.state_names
    msgs = {}
    motion = {k: _check(graph.motion(k).reduced(), f"psi{k}") for k in range(1, K + 1)}
    for k in range(1, K + 1):
        msgs[("up", k)] = _check(graph.measurement(k).reduced(), f"rho{k}")

    msgs[("fwd", 0)] = graph.prior
    for k in range(1, K + 1):
        joint = multiply(multiply(motion[k], msgs[("fwd", k - 1)]), msgs[("up", k)])
        msgs[("fwd", k)] = _check(marginalise(_check(joint, f"psi{k}"), [names[k - 1]]), f"psi{k}")

    if schedule.smoothing:
        msgs[("bwd", K)] = vacuous([(names[K], msgs[("fwd", K)].n)])
        for k in range(K - 1, -1, -1):
            inner = multiply(motion[k + 1], msgs[("up", k + 1)])
            inner = multiply(inner, msgs[("bwd", k + 1)])
            if schedule.variant == "belief-update":
                belief = _check(multiply(inner, msgs[("fwd", k)]), f"psi{k + 1}")
                sepset = marginalise(belief, [names[k + 1]])
                msgs[("bwd", k)] = _check(divide(sepset, msgs[("fwd", k)]), f"psi{k + 1}")
            else:
                msgs[("bwd", k)] = _check(marginalise(_check(inner, f"psi{k + 1}"), [names[k + 1]]), f"psi{k + 1}")
        for k in range(1, K + 1):
            joint = multiply(multiply(motion[k], msgs[("fwd", k - 1)]), msgs[("bwd", k)])
            msgs[("down", k)] = _check(marginalise(_check(joint, f"psi{k}"), [names[k - 1]]), f"psi{k}")
    return msgs


def _dump(msgs, path):
    rows = [{"direction": d, "k": k, "factor": to_dict(phi)} for (d, k), phi in sorted(msgs.items())]
    with open(path, "w") as fh:
        json.dump(rows, fh)


def pass_messages(graph, schedule=None, trace_dir=None):
    """Run forward-backward sweeps until no message changes by more than
    ``schedule.tol`` or ``schedule.max_sweeps`` is reached.

    :param trace_dir: if given, every sweep's messages are written there as
        ``sweep_NNN.json`` in the factor serialisation format
    :raises InferenceInconsistency: if some message becomes the zero factor
    """
    schedule = schedule or Schedule()
    result = MessageSet(graph)
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
    previous = None
    for sweep in range(1, schedule.max_sweeps + 1):
        msgs = _sweep(graph, schedule)
        if trace_dir is not None:
            _dump(msgs, os.path.join(trace_dir, f"sweep_{sweep:03d}.json"))
        result.messages, result.sweeps = msgs, sweep
        if previous is not None:
            change = max(message_change(previous[key], msgs[key]) for key in msgs)
            result.last_change = change
            if change <= schedule.tol:
                result.converged = True
                break
        previous = msgs
    return result


def posterior(messages, k, normalised=True):
    """Belief over ``x_k``: the product of the rightward and leftward messages.

    Without leftward messages (filtering schedule) this is the filter estimate.
    """
    fwd = messages.get("fwd", k)
    bwd = messages.messages.get(("bwd", k))
    belief = fwd if bwd is None else multiply(fwd, bwd)
    _check(belief, f"x{k}")
    return normalise(belief) if normalised else belief


def log_evidence(messages, k=None):
    """Log of the total mass of the unnormalised joint after all evidence.

    :param k: time step whose belief is integrated; any choice gives the same
        value on a chain, the default is the last step
    """
    if settings.moments_only():
        raise ContractViolation("log evidence is unavailable in moments-only mode")
    if not messages.converged:
        raise ContractViolation("messages have not converged")
    if k is None:
        k = messages.graph.steps
    belief = posterior(messages, k, normalised=False)
    total = marginalise(belief, list(belief.scope.names))
    return float(total.g)
