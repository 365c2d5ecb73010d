"""Built-in numerical self-checks.

Each suite compares the factor algorithms with an independent route:

* ``canonical``: factors without constraints against plain information-form
  arithmetic,
* ``dense-limit``: constrained factors against information-form arithmetic
  on a nearly singular Gaussian,
* ``kalman``: chain inference against a Kalman filter and RTS smoother,
* ``closure``: structural invariants of every operation output.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .canonical import c_divide, c_marginalise, c_multiply, c_reduce
from .degenerate import (
    dense_limit_oracle,
    divide,
    from_gaussian,
    marginalise,
    moments,
    multiply,
    reduce,
    represent_conditional,
    to_canonical,
    validate,
)
from .graph import build_chain, pass_messages, posterior
from .randomfactors import random_factor, split_scope

SUITES = ("canonical", "dense-limit", "kalman", "closure")


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    worst: float = 0.0
    seconds: float = 0.0

    @property
    def passed(self):
        return not self.failures

    def record(self, case, error, tol):
        self.cases += 1
        self.worst = max(self.worst, error)
        if not error <= tol:
            self.failures.append(f"case {case}: error {error:.3g} > {tol:.1g}")


def _canonical_error(phi, cf):
    ref = to_canonical(phi)
    return max(np.abs(ref.K - cf.K).max(), np.abs(ref.h - cf.h).max(), abs(ref.g - cf.g))


def _vars_split(rng, scope):
    names = list(scope.names)
    m = int(rng.integers(1, len(names)))
    chosen = list(rng.choice(names, size=m, replace=False))
    return [str(v) for v in chosen]


def canonical_suite(rng, cases=100, tol=1e-9):
    res = SuiteResult("canonical")
    for i in range(cases):
        n = int(rng.integers(2, 7))
        scope = split_scope(n)
        a, b = random_factor(rng, n, scope=scope), random_factor(rng, n, scope=scope)
        A, B = to_canonical(a), to_canonical(b)
        res.record(f"{i} multiply", _canonical_error(multiply(a, b), c_multiply(A, B)), tol)
        ab = multiply(a, b)
        res.record(f"{i} divide", _canonical_error(divide(ab, b), c_divide(to_canonical(ab), B)), tol)
        out = _vars_split(rng, scope)
        res.record(f"{i} marginalise", _canonical_error(marginalise(a, out), c_marginalise(A, out)), tol)
        ev = {name: rng.standard_normal(scope.dim_of(name)) for name in out}
        res.record(f"{i} reduce", _canonical_error(reduce(a, ev), c_reduce(A, ev)), tol)
    return res


def extrapolated_moments(build, steps=(1e-4, 1e-6, 1e-8)):
    """Moments of ``build(a)`` extrapolated to ``a = 0``.

    The dense proxy is biased by a term linear in ``a``; combining the two
    smallest steps cancels it (Richardson extrapolation).
    """
    (m1, c1), (m2, c2) = (build(a).moments() for a in steps[-2:])
    a1, a2 = steps[-2:]
    w = a1 / (a1 - a2)
    return w * m2 + (1.0 - w) * m1, w * c2 + (1.0 - w) * c1


def well_conditioned(R, floor=0.1):
    """True when the constraint directions ``R`` are far from dependent.

    The dense proxy approaches its limit only once ``a`` is small against
    the squared smallest singular value, so near-dependent constraints are
    excluded from the comparison.
    """
    if R.shape[1] == 0:
        return True
    if R.shape[0] < R.shape[1]:
        return False
    return np.linalg.svd(R, compute_uv=False)[-1] >= floor


def _moment_error(phi, ref):
    m = moments(phi)
    mean, cov = ref
    scale = 1.0 + np.abs(cov).max() + np.abs(mean).max()
    return max(np.abs(m.mean - mean).max(), np.abs(m.cov - cov).max()) / scale


def dense_limit_suite(rng, cases=50, tol=1e-5):
    res = SuiteResult("dense-limit")
    for i in range(cases):
        n = int(rng.integers(3, 7))
        scope = split_scope(n)
        k = int(rng.integers(1, n))
        phi = random_factor(rng, n, k, scope=scope)
        out = _vars_split(rng, scope)
        ref = extrapolated_moments(lambda a: c_marginalise(dense_limit_oracle(phi, a), out))
        res.record(f"{i} marginalise", _moment_error(marginalise(phi, out), ref), tol)
        kept = [v for v in scope.names if v not in out]
        if well_conditioned(phi.R[scope.indices(kept)]):
            ev = {name: rng.standard_normal(scope.dim_of(name)) for name in out}
            ref = extrapolated_moments(lambda a: c_reduce(dense_limit_oracle(phi, a), ev))
            res.record(f"{i} reduce", _moment_error(reduce(phi, ev), ref), tol)
        k1 = int(rng.integers(0, n))
        k2 = int(rng.integers(0, n - k1))
        p, q = random_factor(rng, n, k1, scope=scope), random_factor(rng, n, k2, scope=scope)
        if not well_conditioned(np.hstack([p.R, q.R])):
            continue
        ref = extrapolated_moments(lambda a: c_multiply(dense_limit_oracle(p, a), dense_limit_oracle(q, a)))
        res.record(f"{i} multiply", _moment_error(multiply(p, q), ref), tol)
    return res


def _linear_chain(rng, steps=5):
    F = np.array([[1.0, 0.5], [0.0, 1.0]]) + 0.1 * rng.standard_normal((2, 2))
    H = np.array([[1.0, 0.0]])
    Qw = np.diag(rng.uniform(0.05, 0.3, 2))
    Rv = np.array([[rng.uniform(0.1, 0.5)]])
    m0, P0 = rng.standard_normal(2), np.eye(2)
    zs = [rng.standard_normal(1) for _ in range(steps)]
    return F, H, Qw, Rv, m0, P0, zs


def kalman_rts(F, H, Qw, Rv, m0, P0, zs):
    """Filtered and smoothed means and covariances for steps ``1..K``."""
    mf, Pf, mp, Pp = [], [], [], []
    m, P = m0, P0
    for z in zs:
        m_pred, P_pred = F @ m, F @ P @ F.T + Qw
        S = H @ P_pred @ H.T + Rv
        G = P_pred @ H.T @ np.linalg.inv(S)
        m = m_pred + G @ (z - H @ m_pred)
        P = (np.eye(len(m)) - G @ H) @ P_pred
        mp.append(m_pred), Pp.append(P_pred), mf.append(m), Pf.append(P)
    ms, Ps = [mf[-1]], [Pf[-1]]
    for k in range(len(zs) - 2, -1, -1):
        C = Pf[k] @ F.T @ np.linalg.inv(Pp[k + 1])
        ms.insert(0, mf[k] + C @ (ms[0] - mp[k + 1]))
        Ps.insert(0, Pf[k] + C @ (Ps[0] - Pp[k + 1]) @ C.T)
    return mf, Pf, ms, Ps


def chain_factors(F, H, Qw, Rv, m0, P0, zs):
    K = len(zs)
    prior = from_gaussian(m0, P0, scope=[("x0", 2)])
    motion = [
        represent_conditional(from_gaussian(np.zeros(2), Qw, scope=[(f"x{k}", 2)]), F, np.zeros(2), [(f"x{k - 1}", 2)])
        for k in range(1, K + 1)
    ]
    meas = [
        represent_conditional(from_gaussian(np.zeros(1), Rv, scope=[(f"z{k}", 1)]), H, np.zeros(1), [(f"x{k}", 2)])
        for k in range(1, K + 1)
    ]
    return prior, motion, meas


def kalman_suite(rng, cases=20, tol=1e-8):
    res = SuiteResult("kalman")
    for i in range(cases):
        model = _linear_chain(rng)
        _, _, ms, Ps = kalman_rts(*model)
        prior, motion, meas = chain_factors(*model)
        graph = build_chain(prior, motion, meas, measurements=model[-1])
        msgs = pass_messages(graph)
        err = 0.0
        for k in range(1, len(ms) + 1):
            m = moments(posterior(msgs, k))
            err = max(err, np.abs(m.mean - ms[k - 1]).max(), np.abs(m.cov - Ps[k - 1]).max())
        res.record(i, err, tol)
    return res


def _flip(phi):
    return phi if phi.is_zero else phi.replace(lam=-phi.lam)


def closure_suite(rng, cases=100, tol=1e-10, mutate=False):
    """Structural invariants of operation outputs; ``mutate`` flips the sign
    of every output precision, which the suite must detect."""
    res = SuiteResult("closure")
    post = _flip if mutate else (lambda phi: phi)
    for i in range(cases):
        n = int(rng.integers(2, 7))
        scope = split_scope(n)
        k = int(rng.integers(0, n))
        a = random_factor(rng, n, k, scope=scope)
        b = random_factor(rng, n, int(rng.integers(0, n - k)), scope=scope)
        out = _vars_split(rng, scope)
        outputs = {"multiply": multiply(a, b), "marginalise": marginalise(a, out)}
        kept = [v for v in scope.names if v not in out]
        if scope.subset(kept).dim >= k:
            outputs["reduce"] = reduce(a, {v: rng.standard_normal(scope.dim_of(v)) for v in out})
        outputs["divide"] = divide(outputs["multiply"], b)
        for name, phi in outputs.items():
            problems = validate(post(phi), tol)
            res.record(f"{i} {name}", float(len(problems)), 0.0)
            if problems:
                res.failures[-1] += f" ({'; '.join(problems)})"
    return res


def run_selftest(seed=0, cases=None, mutate=False, suites=SUITES):
    """Run the suites and return their results in order."""
    runners = {
        "canonical": lambda rng: canonical_suite(rng, **({"cases": cases} if cases else {})),
        "dense-limit": lambda rng: dense_limit_suite(rng, **({"cases": cases} if cases else {})),
        "kalman": lambda rng: kalman_suite(rng, **({"cases": cases} if cases else {})),
        "closure": lambda rng: closure_suite(rng, mutate=mutate, **({"cases": cases} if cases else {})),
    }
    results = []
    for i, name in enumerate(suites):
        start = time.perf_counter()
        res = runners[name](np.random.default_rng([seed, i]))
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results
