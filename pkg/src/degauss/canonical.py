"""Canonical (information form) Gaussian factors exp(-x'Kx/2 + h'x + g)."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegeneracyDetectedError, InvalidInputError, NotNormalisableError, ScopeError
from .scope import Scope, as_scope

LOG_2PI = np.log(2.0 * np.pi)


def _sym(K):
    return 0.5 * (K + K.T)


def _cholesky(K, error):
    """Cholesky factor of a positive definite matrix, else raise ``error``."""
    if K.shape[0] == 0:
        return np.zeros((0, 0))
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        raise error("matrix is not positive definite") from None
    d = np.diag(L)
    if d.min() <= np.sqrt(K.shape[0] * np.finfo(float).eps) * d.max():
        raise error("matrix is numerically singular")
    return L


def _solve_pd(L, b):
    if L.shape[0] == 0:
        return np.zeros_like(b)
    return scipy.linalg.cho_solve((L, True), b)


def _logdet_from_chol(L):
    return 2.0 * float(np.sum(np.log(np.diag(L))))


@dataclass(frozen=True, eq=False)
class CanonicalFactor:
    """Factor ``exp(-0.5 x'Kx + h'x + g)`` over a named scope."""

    scope: Scope
    K: np.ndarray
    h: np.ndarray
    g: float

    def __post_init__(self):
        scope = as_scope(self.scope)
        K = np.atleast_2d(np.asarray(self.K, dtype=float)).reshape(scope.dim, scope.dim)
        h = np.asarray(self.h, dtype=float).reshape(scope.dim)
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(h))):
            raise InvalidInputError("canonical parameters must be finite")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "K", _sym(K))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", float(self.g))

    @property
    def n(self):
        return self.scope.dim

    def log_value(self, x):
        """Log of the factor at ``x``."""
        x = np.asarray(x, dtype=float)
        return float(-0.5 * x @ self.K @ x + self.h @ x + self.g)

    def moments(self):
        """Mean and covariance; requires positive definite ``K``."""
        L = _cholesky(self.K, NotNormalisableError)
        cov = _solve_pd(L, np.eye(self.n))
        return _solve_pd(L, self.h), _sym(cov)

    def is_normalised(self, tol=1e-9):
        return abs(self.g - normalising_g(self.K, self.h)) <= tol * (1.0 + abs(self.g))


def vacuous(scope):
    """The factor identically equal to one."""
    scope = as_scope(scope)
    n = scope.dim
    return CanonicalFactor(scope, np.zeros((n, n)), np.zeros(n), 0.0)


def normalising_g(K, h):
    """The ``g`` that makes ``exp(-x'Kx/2 + h'x + g)`` integrate to one.

    :raises NotNormalisableError: if ``K`` is not positive definite
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    L = _cholesky(_sym(K), NotNormalisableError)
    n = K.shape[0]
    return float(-0.5 * h @ _solve_pd(L, h) - 0.5 * n * LOG_2PI + 0.5 * _logdet_from_chol(L))


def from_moments(mean, cov, scope=None):
    """Normalised canonical factor of ``N(mean, cov)`` for positive definite ``cov``."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    scope = as_scope(scope if scope is not None else mean.size)
    L = _cholesky(_sym(cov), InvalidInputError)
    K = _solve_pd(L, np.eye(mean.size))
    h = K @ mean
    return CanonicalFactor(scope, K, h, normalising_g(K, h))


def _require_same_scope(a, b):
    if a.scope != b.scope:
        raise ScopeError(f"scopes differ: {a.scope!r} vs {b.scope!r}")


def c_multiply(a, b):
    """Product of two factors over the same scope."""
    _require_same_scope(a, b)
    return CanonicalFactor(a.scope, a.K + b.K, a.h + b.h, a.g + b.g)


def c_divide(a, b):
    """Quotient ``a / b`` of two factors over the same scope."""
    _require_same_scope(a, b)
    return CanonicalFactor(a.scope, a.K - b.K, a.h - b.h, a.g - b.g)


def c_marginalise(phi, out_vars):
    """Integrate the variables ``out_vars`` out of ``phi``.

    :raises DegeneracyDetectedError: if the precision block of the integrated
        variables is not positive definite
    """
    out_vars = list(out_vars)
    keep = [n for n in phi.scope.names if n not in out_vars]
    if not out_vars:
        return phi
    ix, iy = phi.scope.indices(keep), phi.scope.indices(out_vars)
    Kxx, Kxy, Kyy = phi.K[np.ix_(ix, ix)], phi.K[np.ix_(ix, iy)], phi.K[np.ix_(iy, iy)]
    hx, hy = phi.h[ix], phi.h[iy]
    L = _cholesky(_sym(Kyy), DegeneracyDetectedError)
    KyyInv_hy = _solve_pd(L, hy)
    KyyInv_Kyx = _solve_pd(L, Kxy.T)
    K = Kxx - Kxy @ KyyInv_Kyx
    h = hx - Kxy @ KyyInv_hy
    # 0.5 log|2 pi Kyy^-1| = 0.5 (m log 2 pi - log|Kyy|)
    g = phi.g + 0.5 * hy @ KyyInv_hy + 0.5 * (iy.size * LOG_2PI - _logdet_from_chol(L))
    return CanonicalFactor(phi.scope.subset(keep), K, h, g)


def c_reduce(phi, evidence):
    """Condition on observed values.

    :param evidence: mapping from variable name to observed value
    """
    obs = list(evidence)
    for name in obs:
        if name not in phi.scope:
            raise ScopeError(f"evidence variable {name!r} not in {phi.scope!r}")
    keep = [n for n in phi.scope.names if n not in evidence]
    ix, iy = phi.scope.indices(keep), phi.scope.indices(obs)
    y0 = phi.scope.subset(obs).stack(evidence)
    Kxx, Kxy, Kyy = phi.K[np.ix_(ix, ix)], phi.K[np.ix_(ix, iy)], phi.K[np.ix_(iy, iy)]
    h = phi.h[ix] - Kxy @ y0
    g = phi.g + phi.h[iy] @ y0 - 0.5 * y0 @ Kyy @ y0
    return CanonicalFactor(phi.scope.subset(keep), Kxx, h, g)


def c_rescope_affine(phi, A, b, scope=None):
    """Express ``phi(A x + b)`` as a canonical factor over ``x``.

    :param scope: scope of ``x``; defaults to a single variable ``"x"``
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape[0] != phi.n or b.size != phi.n:
        raise ScopeError("affine map does not match the factor dimension")
    scope = as_scope(scope if scope is not None else A.shape[1])
    if scope.dim != A.shape[1]:
        raise ScopeError("scope does not match the columns of A")
    Kb = phi.K @ b
    K = A.T @ phi.K @ A
    h = A.T @ (phi.h - Kb)
    g = phi.g + (phi.h - 0.5 * Kb) @ b
    return CanonicalFactor(scope, K, h, g)
