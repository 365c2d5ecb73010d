"""The degenerate Gaussian factor type and its unary operations.

A factor over an n-vector x is

    D(x) = exp(-0.5 e'Le + h'e + g) * delta(R'x - c),   e = Q'x

where ``[Q R]`` is an n-by-n orthogonal matrix, ``L = diag(lam)`` holds the
non-negative precisions of the Gaussian part (stored in descending order),
and the Dirac part pins x to the affine set ``R'x = c``.  The number of
columns of ``R`` is the degree of degeneracy ``k``.
"""
from dataclasses import dataclass

import numpy as np

from .. import settings
from ..canonical import CanonicalFactor
from ..errors import (
    InfiniteVarianceError,
    InvalidInputError,
    NotNormalisableError,
    ScopeError,
)
from ..scope import Scope, as_scope
from ..subspace import complement, psd_basis, psd_eig

LOG_2PI = np.log(2.0 * np.pi)

#: Returned by :func:`log_density` for points off the support.
OFF_MANIFOLD = -np.inf


def _as_columns(M, n):
    M = np.asarray(M, dtype=float)
    if M.ndim == 2:
        return M
    if M.size == 0:
        return np.zeros((n, 0))
    return M.reshape(n, -1)


@dataclass(frozen=True, eq=False)
class DegenerateFactor:
    """Canonical factor in the ``Q`` coordinates times a Dirac delta in ``R``.

    :param scope: named partition of the n-dimensional argument
    :param Q: n x (n-k) orthonormal basis of the Gaussian directions
    :param R: n x k orthonormal basis of the constrained directions
    :param lam: (n-k,) non-negative precisions, descending
    :param h: (n-k,) linear coefficients in the ``Q`` coordinates
    :param c: (k,) constraint offsets, ``R'x = c`` on the support
    :param g: log-measure constant
    """

    scope: Scope
    Q: np.ndarray
    R: np.ndarray
    lam: np.ndarray
    h: np.ndarray
    c: np.ndarray
    g: float

    def __post_init__(self):
        scope = as_scope(self.scope)
        n = scope.dim
        Q = _as_columns(self.Q, n)
        R = _as_columns(self.R, n)
        lam = np.asarray(self.lam, dtype=float).reshape(-1)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if Q.shape[1] + R.shape[1] != n or lam.size != Q.shape[1] or h.size != Q.shape[1] or c.size != R.shape[1]:
            raise InvalidInputError(
                f"inconsistent shapes: n={n}, Q{Q.shape}, R{R.shape}, lam{lam.shape}, h{h.shape}, c{c.shape}"
            )
        for name, arr in (("Q", Q), ("R", R), ("lam", lam), ("h", h), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} has non-finite entries")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", float(self.g))

    @property
    def n(self):
        return self.scope.dim

    @property
    def k(self):
        return self.R.shape[1]

    @property
    def is_zero(self):
        return False

    def replace(self, **changes):
        fields = dict(scope=self.scope, Q=self.Q, R=self.R, lam=self.lam, h=self.h, c=self.c, g=self.g)
        fields.update(changes)
        return DegenerateFactor(**fields)

    def __repr__(self):
        return f"DegenerateFactor({self.scope!r}, k={self.k}, lam={np.array2string(self.lam, precision=4)}, g={self.g:.6g})"


@dataclass(frozen=True)
class ZeroFactor:
    """The factor that is identically zero.

    Produced when hard constraints contradict each other, so that callers can
    short-circuit instead of handling an exception.
    """

    scope: Scope

    @property
    def n(self):
        return self.scope.dim

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True, eq=False)
class Moments:
    mean: np.ndarray
    cov: np.ndarray
    rank: int


def make_factor(scope, Q, R, lam, h, c, g):
    """Build a factor, sorting the Gaussian directions by descending precision."""
    lam = np.asarray(lam, dtype=float).reshape(-1)
    order = np.argsort(-lam, kind="stable")
    Q = np.asarray(Q, dtype=float)
    h = np.asarray(h, dtype=float).reshape(-1)
    if settings.moments_only():
        g = np.nan
    return DegenerateFactor(scope, Q[:, order], R, lam[order], h[order], c, g)


def normalising_g(lam, h):
    """Log-measure that normalises a factor with precisions ``lam`` and
    coefficients ``h``; raises if any precision is zero."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise NotNormalisableError("factor has a zero precision direction")
    return float(-0.5 * np.sum(h * h / lam) - 0.5 * np.sum(LOG_2PI - np.log(lam)))


def is_normalisable(phi):
    return not phi.is_zero and bool(np.all(phi.lam > 0))


def normalise(phi):
    """Copy of ``phi`` with ``g`` chosen so that it integrates to one."""
    if phi.is_zero:
        raise NotNormalisableError("the zero factor cannot be normalised")
    g = np.nan if settings.moments_only() else normalising_g(phi.lam, phi.h)
    return phi.replace(g=g)


def is_normalised(phi, tol=1e-8):
    if not is_normalisable(phi):
        return False
    return abs(phi.g - normalising_g(phi.lam, phi.h)) <= tol * (1.0 + abs(phi.g))


def moments(phi):
    """Mean ``Q lam^-1 h + R c`` and covariance ``Q lam^-1 Q'``."""
    if phi.is_zero:
        raise InfiniteVarianceError("the zero factor has no moments")
    if np.any(phi.lam <= 0):
        raise InfiniteVarianceError("factor has a direction with zero precision")
    mean = phi.Q @ (phi.h / phi.lam) + phi.R @ phi.c
    cov = (phi.Q / phi.lam) @ phi.Q.T
    return Moments(mean, 0.5 * (cov + cov.T), phi.n - phi.k)


def vacuous(scope):
    """The factor identically equal to one over ``scope``."""
    scope = as_scope(scope)
    n = scope.dim
    return DegenerateFactor(scope, np.eye(n), np.zeros((n, 0)), np.zeros(n), np.zeros(n), np.zeros(0), 0.0)


def dirac(scope, value):
    """Point mass ``delta(x - value)``; normalised, with ``k = n``."""
    scope = as_scope(scope)
    value = np.atleast_1d(np.asarray(value, dtype=float)).reshape(scope.dim)
    n = scope.dim
    return DegenerateFactor(scope, np.zeros((n, 0)), np.eye(n), np.zeros(0), np.zeros(0), value, 0.0)


def _basis_from_covariance(cov, rtol, scale=None):
    """Split R^n into the range of a PSD covariance and its complement."""
    U, s = psd_basis(cov, rtol=rtol, scale=scale)
    return U, s, complement(U)


def from_gaussian(mean, cov, scope=None, rtol=None):
    """Normalised factor for ``N(mean, cov)`` with a possibly singular covariance.

    :param rtol: relative eigenvalue cutoff below which a variance is treated
        as exactly zero; defaults to ``settings.COV_RTOL``
    :raises InvalidInputError: for asymmetric or indefinite ``cov``
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float)).ravel()
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (mean.size, mean.size):
        raise InvalidInputError("mean and covariance dimensions differ")
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise InvalidInputError("mean and covariance must be finite")
    scope = as_scope(scope if scope is not None else mean.size)
    if scope.dim != mean.size:
        raise ScopeError("scope dimension does not match the mean")
    if rtol is None:
        rtol = settings.COV_RTOL
    Q, var, R = _basis_from_covariance(cov, rtol)
    lam = 1.0 / var
    h = lam * (Q.T @ mean)
    c = R.T @ mean
    g = np.nan if settings.moments_only() else normalising_g(lam, h)
    return make_factor(scope, Q, R, lam, h, c, g)


def from_canonical(cf):
    """Degenerate factor (``k = 0``) equal to a canonical factor."""
    Q, lam = psd_eig(cf.K)
    n = cf.n
    return DegenerateFactor(cf.scope, Q, np.zeros((n, 0)), lam, Q.T @ cf.h, np.zeros(0), cf.g)


def to_canonical(phi):
    """Canonical form ``(Q lam Q', Q h, g)`` of a factor without Dirac part."""
    if phi.is_zero or phi.k:
        raise InvalidInputError("only factors with k = 0 have a canonical form")
    K = (phi.Q * phi.lam) @ phi.Q.T
    return CanonicalFactor(phi.scope, K, phi.Q @ phi.h, phi.g)


def log_density(phi, x, tol=1e-9):
    """Log of the canonical component at ``x``, or ``OFF_MANIFOLD``.

    Points with ``|R'x - c| > tol * (1 + |c|)`` are off the support.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != phi.n:
        raise ScopeError(f"point has dimension {x.size}, factor has {phi.n}")
    if phi.is_zero:
        return OFF_MANIFOLD
    if np.linalg.norm(phi.R.T @ x - phi.c) > tol * (1.0 + np.linalg.norm(phi.c)):
        return OFF_MANIFOLD
    e = phi.Q.T @ x
    return float(-0.5 * np.sum(phi.lam * e * e) + phi.h @ e + phi.g)


def dense_limit_oracle(phi, a):
    """Canonical form of ``N(mean, Q lam^-1 Q' + a R R')``.

    As ``a`` goes to zero this converges to ``phi`` (normalised).  It is
    meant as a test oracle; the precision is assembled directly from the
    orthogonal decomposition rather than by inverting the covariance.
    """
    if a <= 0:
        raise InvalidInputError("a must be positive")
    m = moments(phi)
    K = (phi.Q * phi.lam) @ phi.Q.T + (phi.R @ phi.R.T) / a
    h = K @ m.mean
    var = np.concatenate([1.0 / phi.lam, np.full(phi.k, a)])
    g = -0.5 * m.mean @ h - 0.5 * np.sum(LOG_2PI + np.log(var))
    return CanonicalFactor(phi.scope, K, h, g)


def validate(phi, tol=1e-10):
    """List of violated structural invariants (empty when valid)."""
    if phi.is_zero:
        return []
    problems = []
    Q, R = phi.Q, phi.R
    if Q.shape[1] and np.abs(Q.T @ Q - np.eye(Q.shape[1])).max() > tol:
        problems.append("Q columns not orthonormal")
    if R.shape[1] and np.abs(R.T @ R - np.eye(R.shape[1])).max() > tol:
        problems.append("R columns not orthonormal")
    if Q.shape[1] and R.shape[1] and np.abs(Q.T @ R).max() > tol:
        problems.append("Q and R not orthogonal")
    if np.any(phi.lam < -tol):
        problems.append("negative precision")
    if np.any(np.diff(phi.lam) > tol * max(1.0, phi.lam.max(initial=0.0))):
        problems.append("precisions not descending")
    return problems


def extend_scope(phi, new_vars):
    """Extend the scope with new variables on which the factor is constant.

    :param new_vars: Scope (or list of (name, dim)) of variables to append
    """
    new_vars = as_scope(new_vars)
    for name in new_vars.names:
        if name in phi.scope:
            raise ScopeError(f"variable {name!r} already in scope")
    scope = phi.scope + new_vars
    if phi.is_zero:
        return ZeroFactor(scope)
    n, m = phi.n, new_vars.dim
    r = phi.n - phi.k
    Q = np.zeros((n + m, r + m))
    Q[:n, :r] = phi.Q
    Q[n:, r:] = np.eye(m)
    R = np.vstack([phi.R, np.zeros((m, phi.k))])
    lam = np.concatenate([phi.lam, np.zeros(m)])
    h = np.concatenate([phi.h, np.zeros(m)])
    return DegenerateFactor(scope, Q, R, lam, h, phi.c, phi.g)


def rearrange_scope(phi, names):
    """Reorder the variables of the scope; ``names`` must be a permutation."""
    names = list(names)
    if sorted(names) != sorted(phi.scope.names):
        raise ScopeError(f"{names} is not a permutation of {list(phi.scope.names)}")
    scope = phi.scope.subset(names)
    if phi.is_zero:
        return ZeroFactor(scope)
    if scope == phi.scope:
        return phi
    perm = phi.scope.indices(names)
    return phi.replace(scope=scope, Q=phi.Q[perm], R=phi.R[perm])


def align(a, b):
    """Extend and reorder two factors to their common union scope.

    The union keeps the variables of ``a`` in order, followed by those of
    ``b`` that ``a`` lacks.
    """
    union = a.scope.union(b.scope)
    return _to_scope(a, union), _to_scope(b, union)


def _to_scope(phi, scope):
    missing = scope.without(phi.scope.names) if len(phi.scope) else scope
    if len(missing):
        phi = extend_scope(phi, missing)
    return rearrange_scope(phi, scope.names)
