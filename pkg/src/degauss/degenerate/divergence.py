"""Kullback-Leibler divergence between degenerate factors."""
import numpy as np

from .. import settings
from ..errors import ContractViolation, ScopeError
from ..subspace import projector_distance
from .factor import is_normalised, rearrange_scope


def kl_divergence(p, q, tol=None):
    """``KL(p || q)`` for normalised factors over the same variables.

    The divergence is finite only when both densities live on the same
    affine manifold; otherwise ``inf`` is returned.

    :param tol: subspace tolerance; supports are equal when the projector
        distance is at most ``n * tol``
    """
    if tol is None:
        tol = settings.BASIS_TOL
    if sorted(p.scope.names) != sorted(q.scope.names):
        raise ScopeError("KL divergence needs factors over the same variables")
    q = rearrange_scope(q, p.scope.names)
    if p.scope != q.scope:
        raise ScopeError("variable dimensions differ")
    if not (is_normalised(p) and is_normalised(q)):
        raise ContractViolation("KL divergence is defined for normalised factors only")
    n = p.n
    if p.k != q.k or projector_distance(p.R, q.R) > n * tol:
        return np.inf
    offset_gap = np.linalg.norm(p.R @ p.c - q.R @ q.c)
    if offset_gap > n * tol * (1.0 + np.linalg.norm(p.c)):
        return np.inf

    # Work in the coordinates of q along its support; both factors are
    # normalised, so g carries no extra information and is left out to avoid
    # cancellation between large log-measures.
    A = q.Q.T @ p.Q
    diff = q.h / q.lam - A @ (p.h / p.lam)
    trace = np.sum((q.lam[:, None] * A * A) / p.lam[None, :])
    quad = diff @ (q.lam * diff)
    logdet = np.sum(np.log(p.lam)) - np.sum(np.log(q.lam))
    return float(0.5 * (trace - (n - p.k) + quad + logdet))
