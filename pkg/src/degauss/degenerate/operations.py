"""Affine transformation, marginalisation, product, quotient and evidence
reduction for degenerate factors.

Binary operations first bring both operands to their union scope (see
:func:`~degauss.degenerate.factor.align`).  Whenever hard constraints
contradict each other the result is a :class:`ZeroFactor`.
"""
import numpy as np

from .. import settings
from ..errors import (
    ContractViolation,
    DivergentIntegralError,
    IndefiniteQuotientError,
    ScopeError,
)
from ..scope import as_scope
from ..subspace import column_space, complement, pseudo_inverse, psd_eig, range_and_kernel
from .factor import (
    LOG_2PI,
    ZeroFactor,
    align,
    from_gaussian,
    make_factor,
    moments,
    rearrange_scope,
)


def _basis_range(M):
    return column_space(M, rtol=settings.BASIS_TOL, scale=1.0)


def _logdet_pd(M):
    if M.shape[0] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(M)
    return logdet


def _inconsistent(residual, *offsets):
    ref = 1.0 + sum(float(np.linalg.norm(o)) for o in offsets)
    return float(np.linalg.norm(residual)) > settings.CONSISTENCY_TOL * ref


def affine_transform(phi, A, b, scope=None):
    """Factor of ``y = A x + b`` when ``x`` is distributed as ``phi``.

    ``A`` may have any shape and rank; the image covariance decides which
    directions of ``y`` become hard constraints.

    :param scope: scope of ``y``, default a single variable ``"y"``
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    if A.shape[1] != phi.n or b.size != A.shape[0]:
        raise ScopeError(f"affine map of shape {A.shape} does not fit a factor of dimension {phi.n}")
    if scope is None:
        scope = [("y", A.shape[0])]
    m = moments(phi)
    AQ = A @ phi.Q
    cov = (AQ / phi.lam) @ AQ.T
    mean = A @ m.mean + b
    return from_gaussian(mean, 0.5 * (cov + cov.T), scope=as_scope(scope))


def marginalise(phi, out_vars):
    """Integrate the variables ``out_vars`` out of ``phi``.

    :raises DivergentIntegralError: when the factor has zero precision along
        a direction that is integrated over
    """
    out_vars = list(out_vars)
    for name in out_vars:
        phi.scope.dim_of(name)
    if not out_vars:
        return phi
    keep = [name for name in phi.scope.names if name not in out_vars]
    scope = phi.scope.subset(keep)
    if phi.is_zero:
        return ZeroFactor(scope)
    phi = rearrange_scope(phi, keep + out_vars)
    nx = scope.dim
    Qx, Qy = phi.Q[:nx], phi.Q[nx:]
    Rx, Ry = phi.R[:nx], phi.R[nx:]
    lam, h, c = phi.lam, phi.h, phi.c

    # U spans the Gaussian directions that survive, V those that are
    # integrated over, W the constraint combinations that involve x.
    U, V = range_and_kernel(Qx, rtol=settings.BASIS_TOL, scale=1.0)
    W = _basis_range(Rx.T @ Qx)
    R_new = complement(U)
    c_new = R_new.T @ (Rx @ c)

    RyW = Ry @ W
    F = (W @ pseudo_inverse(RyW, rtol=settings.BASIS_TOL, scale=1.0) @ Qy).T
    G = (Qx.T - F @ Rx.T) @ U

    VLV = (V.T * lam) @ V
    if V.shape[1]:
        w = np.linalg.eigvalsh(VLV)
        if w[0] <= settings.PRECISION_RTOL * max(lam.max(initial=0.0), np.finfo(float).tiny):
            raise DivergentIntegralError("integrated directions include zero precision")
        S = V @ np.linalg.solve(VLV, V.T)
    else:
        S = np.zeros((lam.size, lam.size))

    LS = lam[:, None] * S
    K_red = (G.T * lam) @ G - G.T @ (LS * lam) @ G
    Z, lam_new = psd_eig(K_red, settings.PRECISION_RTOL)
    Q_new = U @ Z
    Fc = F @ c
    t = h - lam * Fc
    h_new = Z.T @ (G.T @ (t - LS @ t))

    g_new = np.nan
    if not settings.moments_only():
        WRRW = RyW.T @ RyW
        g_new = (
            phi.g
            + (h - 0.5 * lam * Fc) @ Fc
            + 0.5 * t @ S @ t
            + 0.5 * (V.shape[1] * LOG_2PI - _logdet_pd(VLV))
            - 0.5 * _logdet_pd(WRRW)
        )
    return make_factor(scope, Q_new, R_new, lam_new, h_new, c_new, g_new)


def multiply(a, b):
    """Product of two factors; a :class:`ZeroFactor` if their supports are disjoint."""
    a, b = align(a, b)
    if a.is_zero or b.is_zero:
        return ZeroFactor(a.scope)
    Q1, R1, l1, h1, c1 = a.Q, a.R, a.lam, a.h, a.c
    Q2, R2, l2, h2, c2 = b.Q, b.R, b.lam, b.h, b.c

    # New constraint directions: the part of C(R2) not already in C(R1).
    V = _basis_range(Q1 @ (Q1.T @ R2))
    R_new = np.hstack([R1, V])
    R2V = R2.T @ V
    M = R2V.T @ R2V
    rhs = c2 - R2.T @ (R1 @ c1)
    offset = np.linalg.solve(M, R2V.T @ rhs) if V.shape[1] else np.zeros(0)
    if _inconsistent(R2V @ offset - rhs, c1, c2):
        return ZeroFactor(a.scope)
    c_new = np.concatenate([c1, offset])

    U = complement(R_new)
    P1, P2 = Q1.T @ U, Q2.T @ U
    K_red = (P1.T * l1) @ P1 + (P2.T * l2) @ P2
    Z, lam_new = psd_eig(K_red, settings.PRECISION_RTOL)
    Q_new = U @ Z

    Vb = V @ offset
    s1 = Q1.T @ Vb
    s2 = Q2.T @ (R1 @ c1 + Vb)
    h_new = Q_new.T @ (Q1 @ (h1 - l1 * s1) + Q2 @ (h2 - l2 * s2))

    g_new = np.nan
    if not settings.moments_only():
        g_new = a.g + b.g + (h1 - 0.5 * l1 * s1) @ s1 + (h2 - 0.5 * l2 * s2) @ s2 - 0.5 * _logdet_pd(M)
    return make_factor(a.scope, Q_new, R_new, lam_new, h_new, c_new, g_new)


def divide(a, b):
    """Quotient ``a / b``.

    Requires the constraints of ``b`` to be implied by those of ``a``.

    :raises ContractViolation: if ``C(R_b)`` is not inside ``C(R_a)`` or the
        offsets disagree
    :raises IndefiniteQuotientError: if the quotient has negative precision
    """
    a, b = align(a, b)
    if b.is_zero:
        raise ContractViolation("cannot divide by the zero factor")
    if a.is_zero:
        return ZeroFactor(a.scope)
    Q1, R1, l1, h1, c1 = a.Q, a.R, a.lam, a.h, a.c
    Q2, R2, l2, h2, c2 = b.Q, b.R, b.lam, b.h, b.c
    n = a.n
    if np.linalg.norm(Q1.T @ R2) > n * settings.BASIS_TOL:
        raise ContractViolation("denominator constraints are not implied by the numerator")
    m1 = R1 @ c1
    if _inconsistent(R2.T @ m1 - c2, c2):
        raise ContractViolation("denominator constraint offsets disagree with the numerator")

    R_new = complement(np.hstack([Q1, R2]))
    c_new = R_new.T @ m1

    P = Q2.T @ Q1
    D = np.diag(l1) - (P.T * l2) @ P
    w, Z = np.linalg.eigh(0.5 * (D + D.T))
    w, Z = w[::-1], Z[:, ::-1]
    scale = max(l1.max(initial=0.0), l2.max(initial=0.0))
    if w.size and w[-1] < -settings.QUOTIENT_RTOL * scale:
        raise IndefiniteQuotientError(f"quotient precision has eigenvalue {w[-1]:.3g}")
    w = np.where(w < settings.PRECISION_RTOL * scale, 0.0, w)
    Q_new = np.hstack([Q1 @ Z, R2])
    lam_new = np.concatenate([w, np.zeros(R2.shape[1])])

    s = Q2.T @ m1
    h_new = Q_new.T @ (Q1 @ h1 - Q2 @ (h2 - l2 * s))
    g_new = np.nan
    if not settings.moments_only():
        g_new = a.g - b.g - (h2 - 0.5 * l2 * s) @ s
    return make_factor(a.scope, Q_new, R_new, lam_new, h_new, c_new, g_new)


def reduce(phi, evidence):
    """Condition on observed values of some variables.

    :param evidence: mapping from variable name to observed value
    :return: factor over the remaining variables, or a :class:`ZeroFactor`
        if the observation violates a hard constraint
    """
    obs = list(evidence)
    for name in obs:
        if name not in phi.scope:
            raise ScopeError(f"evidence variable {name!r} not in {phi.scope!r}")
    if not obs:
        return phi
    keep = [name for name in phi.scope.names if name not in evidence]
    scope = phi.scope.subset(keep)
    if phi.is_zero:
        return ZeroFactor(scope)
    phi = rearrange_scope(phi, keep + obs)
    y0 = phi.scope.subset(obs).stack(evidence)
    nx = scope.dim
    Qx, Rx, Ry = phi.Q[:nx], phi.R[:nx], phi.R[nx:]
    lam, h, c = phi.lam, phi.h, phi.c

    R_new = _basis_range(Rx)
    RxR = Rx.T @ R_new
    M = RxR.T @ RxR
    rhs = c - Ry.T @ y0
    c_new = np.linalg.solve(M, RxR.T @ rhs) if R_new.shape[1] else np.zeros(0)
    if _inconsistent(RxR @ c_new - rhs, c, y0):
        return ZeroFactor(scope)

    Ux = complement(R_new)
    P = Qx.T @ Ux
    Z, lam_new = psd_eig((P.T * lam) @ P, settings.PRECISION_RTOL)
    Q_new = Ux @ Z
    t = phi.Q.T @ np.concatenate([R_new @ c_new, y0])
    h_new = Q_new.T @ (Qx @ (h - lam * t))
    g_new = np.nan
    if not settings.moments_only():
        g_new = phi.g + (h - 0.5 * lam * t) @ t - 0.5 * _logdet_pd(M)
    return make_factor(scope, Q_new, R_new, lam_new, h_new, c_new, g_new)
