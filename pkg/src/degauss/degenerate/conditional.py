"""Conditional densities of linear models and unscented linearisation."""
from dataclasses import dataclass

import numpy as np

from .. import settings
from ..errors import NotNormalisableError, PropagationError, ScopeError
from ..scope import as_scope
from ..subspace import column_space, complement, pseudo_inverse, psd_basis
from .factor import is_normalisable, make_factor, moments, normalising_g

# Residual variances below this fraction of the output variance are zero.
RESIDUAL_RTOL = 1e-9


def represent_conditional(noise, A, b, x_scope, y_scope=None):
    """Joint factor over ``(x, y)`` equal to the conditional density of
    ``y = A x + b + w`` given ``x``, where ``w`` is distributed as ``noise``.

    The result has zero precision along the ``n_x`` directions that carry no
    information about ``x``.

    :param noise: normalisable factor over ``w`` (dimension ``n_y``)
    :param A: ``n_y x n_x`` matrix
    :param b: offset of length ``n_y``
    :param x_scope: scope of the conditioning variables
    :param y_scope: scope of ``y``; defaults to the scope of ``noise``
    """
    x_scope = as_scope(x_scope)
    y_scope = as_scope(y_scope) if y_scope is not None else noise.scope
    ny, nx = y_scope.dim, x_scope.dim
    A = np.asarray(A, dtype=float).reshape(ny, nx)
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    if noise.n != ny or b.size != ny:
        raise ScopeError("noise, offset and output dimensions differ")
    if not is_normalisable(noise):
        raise NotNormalisableError("conditional noise must be normalisable")
    Q, R, lam, h, c = noise.Q, noise.R, noise.lam, noise.h, noise.c

    F = np.hstack([-A, np.eye(ny)])
    FtR = F.T @ R
    R_new = column_space(FtR, rtol=settings.BASIS_TOL, scale=1.0)
    Zm = R_new.T @ FtR @ np.linalg.inv(R.T @ R + (A.T @ R).T @ (A.T @ R))
    c_new = Zm @ (c + R.T @ b)

    P = np.eye(nx + ny) - R_new @ R_new.T
    PFQ = P @ (F.T @ Q)
    Q_plus, lam_plus = psd_basis((PFQ * lam) @ PFQ.T, rank=int(np.sum(lam > 0)), check_rtol=None)
    Q_inf = complement(np.hstack([Q_plus, R_new]))
    Q_new = np.hstack([Q_plus, Q_inf])
    lam_new = np.concatenate([lam_plus, np.zeros(Q_inf.shape[1])])

    FRc = F @ (R_new @ c_new)
    qb, qf = Q.T @ b, Q.T @ FRc
    h_new = Q_new.T @ (F.T @ (Q @ (h + lam * (qb - qf))))
    g_new = np.nan
    if not settings.moments_only():
        _, logdet = np.linalg.slogdet(Zm) if Zm.size else (1.0, 0.0)
        g_new = noise.g - (h + 0.5 * lam * qb) @ qb + (h + lam * (qb - 0.5 * qf)) @ qf + logdet
    return make_factor(x_scope + y_scope, Q_new, R_new, lam_new, h_new, c_new, g_new)


@dataclass(frozen=True)
class UnscentedParams:
    """Spread and weighting of the sigma points.

    :param alpha: spread of the points around the mean
    :param beta: prior-knowledge weight on the centre point's covariance term
    :param kappa: secondary scaling
    """

    alpha: float = 1.0
    beta: float = 2.0
    kappa: float = 0.0

    def weights(self, d):
        """Mean weights, covariance weights and ``gamma`` for ``d`` free dimensions."""
        if d == 0:
            return np.ones(1), np.ones(1), 0.0
        lam_u = self.alpha**2 * (d + self.kappa) - d
        denom = d + lam_u
        wm = np.full(2 * d + 1, 1.0 / (2.0 * denom))
        wc = wm.copy()
        wm[0] = lam_u / denom
        wc[0] = wm[0] + (1.0 - self.alpha**2 + self.beta)
        return wm, wc, np.sqrt(denom)


def sigma_points(prior, params=UnscentedParams()):
    """Sigma points of a normalisable factor, spread only along ``Q``.

    :return: ``(points, wm, wc)`` with ``points`` of shape ``(2(n-k)+1, n)``
    """
    m = moments(prior)
    d = prior.n - prior.k
    wm, wc, gamma = params.weights(d)
    spread = gamma * prior.Q / np.sqrt(prior.lam)
    points = np.vstack([m.mean, m.mean + spread.T, m.mean - spread.T])
    return points, wm, wc


def equivalent_transformation(prior, f, x_vars, params=UnscentedParams(), noise_scope=None):
    """Statistically linearise ``y = f(x, w)`` around a joint prior on ``(x, w)``.

    :param prior: normalisable factor over the variables of ``x`` and ``w``
    :param f: callable ``f(x, w) -> y`` on flat arrays; ``x`` holds the
        variables in ``x_vars`` (in that order), ``w`` the remaining ones in
        scope order
    :param x_vars: names of the variables forming ``x``
    :param noise_scope: scope of the returned noise; default ``[("w", n_y)]``
    :return: ``(A, b, noise)`` such that ``y ~= A x + b + noise``
    """
    if prior.is_zero or not is_normalisable(prior):
        raise NotNormalisableError("linearisation prior must be normalisable")
    x_vars = list(x_vars)
    w_vars = [name for name in prior.scope.names if name not in x_vars]
    ix, iw = prior.scope.indices(x_vars), prior.scope.indices(w_vars)
    points, wm, wc = sigma_points(prior, params)
    ys = []
    for p in points:
        y = np.atleast_1d(np.asarray(f(p[ix], p[iw]), dtype=float)).ravel()
        if not np.all(np.isfinite(y)):
            raise PropagationError("f returned non-finite values on a sigma point")
        ys.append(y)
    ys = np.array(ys)
    xs = points[:, ix]
    nx, ny = xs.shape[1], ys.shape[1]

    zs = np.hstack([xs, ys])
    mu = wm @ zs
    dev = zs - mu
    cov = (dev.T * wc) @ dev
    cov = 0.5 * (cov + cov.T)
    Sxx, Sxy, Syy = cov[:nx, :nx], cov[:nx, nx:], cov[nx:, nx:]
    A = Sxy.T @ pseudo_inverse(Sxx, rtol=settings.COV_RTOL)
    b = mu[nx:] - A @ mu[:nx]

    resid = Syy - A @ Sxy
    resid = 0.5 * (resid + resid.T)
    scale = max(np.linalg.eigvalsh(Syy)[-1], 0.0) if ny else 0.0
    Q_t, var = psd_basis(resid, rtol=RESIDUAL_RTOL, scale=scale, check_rtol=1e-6)
    R_t = complement(Q_t)
    lam_t = 1.0 / var
    h_t = np.zeros(lam_t.size)
    g_t = np.nan if settings.moments_only() else normalising_g(lam_t, h_t)
    noise_scope = as_scope(noise_scope if noise_scope is not None else [("w", ny)])
    noise = make_factor(noise_scope, Q_t, R_t, lam_t, h_t, np.zeros(R_t.shape[1]), g_t)
    return A, b, noise

