"""Random factors for self-checks and property tests."""
import numpy as np

from .degenerate.factor import make_factor, normalising_g
from .scope import Scope


def random_orthonormal(rng, n):
    """Haar-distributed orthogonal ``n x n`` matrix."""
    if n == 0:
        return np.zeros((0, 0))
    Z, T = np.linalg.qr(rng.standard_normal((n, n)))
    return Z * np.sign(np.diag(T))


def split_scope(n, parts=None, prefix="v"):
    """Scope of total dimension ``n`` split into ``parts`` variables."""
    parts = parts or n
    sizes = [n // parts + (1 if i < n % parts else 0) for i in range(parts)]
    return Scope([(f"{prefix}{i}", d) for i, d in enumerate(sizes) if d])


def random_factor(rng, n, k=0, scope=None, lam_range=(0.2, 5.0), g=None):
    """Random factor with ``k`` constraints and positive precisions.

    :param g: log-measure; default normalises the factor
    """
    scope = scope if scope is not None else split_scope(n)
    B = random_orthonormal(rng, n)
    lam = rng.uniform(*lam_range, size=n - k)
    h = rng.standard_normal(n - k)
    c = rng.standard_normal(k)
    if g is None:
        g = normalising_g(lam, h)
    return make_factor(scope, B[:, k:], B[:, :k], lam, h, c, g)
