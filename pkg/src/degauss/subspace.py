"""Rank-tolerant dense linear algebra on the four fundamental subspaces.

Every basis returned here is a 2-D array with orthonormal columns.  A basis
with zero columns is a legal value, so ``np.zeros((n, 0))`` stands for the
trivial subspace of R^n.  Bases are made deterministic by flipping each
column so that its largest-magnitude entry is positive.
"""
import numpy as np

from .errors import InvalidInputError

EPS = np.finfo(float).eps


def as_matrix(M):
    """Convert ``M`` to a finite 2-D float array or raise ``InvalidInputError``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got array with shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


def default_rtol(shape):
    """Default relative rank threshold ``max(rows, cols) * eps``."""
    return max(max(shape), 1) * EPS


def fix_signs(U, V=None):
    """Flip columns of ``U`` (and the matching columns of ``V``) so that the
    largest-magnitude entry of every column of ``U`` is positive."""
    if U.shape[1] == 0 or U.shape[0] == 0:
        return U, V
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U = U * signs
    if V is not None:
        V = V * signs
    return U, V


def _cutoff(s, shape, rtol, scale):
    if rtol is None:
        rtol = default_rtol(shape)
    if scale is None:
        scale = s[0] if s.size else 0.0
    return rtol * scale


def compact_svd(M, rtol=None, scale=None):
    """Compact singular value decomposition.

    :param M: matrix to decompose
    :param rtol: relative rank threshold, defaults to ``max(M.shape) * eps``
    :param scale: reference magnitude for the threshold; defaults to the
        largest singular value of ``M``
    :return: ``(U, s, V)`` with ``M ~= U @ diag(s) @ V.T`` and only singular
        values strictly above ``rtol * scale`` retained, in descending order
    """
    M = as_matrix(M)
    m, n = M.shape
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > _cutoff(s, M.shape, rtol, scale)))
    U, V = fix_signs(U[:, :r].copy(), Vt[:r].T.copy())
    if r == 0:
        return np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0))
    return U, s[:r].copy(), V


def rank(M, rtol=None, scale=None):
    """Numerical rank under the same cutoff rule as :func:`compact_svd`."""
    return compact_svd(M, rtol, scale)[1].size


def column_space(M, rtol=None, scale=None):
    """Orthonormal basis for the column space (range) of ``M``."""
    return compact_svd(M, rtol, scale)[0]


def null_space(M, rtol=None, scale=None):
    """Orthonormal basis for the null space (kernel) of ``M``."""
    M = as_matrix(M)
    m, n = M.shape
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > _cutoff(s, M.shape, rtol, scale)))
    N = Vt[r:].T.copy()
    return fix_signs(N)[0]


def complement(B, rtol=None):
    """Orthonormal basis for the orthogonal complement of ``C(B)``.

    ``B`` is usually itself an orthonormal basis, in which case its singular
    values are all one and the threshold only guards against rounding.
    """
    B = as_matrix(B)
    n, r = B.shape
    if r == 0:
        return np.eye(n)
    U, s, _ = np.linalg.svd(B, full_matrices=True)
    if rtol is None:
        rtol = default_rtol(B.shape)
    rk = int(np.sum(s > rtol * max(s[0] if s.size else 0.0, 1.0)))
    C = U[:, rk:].copy()
    return fix_signs(C)[0]


def pseudo_inverse(M, rtol=None, scale=None):
    """Moore-Penrose pseudo-inverse built from :func:`compact_svd`."""
    U, s, V = compact_svd(M, rtol, scale)
    return (V / s) @ U.T


def psd_basis(S, rtol=None, scale=None, rank=None, check_rtol=1e-9):
    """Compact decomposition of a symmetric positive semi-definite matrix.

    :param S: symmetric PSD matrix
    :param rtol: relative cutoff as in :func:`compact_svd`
    :param scale: reference magnitude of the cutoff, default the largest
        eigenvalue
    :param rank: if given, keep exactly this many leading eigenvalues
    :param check_rtol: eigenvalues below ``-check_rtol * scale`` are rejected;
        None skips the check
    :return: ``(U, s)`` with ``S ~= U @ diag(s) @ U.T``, ``s`` descending
    """
    S = as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise InvalidInputError("expected a square matrix")
    n = S.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)
    ref = max(np.abs(S).max(), 0.0)
    if np.abs(S - S.T).max() > 1e-10 * max(ref, 1.0):
        raise InvalidInputError("matrix is not symmetric")
    w, Z = np.linalg.eigh(0.5 * (S + S.T))
    w, Z = w[::-1], Z[:, ::-1]
    top = max(w[0], 0.0)
    if scale is None:
        scale = top
    if check_rtol is not None and w[-1] < -check_rtol * max(scale, top):
        raise InvalidInputError("matrix is not positive semi-definite")
    if rank is None:
        if rtol is None:
            rtol = default_rtol(S.shape)
        rank = int(np.sum(w > rtol * scale))
    U = fix_signs(Z[:, :rank].copy())[0]
    return U, w[:rank].copy()


def psd_eig(S, floor_rtol=0.0):
    """Full eigendecomposition of a symmetric PSD matrix with descending,
    non-negative eigenvalues.

    Negative rounding noise is clipped to zero, as are eigenvalues below
    ``floor_rtol`` times the largest one.  No definiteness check is made;
    callers that need one inspect the raw matrix themselves.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)
    w, Z = np.linalg.eigh(0.5 * (S + S.T))
    w, Z = w[::-1].copy(), Z[:, ::-1].copy()
    top = max(w[0], 0.0)
    w[w < floor_rtol * top] = 0.0
    w = np.maximum(w, 0.0)
    return fix_signs(Z)[0], w


def projector(B):
    """Orthogonal projector ``B @ B.T`` onto the span of a basis."""
    return B @ B.T


def projector_distance(B1, B2):
    """Frobenius distance between the projectors onto two subspaces."""
    return float(np.linalg.norm(projector(B1) - projector(B2)))


def is_orthonormal(B, tol=1e-10):
    """True when ``B.T @ B`` is the identity within ``tol``."""
    B = np.asarray(B, dtype=float)
    if B.shape[1] == 0:
        return True
    return bool(np.abs(B.T @ B - np.eye(B.shape[1])).max() <= tol)


def range_and_kernel(M, rtol=None, scale=None):
    """Bases for the column space of ``M`` and for its null space, taken from
    one SVD so that their dimensions always add up to ``M.shape[1]``."""
    M = as_matrix(M)
    m, n = M.shape
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > _cutoff(s, M.shape, rtol, scale)))
    return fix_signs(U[:, :r].copy())[0], fix_signs(Vt[r:].T.copy())[0]
