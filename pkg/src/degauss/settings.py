"""Numerical tolerances and the moments-only switch.

The tolerances here are used by the factor algorithms, whose inputs are
products of previously computed matrices and so carry more rounding noise
than the raw subspace routines assume.
"""
import contextlib
import threading

# Singular values of products of orthonormal bases below this are zero.
BASIS_TOL = 1e-9
# Relative cutoff for covariance-like matrices in compact decompositions.
COV_RTOL = 1e-10
# Relative cutoff below which computed precisions are set to exactly zero.
PRECISION_RTOL = 1e-12
# Relative residual above which hard constraints are declared inconsistent.
CONSISTENCY_TOL = 1e-7
# Relative tolerance for negative precisions produced by division.
QUOTIENT_RTOL = 1e-9

_state = threading.local()


def moments_only():
    """Return True when g bookkeeping is switched off for this thread."""
    return getattr(_state, "moments_only", False)


@contextlib.contextmanager
def skip_log_measure(enabled=True):
    """Context manager that disables the g update of every factor operation.

    Inside the block operations return ``g = nan``; means, covariances and
    supports are unaffected.
    """
    previous = moments_only()
    _state.moments_only = enabled
    try:
        yield
    finally:
        _state.moments_only = previous
