"""JSON round trip for degenerate factors.

A factor is stored as an object with keys ``scope`` (list of
``[name, dim]``), ``Q`` and ``R`` (row-major nested lists), ``lambda``,
``h``, ``c`` and ``g``.  Python's float repr keeps 17 significant digits, so
the round trip is exact.  The zero factor is stored as
``{"scope": ..., "zero": true}``.
"""
import json

import numpy as np

from ..scope import Scope
from .factor import DegenerateFactor, ZeroFactor


def _matrix(rows, n, cols):
    if n == 0 or cols == 0:
        return np.zeros((n, cols))
    return np.array(rows, dtype=float).reshape(n, cols)


def _float(x):
    x = float(x)
    return x if np.isfinite(x) else repr(x)


def to_dict(phi):
    scope = phi.scope.to_list()
    if phi.is_zero:
        return {"scope": scope, "zero": True}
    return {
        "scope": scope,
        "Q": phi.Q.tolist(),
        "R": phi.R.tolist(),
        "lambda": phi.lam.tolist(),
        "h": phi.h.tolist(),
        "c": phi.c.tolist(),
        "g": _float(phi.g),
    }


def from_dict(data):
    scope = Scope([(name, dim) for name, dim in data["scope"]])
    if data.get("zero"):
        return ZeroFactor(scope)
    n = scope.dim
    lam = np.array(data["lambda"], dtype=float)
    c = np.array(data["c"], dtype=float)
    return DegenerateFactor(
        scope,
        _matrix(data["Q"], n, lam.size),
        _matrix(data["R"], n, c.size),
        lam,
        np.array(data["h"], dtype=float),
        c,
        float(data["g"]),
    )


def dumps(phi, **kwargs):
    return json.dumps(to_dict(phi), **kwargs)


def loads(text):
    return from_dict(json.loads(text))


def save(phi, path):
    with open(path, "w") as fh:
        fh.write(dumps(phi))


def load(path):
    with open(path) as fh:
        return loads(fh.read())
