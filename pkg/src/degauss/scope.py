"""Named partitions of a real vector."""
import numpy as np

from .errors import ScopeError


class Scope:
    """Ordered list of named variables, each with a dimension.

    ``Scope([("x", 2), ("y", 1)])`` describes a 3-vector whose first two
    entries belong to ``x`` and whose last entry is ``y``.
    """

    __slots__ = ("names", "dims", "_offsets")

    def __init__(self, variables=()):
        names, dims = [], []
        for name, dim in variables:
            dim = int(dim)
            if dim < 0:
                raise ScopeError(f"negative dimension for {name!r}")
            names.append(str(name))
            dims.append(dim)
        if len(set(names)) != len(names):
            raise ScopeError(f"duplicate variable names in {names}")
        self.names = tuple(names)
        self.dims = tuple(dims)
        offsets, total = {}, 0
        for name, dim in zip(names, dims):
            offsets[name] = total
            total += dim
        self._offsets = offsets

    @classmethod
    def single(cls, name, dim):
        return cls([(name, dim)])

    @property
    def dim(self):
        return sum(self.dims)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(zip(self.names, self.dims))

    def __contains__(self, name):
        return name in self._offsets

    def __eq__(self, other):
        return isinstance(other, Scope) and self.names == other.names and self.dims == other.dims

    def __hash__(self):
        return hash((self.names, self.dims))

    def __repr__(self):
        inner = ", ".join(f"{n}:{d}" for n, d in self)
        return f"Scope({inner})"

    def __add__(self, other):
        return Scope(list(self) + list(other))

    def dim_of(self, name):
        try:
            return self.dims[self.names.index(name)]
        except ValueError:
            raise ScopeError(f"variable {name!r} not in {self!r}") from None

    def slice(self, name):
        """Index range occupied by one variable."""
        start = self._offsets.get(name)
        if start is None:
            raise ScopeError(f"variable {name!r} not in {self!r}")
        return slice(start, start + self.dim_of(name))

    def indices(self, names):
        """Flat integer indices of the listed variables, in the given order."""
        parts = [np.arange(self.slice(n).start, self.slice(n).stop) for n in names]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    def subset(self, names):
        """Scope restricted to ``names``, in the order given."""
        return Scope([(n, self.dim_of(n)) for n in names])

    def without(self, names):
        names = set(names)
        for n in names:
            self.dim_of(n)
        return Scope([(n, d) for n, d in self if n not in names])

    def union(self, other):
        """This scope followed by the variables of ``other`` that are new."""
        extra = []
        for name, dim in other:
            if name in self:
                if self.dim_of(name) != dim:
                    raise ScopeError(f"variable {name!r} has dimensions {self.dim_of(name)} and {dim}")
            else:
                extra.append((name, dim))
        return Scope(list(self) + extra)

    def split(self, vector):
        """Split a flat vector into a ``{name: subvector}`` dict."""
        vector = np.asarray(vector, dtype=float)
        return {n: vector[self.slice(n)] for n in self.names}

    def stack(self, values):
        """Inverse of :meth:`split`: concatenate values in scope order."""
        parts = []
        for name, dim in self:
            v = np.atleast_1d(np.asarray(values[name], dtype=float)).ravel()
            if v.size != dim:
                raise ScopeError(f"value for {name!r} has size {v.size}, expected {dim}")
            parts.append(v)
        return np.concatenate(parts) if parts else np.zeros(0)

    def to_list(self):
        return [[n, d] for n, d in self]


def as_scope(scope):
    """Accept a Scope, a list of (name, dim) pairs, or an integer dimension."""
    if isinstance(scope, Scope):
        return scope
    if isinstance(scope, (int, np.integer)):
        return Scope([("x", int(scope))]) if scope else Scope()
    return Scope(scope)
