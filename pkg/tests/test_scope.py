import numpy as np
import pytest

from degauss.errors import ScopeError
from degauss.scope import Scope, as_scope


def test_basic_properties():
    s = Scope([("x", 2), ("y", 1)])
    assert s.dim == 3 and len(s) == 2
    assert s.names == ("x", "y") or list(s.names) == ["x", "y"]
    assert "x" in s and "z" not in s
    np.testing.assert_array_equal(s.indices(["y", "x"]), [2, 0, 1])


def test_duplicate_names_rejected():
    with pytest.raises(ScopeError):
        Scope([("x", 1), ("x", 2)])


def test_union_keeps_order_and_checks_dimensions():
    a = Scope([("x", 2), ("y", 1)])
    b = Scope([("z", 1), ("x", 2)])
    assert list(a.union(b).names) == ["x", "y", "z"]
    with pytest.raises(ScopeError):
        a.union(Scope([("x", 3)]))


def test_stack_and_split_round_trip():
    s = Scope([("x", 2), ("y", 1)])
    v = s.stack({"y": 3.0, "x": [1.0, 2.0]})
    np.testing.assert_array_equal(v, [1.0, 2.0, 3.0])
    parts = s.split(v)
    np.testing.assert_array_equal(parts["x"], [1.0, 2.0])


def test_as_scope_accepts_int_and_pairs():
    assert as_scope(3).dim == 3
    assert as_scope([("a", 1)]) == Scope([("a", 1)])
