import numpy as np
import pytest

from degauss.canonical import (
    CanonicalFactor,
    c_divide,
    c_marginalise,
    c_multiply,
    c_reduce,
    c_rescope_affine,
    from_moments,
    normalising_g,
    vacuous,
)
from degauss.errors import DegeneracyDetectedError, NotNormalisableError, ScopeError
from degauss.scope import Scope

LOG_2PI = np.log(2 * np.pi)
XY = Scope([("x", 1), ("y", 1)])


def random_canonical(rng, scope):
    n = scope.dim
    A = rng.standard_normal((n, n))
    K = A @ A.T + n * np.eye(n)
    h = rng.standard_normal(n)
    return CanonicalFactor(scope, K, h, normalising_g(K, h))


def test_normalising_g_examples():
    assert normalising_g(1.0, 0.0) == pytest.approx(-0.5 * LOG_2PI)
    assert normalising_g(np.eye(2), np.zeros(2)) == pytest.approx(-LOG_2PI)
    assert normalising_g(4.0, 2.0) == pytest.approx(-0.5 - 0.5 * np.log(np.pi / 2))


def test_normalising_g_rejects_singular():
    with pytest.raises(NotNormalisableError):
        normalising_g(np.diag([1.0, 0.0]), np.zeros(2))


def test_marginal_of_independent_standard_normal():
    phi = CanonicalFactor(XY, np.eye(2), np.zeros(2), -LOG_2PI)
    m = c_marginalise(phi, ["y"])
    np.testing.assert_allclose(m.K, [[1.0]])
    assert m.g == pytest.approx(-0.5 * LOG_2PI)


def test_marginal_schur_complement():
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    phi = CanonicalFactor(XY, K, np.zeros(2), normalising_g(K, np.zeros(2)))
    m = c_marginalise(phi, ["y"])
    np.testing.assert_allclose(m.K, [[1.5]])
    np.testing.assert_allclose(m.h, [0.0])
    assert m.is_normalised()


def test_marginalise_nothing_is_identity():
    phi = CanonicalFactor(XY, np.eye(2), np.ones(2), 0.3)
    assert c_marginalise(phi, []) is phi


def test_marginalise_singular_block_raises():
    phi = CanonicalFactor(XY, np.diag([1.0, 0.0]), np.zeros(2), 0.0)
    with pytest.raises(DegeneracyDetectedError):
        c_marginalise(phi, ["y"])


def test_multiply_examples():
    phi = CanonicalFactor(XY, np.eye(2), np.ones(2), 0.3)
    out = c_multiply(phi, vacuous(XY))
    np.testing.assert_array_equal(out.K, phi.K)
    np.testing.assert_array_equal(out.h, phi.h)
    assert out.g == phi.g
    s = from_moments([0.0], [[1.0]])
    two = c_multiply(s, s)
    np.testing.assert_allclose(two.K, [[2.0]])
    assert two.g == pytest.approx(-LOG_2PI)
    out = c_multiply(CanonicalFactor(1, 1.0, 1.0, 0.0), CanonicalFactor(1, 3.0, -1.0, 0.0))
    np.testing.assert_allclose(out.K, [[4.0]])
    np.testing.assert_allclose(out.h, [0.0])


def test_scope_mismatch_raises():
    with pytest.raises(ScopeError):
        c_multiply(vacuous(XY), vacuous(Scope([("y", 1), ("x", 1)])))
    with pytest.raises(ScopeError):
        c_divide(vacuous(XY), vacuous(1))


def test_divide_examples():
    phi = CanonicalFactor(XY, np.eye(2), np.ones(2), 0.3)
    out = c_divide(phi, phi)
    np.testing.assert_array_equal(out.K, 0.0)
    np.testing.assert_array_equal(out.h, 0.0)
    assert out.g == 0.0
    out = c_divide(phi, vacuous(XY))
    np.testing.assert_array_equal(out.K, phi.K)
    np.testing.assert_allclose(c_divide(CanonicalFactor(1, 4.0, 0.0, 0.0), CanonicalFactor(1, 1.0, 0.0, 0.0)).K, [[3.0]])


def test_reduce_examples():
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    phi = CanonicalFactor(XY, K, np.zeros(2), 0.7)
    out = c_reduce(phi, {"y": 1.0})
    np.testing.assert_allclose(out.K, [[2.0]])
    np.testing.assert_allclose(out.h, [-1.0])
    assert out.g == pytest.approx(0.7 - 1.0)
    out = c_reduce(phi, {"y": 0.0})
    np.testing.assert_allclose(out.h, [0.0])
    assert out.g == 0.7
    block = CanonicalFactor(XY, np.diag([2.0, 3.0]), np.array([1.0, 2.0]), 0.0)
    out = c_reduce(block, {"y": 5.0})
    np.testing.assert_allclose(out.K, [[2.0]])
    np.testing.assert_allclose(out.h, [1.0])


def test_reduce_unknown_variable():
    with pytest.raises(ScopeError):
        c_reduce(vacuous(XY), {"z": 1.0})


def test_rescope_affine_examples():
    phi = CanonicalFactor(1, 1.0, 0.0, 0.0)
    out = c_rescope_affine(phi, [[2.0]], [1.0])
    np.testing.assert_allclose(out.K, [[4.0]])
    np.testing.assert_allclose(out.h, [-2.0])
    assert out.g == pytest.approx(-0.5)
    I = CanonicalFactor(2, np.eye(2), np.zeros(2), 0.0)
    c, s = np.cos(0.4), np.sin(0.4)
    out = c_rescope_affine(I, [[c, -s], [s, c]], np.zeros(2))
    np.testing.assert_allclose(out.K, np.eye(2), atol=1e-15)


def test_rescope_affine_value_identity(rng):
    phi = random_canonical(rng, Scope([("y", 3)]))
    A, b = rng.standard_normal((3, 2)), rng.standard_normal(3)
    out = c_rescope_affine(phi, A, b)
    for _ in range(5):
        x = rng.standard_normal(2)
        assert out.log_value(x) == pytest.approx(phi.log_value(A @ x + b), rel=1e-12, abs=1e-12)


def test_orthogonal_rescope_composes_to_identity(rng):
    phi = random_canonical(rng, Scope([("y", 3)]))
    Z, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    back = c_rescope_affine(c_rescope_affine(phi, Z, np.zeros(3)), Z.T, np.zeros(3))
    np.testing.assert_allclose(back.K, phi.K, atol=1e-10)
    np.testing.assert_allclose(back.h, phi.h, atol=1e-10)


def test_multiply_divide_inverse_pair(rng):
    scope = Scope([("a", 2), ("b", 1)])
    for _ in range(20):
        p, q = random_canonical(rng, scope), random_canonical(rng, scope)
        back = c_divide(c_multiply(p, q), q)
        np.testing.assert_allclose(back.K, p.K, atol=1e-12)
        np.testing.assert_allclose(back.h, p.h, atol=1e-12)
        assert back.g == pytest.approx(p.g, abs=1e-12)


def test_marginal_of_normalised_is_normalised(rng):
    scope = Scope([("a", 2), ("b", 2), ("c", 1)])
    for _ in range(20):
        phi = random_canonical(rng, scope)
        for out in (["a"], ["b", "c"], ["a", "c"]):
            m = c_marginalise(phi, out)
            assert m.g == pytest.approx(normalising_g(m.K, m.h), abs=1e-9)


def test_reduce_and_marginalise_agree_on_independent_blocks(rng):
    K = np.diag([2.0, 3.0, 4.0])
    h = rng.standard_normal(3)
    phi = CanonicalFactor(Scope([("x", 2), ("y", 1)]), K, h, 0.0)
    a, b = c_reduce(phi, {"y": 0.3}), c_marginalise(phi, ["y"])
    np.testing.assert_allclose(a.K, b.K)
    np.testing.assert_allclose(a.h, b.h)


def test_from_moments_round_trip(rng):
    A = rng.standard_normal((3, 3))
    cov = A @ A.T + np.eye(3)
    mean = rng.standard_normal(3)
    m, c = from_moments(mean, cov).moments()
    np.testing.assert_allclose(m, mean, atol=1e-12)
    np.testing.assert_allclose(c, cov, atol=1e-12)


def test_K_is_symmetrised():
    phi = CanonicalFactor(2, np.array([[1.0, 0.2], [0.0, 1.0]]), np.zeros(2), 0.0)
    np.testing.assert_array_equal(phi.K, phi.K.T)
