"""Working with Gaussians whose covariance is singular.

Run with ``python demos/constrained_factors.py``.
"""
import numpy as np

from degauss.degenerate import dirac, from_gaussian, marginalise, moments, multiply, reduce

np.set_printoptions(precision=4, suppress=True)

# A 2-D Gaussian that lives on the line x = y: its covariance has rank one.
line = from_gaussian([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], scope=[("x", 1), ("y", 1)])
print("factor on the line x = y")
print("  free direction Q:", line.Q.ravel(), " precision:", line.lam)
print("  constrained direction R:", line.R.ravel(), " offset c:", line.c)

# Observing y pins x exactly, even though the covariance has no inverse.
given_y = reduce(line, {"y": 3.0})
print("\nafter observing y = 3: x is a point mass at", moments(given_y).mean)

# Marginalising y leaves an ordinary Gaussian over x.
print("marginal of x:", moments(marginalise(line, ["y"])))

# Two planes in 3-D meet in a line; the product keeps both constraints.
scope = [("a", 1), ("b", 1), ("c", 1)]
plane1 = from_gaussian([0.0, 0.0, 0.0], np.diag([1.0, 0.0, 1.0]), scope=scope)
plane2 = from_gaussian([0.0, 0.0, 0.0], np.diag([1.0, 1.0, 0.0]), scope=scope)
both = multiply(plane1, plane2)
print(f"\nproduct of b = 0 and c = 0: {both.k} constraints, covariance")
print(moments(both).cov)

# Contradictory hard constraints give the zero factor instead of garbage.
print("\nx = 1 times x = 2 is zero:", multiply(dirac([("x", 1)], [1.0]), dirac([("x", 1)], [2.0])).is_zero)
