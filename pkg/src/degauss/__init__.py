"""Gaussian inference with singular covariances.

Factors whose covariance may be singular are represented as a canonical
(information form) factor on a subspace times a Dirac delta on its
complement.  The package provides their algebra, a chain message-passing
engine and a cooperative robot localisation experiment.
"""
from .scope import Scope

__version__ = "0.1.0"

__all__ = ["Scope", "__version__"]
