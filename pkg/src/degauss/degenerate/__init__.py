"""Degenerate Gaussian factors: a canonical factor times a Dirac delta."""
from .conditional import UnscentedParams, equivalent_transformation, represent_conditional, sigma_points
from .divergence import kl_divergence
from .factor import (
    OFF_MANIFOLD,
    DegenerateFactor,
    Moments,
    ZeroFactor,
    align,
    dense_limit_oracle,
    dirac,
    extend_scope,
    from_canonical,
    from_gaussian,
    is_normalisable,
    is_normalised,
    log_density,
    moments,
    normalise,
    normalising_g,
    rearrange_scope,
    to_canonical,
    vacuous,
    validate,
)
from .operations import affine_transform, divide, marginalise, multiply, reduce
from .serialise import dumps, from_dict, load, loads, save, to_dict

__all__ = [
    "OFF_MANIFOLD",
    "DegenerateFactor",
    "Moments",
    "UnscentedParams",
    "ZeroFactor",
    "affine_transform",
    "align",
    "dense_limit_oracle",
    "dirac",
    "divide",
    "dumps",
    "equivalent_transformation",
    "extend_scope",
    "from_canonical",
    "from_dict",
    "from_gaussian",
    "is_normalisable",
    "is_normalised",
    "kl_divergence",
    "load",
    "loads",
    "log_density",
    "marginalise",
    "moments",
    "multiply",
    "normalise",
    "normalising_g",
    "rearrange_scope",
    "reduce",
    "represent_conditional",
    "save",
    "sigma_points",
    "to_canonical",
    "to_dict",
    "vacuous",
    "validate",
]
