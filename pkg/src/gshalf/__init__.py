"""Fields of cold relativistic beams above a perfectly conducting plane.

The electromagnetic field of a collisionless beam distribution in the half
space x3 > 0 is assembled from retarded integrals over the backward light cone,
with mirrored contributions enforcing the conductor conditions on x3 = 0.
Independent oracles (whole-space extension, spherical means, finite-difference
wave and Maxwell solvers) live in :mod:`gshalf.oracle`.
"""
__version__ = "0.1.0"

from .distribution import BeamComponent, Distribution, charge_density, current_density, support_margin
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .representation import (
    GivenField,
    Scenario,
    evaluate_points,
    represent_B,
    represent_E,
    represent_fields,
    whole_space_fields,
)

__all__ = [
    "BeamComponent",
    "DEFAULT_SPEC",
    "Distribution",
    "GivenField",
    "QuadratureSpec",
    "Scenario",
    "charge_density",
    "current_density",
    "evaluate_points",
    "represent_B",
    "represent_E",
    "represent_fields",
    "support_margin",
    "whole_space_fields",
]
