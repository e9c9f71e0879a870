"""Relative coderivatives of polyhedral set-valued maps: exact cones, criteria, calculus and oracles."""
__version__ = "0.1.0"

from .coderivative import (
    CoderivativeObject,
    kernel,
    limiting_coderivative,
    mirror_coderivative,
    outer_norm,
    regular_coderivative,
    zero_image,
)
from .cones import PolyCone, polar
from .multifunction import PolyMultimap, compose, invert, msum, restrict
from .polyhedra import Polyhedron
from .wellposedness import certify_lipschitz_like, certify_property, linear_operator_certificate
