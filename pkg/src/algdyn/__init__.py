"""Computational tools for principal algebraic Z^d actions.

Group-ring arithmetic, convolution inverses, fundamental homoclinic points,
zero-set scanning on the torus and an exact surjectivity / pre-injectivity
harness for affine endomorphisms.
"""
from .group_ring import (
    GroupRingElement,
    LaurentPolynomial,
    RationalGroupRingElement,
    content,
    convolve,
    divides,
    involution,
    is_lopsided,
    is_primitive,
    is_well_balanced,
    norm,
    primitive_part,
)
from .polyio import parse_expression, read_poly

__version__ = "0.1.0"

__all__ = [
    "GroupRingElement",
    "LaurentPolynomial",
    "RationalGroupRingElement",
    "content",
    "convolve",
    "divides",
    "involution",
    "is_lopsided",
    "is_primitive",
    "is_well_balanced",
    "norm",
    "primitive_part",
    "parse_expression",
    "read_poly",
]
