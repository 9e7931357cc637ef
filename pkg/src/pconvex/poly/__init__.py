"""Exact polynomial symbols and their structural analysis."""

from .analysis import (
    EllipticityReport,
    NotActingAlong,
    SemiEllipticity,
    ZeroSetReport,
    augment,
    dependence_subspace,
    is_elliptic_on,
    principal_part,
    restrict_to_subspace,
    semi_elliptic_weights,
    vanishes_on_subspace,
    zero_set_structure,
)
from .parser import PolynomialSyntaxError, parse_polynomial
from .polynomial import GaussQ, NumericPoly, Polynomial
from .presets import get_preset, resolve_operator
from .subspace import Subspace, parse_subspace


def evaluate(P: Polynomial, point) -> complex:
    return P.evaluate(point)


__all__ = [
    "EllipticityReport", "GaussQ", "NotActingAlong", "NumericPoly", "Polynomial",
    "PolynomialSyntaxError", "SemiEllipticity", "Subspace", "ZeroSetReport", "augment",
    "dependence_subspace", "evaluate", "get_preset", "is_elliptic_on", "parse_polynomial",
    "parse_subspace", "principal_part", "resolve_operator", "restrict_to_subspace",
    "semi_elliptic_weights", "vanishes_on_subspace", "zero_set_structure",
]
