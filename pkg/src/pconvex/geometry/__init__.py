"""Domains, slices and the minimum principle for the boundary distance."""

from .characteristic import characteristic_directions
from .config import DomainConfigError, domain_from_mapping, load_domain, write_grid
from .domains import (
    ComplementOfAffine,
    Domain,
    FiniteIntersection,
    FullSpace,
    GridDomain,
    HalfSpace,
    NotInDomain,
    OpenBall,
    OpenBox,
    Product,
    boundary_distance,
    complement_of_axis,
    product_lift,
    punctured_space,
)
from .slices import (
    FailsCertificate,
    FamilyReport,
    HoldsUpTo,
    Inconclusive,
    ReplayResult,
    SliceGrid,
    build_slice,
    default_offsets,
    escape_path,
    min_principle_family,
    min_principle_slice,
    replay_certificate,
)

__all__ = [
    "ComplementOfAffine", "Domain", "DomainConfigError", "FailsCertificate", "FamilyReport",
    "FiniteIntersection", "FullSpace", "GridDomain", "HalfSpace", "HoldsUpTo", "Inconclusive",
    "NotInDomain", "OpenBall", "OpenBox", "Product", "ReplayResult", "SliceGrid",
    "boundary_distance", "build_slice", "characteristic_directions", "complement_of_axis",
    "default_offsets", "domain_from_mapping", "escape_path", "load_domain", "min_principle_family",
    "min_principle_slice", "product_lift", "punctured_space", "replay_certificate", "write_grid",
]
