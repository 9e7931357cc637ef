"""Characteristic directions of a symbol with subspace principal zero set."""

from __future__ import annotations

import numpy as np

from ..poly import Polynomial, principal_part, zero_set_structure


def characteristic_directions(P: Polynomial) -> list[np.ndarray]:
    """+-basis of Z = {P_m = 0}; the hyperplanes x + N^perp are characteristic."""
    zs = zero_set_structure(principal_part(P))
    if zs.kind == "trivial":
        return []
    if zs.kind != "subspace":
        raise ValueError(f"principal zero set is {zs.kind}, not a subspace")
    out = []
    for b in zs.subspace.basis:
        out += [b.copy(), -b]
    return out
