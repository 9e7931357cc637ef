"""Open sets with an exact (or flagged approximate) distance to the complement.

Every variant provides vectorized ``contains`` and ``distance`` on arrays of
shape (..., n).  ``distance`` is only meaningful at points of the set; it
returns +inf where the complement is empty.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..poly import Subspace


class NotInDomain(ValueError):
    pass


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class Domain:
    """Base class; subclasses set ``ambient`` and implement the two kernels."""

    @property
    def ambient(self) -> int:
        raise NotImplementedError

    def contains(self, X) -> np.ndarray:
        raise NotImplementedError

    def distance(self, X) -> np.ndarray:
        raise NotImplementedError

    is_convex = False
    is_bounded = False
    approximate = False

    def center(self) -> np.ndarray:
        return np.zeros(self.ambient)

    def error_bound(self) -> float:
        return 0.0

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, X) -> np.ndarray:
        X = _arr(X)
        if X.shape[-1] != self.ambient:
            raise ValueError(f"points have dimension {X.shape[-1]}, domain lives in R^{self.ambient}")
        return X


@dataclass(frozen=True, eq=False)
class FullSpace(Domain):
    n: int
    is_convex = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def ambient(self):
        return self.n

    def contains(self, X):
        X = self._check_dim(X)
        return np.ones(X.shape[:-1], dtype=bool)

    def distance(self, X):
        X = self._check_dim(X)
        return np.full(X.shape[:-1], np.inf)

    def to_json(self):
        return {"type": "full", "n": self.n}


@dataclass(frozen=True, eq=False)
class OpenBall(Domain):
    center_: tuple
    radius: float
    is_convex = True
    is_bounded = True

    def __post_init__(self):
        object.__setattr__(self, "center_", tuple(float(c) for c in self.center_))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if not self.center_:
            raise ValueError("ball center must be nonempty")

    @property
    def ambient(self):
        return len(self.center_)

    def center(self):
        return np.array(self.center_)

    def distance(self, X):
        X = self._check_dim(X)
        return self.radius - np.linalg.norm(X - self.center(), axis=-1)

    def contains(self, X):
        return self.distance(X) > 0

    def to_json(self):
        return {"type": "ball", "center": list(self.center_), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class OpenBox(Domain):
    lo: tuple
    hi: tuple
    is_convex = True
    is_bounded = True

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("box corners must have equal positive length")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi in every coordinate")

    @property
    def ambient(self):
        return len(self.lo)

    def center(self):
        return (np.array(self.lo) + np.array(self.hi)) / 2

    def distance(self, X):
        X = self._check_dim(X)
        return np.minimum(X - np.array(self.lo), np.array(self.hi) - X).min(axis=-1)

    def contains(self, X):
        return self.distance(X) > 0

    def to_json(self):
        return {"type": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True, eq=False)
class HalfSpace(Domain):
    """{x : <normal, x> < offset}."""

    normal: tuple
    offset: float
    is_convex = True

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(float(v) for v in self.normal))
        if not self.normal or not np.any(np.array(self.normal) != 0):
            raise ValueError("half-space normal must be nonzero")

    @property
    def ambient(self):
        return len(self.normal)

    def center(self):
        nv = np.array(self.normal)
        # the point of the boundary hyperplane nearest the origin
        return nv * (self.offset / nv.dot(nv))

    def distance(self, X):
        X = self._check_dim(X)
        nv = np.array(self.normal)
        return (self.offset - X @ nv) / np.linalg.norm(nv)

    def contains(self, X):
        return self.distance(X) > 0

    def to_json(self):
        return {"type": "halfspace", "normal": list(self.normal), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class ComplementOfAffine(Domain):
    """R^n minus the affine subspace point + A (A a proper linear subspace)."""

    point: tuple
    A: Subspace

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))
        if self.A.ambient != len(self.point):
            raise ValueError("affine subspace dimension mismatch")
        if self.A.is_full:
            raise ValueError("removing all of R^n leaves the empty set")

    @property
    def ambient(self):
        return len(self.point)

    def center(self):
        return np.array(self.point)

    def distance(self, X):
        X = self._check_dim(X)
        v = X - np.array(self.point)
        if self.A.dim:
            v = v - (v @ self.A.basis.T) @ self.A.basis
        return np.linalg.norm(v, axis=-1)

    def contains(self, X):
        return self.distance(X) > 0

    def to_json(self):
        return {"type": "complement_affine", "point": list(self.point), "directions": self.A.to_json()["basis"]}


@dataclass(frozen=True, eq=False)
class FiniteIntersection(Domain):
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("intersection needs at least one member")
        dims = {m.ambient for m in self.members}
        if len(dims) != 1:
            raise ValueError("intersection members must share the ambient dimension")

    @property
    def ambient(self):
        return self.members[0].ambient

    @property
    def is_convex(self):
        return all(m.is_convex for m in self.members)

    @property
    def is_bounded(self):
        return any(m.is_bounded for m in self.members)

    @property
    def approximate(self):
        return any(m.approximate for m in self.members)

    def error_bound(self):
        return max(m.error_bound() for m in self.members)

    def center(self):
        for m in self.members:
            if m.is_bounded:
                return m.center()
        return self.members[0].center()

    def contains(self, X):
        out = self.members[0].contains(X)
        for m in self.members[1:]:
            out = out & m.contains(X)
        return out

    def distance(self, X):
        # the complement is a union, so its distance is the min of the distances
        out = self.members[0].distance(X)
        for m in self.members[1:]:
            out = np.minimum(out, m.distance(X))
        return out

    def to_json(self):
        return {"type": "intersection", "members": [m.to_json() for m in self.members]}


@dataclass(frozen=True, eq=False)
class GridDomain(Domain):
    """Union of the open grid cells flagged in ``mask`` (row-major, axis j = x_{j+1}).

    Cell i covers [lo + i*h, lo + (i+1)*h).  The distance is the Euclidean
    distance transform of the padded mask, shifted by h/2 and interpolated
    multilinearly; it is approximate with error at most h*sqrt(n).
    """

    lo: tuple
    spacing: float
    mask: np.ndarray = field(repr=False)
    source: str | None = None
    approximate = True

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != len(self.lo):
            raise ValueError("grid mask rank must equal the length of lo")
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        padded = np.pad(m, 1, constant_values=False)
        edt = ndimage.distance_transform_edt(padded) * self.spacing - self.spacing / 2
        edt[~padded] = 0.0
        edt.setflags(write=False)
        object.__setattr__(self, "_edt", edt)

    is_bounded = True

    @property
    def ambient(self):
        return len(self.lo)

    def error_bound(self):
        return self.spacing * math.sqrt(self.ambient)

    def center(self):
        idx = np.argwhere(self.mask)
        if not len(idx):
            return np.array(self.lo)
        return np.array(self.lo) + (idx.mean(axis=0) + 0.5) * self.spacing

    def _cell(self, X):
        return np.floor((X - np.array(self.lo)) / self.spacing).astype(np.int64)

    def contains(self, X):
        X = self._check_dim(X)
        idx = self._cell(X)
        inside = np.all((idx >= 0) & (idx < np.array(self.mask.shape)), axis=-1)
        out = np.zeros(X.shape[:-1], dtype=bool)
        safe = np.where(inside[..., None], idx, 0)
        out[...] = inside & self.mask[tuple(np.moveaxis(safe, -1, 0))]
        return out

    def distance(self, X):
        X = self._check_dim(X)
        # padded-array coordinates of the point, with cell centers at integers
        q = (X - np.array(self.lo)) / self.spacing - 0.5 + 1.0
        flat = q.reshape(-1, self.ambient).T
        d = ndimage.map_coordinates(self._edt, flat, order=1, mode="constant", cval=0.0)
        d = d.reshape(X.shape[:-1])
        inside = self.contains(X)
        return np.where(inside, np.maximum(d, 1e-12), 0.0)

    def to_json(self):
        out = {"type": "grid", "lo": list(self.lo), "spacing": self.spacing, "shape": list(self.mask.shape)}
        if self.source:
            out["file"] = self.source
        return out

    @classmethod
    def from_raw(cls, path, shape, lo, spacing) -> "GridDomain":
        """Load a row-major byte grid (nonzero = inside)."""
        raw = np.fromfile(path, dtype=np.uint8)
        shape = tuple(int(s) for s in shape)
        if raw.size != int(np.prod(shape)):
            raise ValueError(f"grid file {path} has {raw.size} bytes, header shape {shape} needs {int(np.prod(shape))}")
        return cls(tuple(lo), float(spacing), raw.reshape(shape) != 0, source=str(path))

    @classmethod
    def from_header(cls, header_path) -> "GridDomain":
        header_path = Path(header_path)
        hdr = json.loads(header_path.read_text())
        return cls.from_raw(header_path.parent / hdr["file"], hdr["shape"], hdr["lo"], hdr["spacing"])


@dataclass(frozen=True, eq=False)
class Product(Domain):
    """base x R: the last coordinate is free."""

    base: Domain

    @property
    def ambient(self):
        return self.base.ambient + 1

    @property
    def is_convex(self):
        return self.base.is_convex

    @property
    def approximate(self):
        return self.base.approximate

    def error_bound(self):
        return self.base.error_bound()

    def center(self):
        return np.append(self.base.center(), 0.0)

    def contains(self, X):
        X = self._check_dim(X)
        return self.base.contains(X[..., :-1])

    def distance(self, X):
        X = self._check_dim(X)
        return self.base.distance(X[..., :-1])

    def to_json(self):
        return {"type": "product", "base": self.base.to_json()}


def boundary_distance(X: Domain, x) -> float:
    """dist(x, complement of X) for a single point x of X."""
    x = _arr(x)
    if x.shape != (X.ambient,):
        raise ValueError(f"point has shape {x.shape}, expected ({X.ambient},)")
    if not X.contains(x[None])[0]:
        raise NotInDomain(f"point {x.tolist()} is not in the domain")
    return float(X.distance(x[None])[0])


def product_lift(X: Domain) -> Product:
    return Product(X)


def punctured_space(n: int) -> ComplementOfAffine:
    return ComplementOfAffine((0.0,) * n, Subspace.trivial(n))


def complement_of_axis(n: int, axis: int) -> ComplementOfAffine:
    """R^n minus the x_{axis+1} coordinate axis (axis is 0-based)."""
    return ComplementOfAffine((0.0,) * n, Subspace.coordinates(n, [axis]))
