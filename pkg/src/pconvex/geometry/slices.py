"""Affine slices of a domain and a level-set test of the minimum principle.

A slice is the grid x0 + sum_j (i_j h) b_j over an extent box in W-coordinates,
with membership and boundary distance sampled at every cell.  Failure of the
minimum principle for d_X on the slice is witnessed by a sublevel component
{d < c} that stays away from the boundary of X and from the window frontier
and whose interior minimum lies more than 2h below the values on its rim.
Because d_X is 1-Lipschitz, such a witness survives refinement; a passing
scan is only evidence at resolution h.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..poly import Subspace
from .domains import Domain, NotInDomain

N_LEVELS = 32
MAX_SLICE_DIM = 3


@dataclass
class SliceGrid:
    domain: Domain
    origin: np.ndarray
    W: Subspace
    h: float
    index_lo: tuple           # integer grid index of cell [0, ..., 0] along each axis
    in_x: np.ndarray
    d: np.ndarray             # d_X at in-cells, 0 elsewhere, +inf when the complement is empty
    slice_id: str = ""

    @property
    def k(self) -> int:
        return self.W.dim

    @property
    def shape(self) -> tuple:
        return self.in_x.shape

    @property
    def extent(self) -> list[tuple[float, float]]:
        return [(lo * self.h, (lo + s - 1) * self.h) for lo, s in zip(self.index_lo, self.shape)]

    def axes(self) -> list[np.ndarray]:
        return [(lo + np.arange(s)) * self.h for lo, s in zip(self.index_lo, self.shape)]

    def local_coords(self, cells=None) -> np.ndarray:
        """W-coordinates of cells (all cells when ``cells`` is None)."""
        if cells is None:
            grids = np.meshgrid(*self.axes(), indexing="ij")
            return np.stack(grids, axis=-1)
        cells = np.atleast_2d(np.asarray(cells))
        return (cells + np.array(self.index_lo)) * self.h

    def points(self, cells=None) -> np.ndarray:
        return self.origin + self.local_coords(cells) @ self.W.basis

    def grid_index(self, cells) -> np.ndarray:
        """Integer multiples of h (relative to the origin) for array cells."""
        return np.atleast_2d(np.asarray(cells)) + np.array(self.index_lo)

    def frontier_mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for ax in range(self.k):
            sl = [slice(None)] * self.k
            sl[ax] = 0
            m[tuple(sl)] = True
            sl[ax] = -1
            m[tuple(sl)] = True
        return m

    def cell_of(self, local) -> tuple:
        idx = np.rint(np.asarray(local, dtype=float) / self.h).astype(int) - np.array(self.index_lo)
        if np.any(idx < 0) or np.any(idx >= np.array(self.shape)):
            raise ValueError("point lies outside the slice extent")
        return tuple(int(i) for i in idx)


def _extent_boxes(extent, k: int) -> list[tuple[float, float]]:
    if np.isscalar(extent):
        e = float(extent)
        return [(-e, e)] * k
    boxes = [tuple(map(float, b)) for b in extent]
    if len(boxes) == 1 and k > 1:
        boxes = boxes * k
    if len(boxes) != k:
        raise ValueError(f"extent needs {k} intervals, got {len(boxes)}")
    return boxes


def build_slice(X: Domain, x0, W: Subspace, h: float, extent=2.0, slice_id: str = "") -> SliceGrid:
    """Sample (x0 + W) intersected with X on a grid of spacing h."""
    if not h > 0:
        raise ValueError("grid spacing h must be positive")
    if W.ambient != X.ambient:
        raise ValueError("subspace and domain dimensions differ")
    if not 1 <= W.dim <= MAX_SLICE_DIM:
        raise ValueError(f"slice dimension must be 1..{MAX_SLICE_DIM}, got {W.dim}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (X.ambient,):
        raise ValueError("origin dimension mismatch")
    lo_idx, shape = [], []
    for a, b in _extent_boxes(extent, W.dim):
        i0, i1 = math.ceil(a / h - 1e-9), math.floor(b / h + 1e-9)
        if i1 - i0 < 1:
            raise ValueError(f"degenerate extent [{a}, {b}] at spacing {h}")
        lo_idx.append(i0)
        shape.append(i1 - i0 + 1)
    sg = SliceGrid(X, x0, W, float(h), tuple(lo_idx), np.zeros(shape, bool), np.zeros(shape), slice_id)
    P = sg.points()
    inside = X.contains(P)
    d = np.where(inside, X.distance(P), 0.0)
    sg.in_x = inside
    sg.d = d
    return sg


# -- reports ----------------------------------------------------------------

@dataclass
class HoldsUpTo:
    h: float
    extent: list
    slices_checked: int = 1
    notes: list = field(default_factory=list)
    status = "holds"

    def to_json(self):
        return {"status": self.status, "h": self.h, "extent": self.extent,
                "slices_checked": self.slices_checked, "notes": self.notes}


@dataclass
class FailsCertificate:
    slice_id: str
    origin: list
    basis: list
    h: float
    extent: list
    level: float
    K: list                  # integer grid indices (multiples of h from the origin)
    interior_point: list
    interior_local: list
    interior_min: float
    boundary_min: float
    boundary_point: list
    margin: float
    status = "fails"

    def to_json(self):
        return {"status": self.status, "slice_id": self.slice_id, "origin": self.origin,
                "basis": self.basis, "h": self.h, "extent": self.extent, "level": self.level,
                "K_size": len(self.K), "K": self.K, "interior_point": self.interior_point,
                "interior_local": self.interior_local, "interior_min": self.interior_min,
                "boundary_min": self.boundary_min, "boundary_point": self.boundary_point,
                "margin": self.margin}

    @classmethod
    def from_json(cls, d: dict) -> "FailsCertificate":
        keys = ("slice_id", "origin", "basis", "h", "extent", "level", "K", "interior_point",
                "interior_local", "interior_min", "boundary_min", "boundary_point", "margin")
        return cls(**{k: d[k] for k in keys})


@dataclass
class Inconclusive:
    reason: str
    h: float | None = None
    status = "inconclusive"

    def to_json(self):
        return {"status": self.status, "reason": self.reason, "h": self.h}


@dataclass
class FamilyReport:
    """Aggregate over slices; ``result`` is the deciding report."""

    result: object
    slices: list = field(default_factory=list)       # (slice_id, report)
    failures: list = field(default_factory=list)
    empty: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return self.result.status

    def to_json(self):
        return {"status": self.status, "result": self.result.to_json(),
                "slices": [{"slice_id": s, "status": r.status} for s, r in self.slices],
                "certificates": [f.to_json() for f in self.failures], "empty_slices": self.empty}


# -- component statistics ----------------------------------------------------

def _neighbor_pairs(k: int):
    for ax in range(k):
        for sgn in (1, -1):
            yield ax, sgn


def _shift_view(arr, ax, sgn):
    """(src, dst) slices so that arr[dst] is the sgn-neighbour of arr[src] along ax."""
    k = arr.ndim
    src = [slice(None)] * k
    dst = [slice(None)] * k
    if sgn > 0:
        src[ax], dst[ax] = slice(0, -1), slice(1, None)
    else:
        src[ax], dst[ax] = slice(1, None), slice(0, -1)
    return tuple(src), tuple(dst)


def _component_stats(sg: SliceGrid, labels: np.ndarray, ncomp: int):
    """Per component: interior min and argmin, rim min and argmin, escape and frontier flags."""
    d = sg.d
    flat_lab = labels.ravel()
    idx = np.arange(1, ncomp + 1)
    int_min = ndimage.minimum(d, labels, idx)
    int_arg = ndimage.minimum_position(d, labels, idx)
    near = (d < 2 * sg.h) & (labels > 0)
    escapes = np.zeros(ncomp + 1, bool)
    escapes[np.unique(labels[near])] = True
    fr = sg.frontier_mask() & (labels > 0)
    touches = np.zeros(ncomp + 1, bool)
    touches[np.unique(labels[fr])] = True
    fr_min = np.full(ncomp + 1, np.inf)
    np.minimum.at(fr_min, labels[fr], d[fr])
    rim_min = np.full(ncomp + 1, np.inf)
    rim_arg = np.full(ncomp + 1, -1, dtype=np.int64)
    flat_index = np.arange(labels.size).reshape(labels.shape)
    for ax, sgn in _neighbor_pairs(sg.k):
        src, dst = _shift_view(labels, ax, sgn)
        la, lb = labels[src], labels[dst]
        sel = (la > 0) & (lb != la)
        if not sel.any():
            continue
        owners = la[sel]
        nb_in = sg.in_x[dst][sel]
        # a neighbour outside X means the component touches the boundary of X
        escapes[owners[~nb_in]] = True
        vals = np.where(nb_in, d[dst][sel], np.inf)
        where = flat_index[dst][sel]
        order = np.lexsort((vals, owners))
        o, v, w = owners[order], vals[order], where[order]
        first = np.r_[True, o[1:] != o[:-1]]
        o, v, w = o[first], v[first], w[first]
        better = v < rim_min[o]
        rim_min[o[better]] = v[better]
        rim_arg[o[better]] = w[better]
    return {
        "int_min": np.r_[np.inf, int_min], "int_arg": [None] + list(int_arg),
        "escapes": escapes, "touches": touches, "fr_min": fr_min,
        "rim_min": rim_min, "rim_arg": rim_arg, "size": np.bincount(flat_lab, minlength=ncomp + 1),
    }


def _levels(d_in: np.ndarray) -> np.ndarray:
    pos = d_in[(d_in > 0) & np.isfinite(d_in)]
    if not len(pos):
        return np.zeros(0)
    lo, hi = float(pos.min()), float(pos.max())
    if hi <= lo:
        return np.zeros(0)
    # strictly above the minimum so the deepest basin is always represented
    return np.geomspace(lo, hi, N_LEVELS + 1)[1:]


def _component_of(sg: SliceGrid, seed: tuple, level: float):
    mask = sg.in_x & (sg.d < level)
    labels, _ = ndimage.label(mask)
    lab = labels[seed]
    return labels, lab


def _radius_from(sg: SliceGrid, comp: np.ndarray, seed: tuple) -> float:
    cells = np.argwhere(comp)
    return float(np.max(np.linalg.norm((cells - np.array(seed)) * sg.h, axis=1)))


def _frontier_distance(sg: SliceGrid, seed: tuple) -> float:
    s = np.array(seed)
    return float(min(np.min(s), np.min(np.array(sg.shape) - 1 - s)) * sg.h)


def _certificate(sg: SliceGrid, labels, lab, level, stats) -> FailsCertificate:
    comp = labels == lab
    cells = np.argwhere(comp)
    seed = tuple(int(v) for v in stats["int_arg"][lab])
    rim_cell = np.unravel_index(int(stats["rim_arg"][lab]), sg.shape)
    return FailsCertificate(
        slice_id=sg.slice_id,
        origin=sg.origin.tolist(),
        basis=sg.W.basis.tolist(),
        h=sg.h,
        extent=[list(e) for e in sg.extent],
        level=float(level),
        K=sg.grid_index(cells).tolist(),
        interior_point=sg.points([seed])[0].tolist(),
        interior_local=sg.local_coords([seed])[0].tolist(),
        interior_min=float(stats["int_min"][lab]),
        boundary_min=float(stats["rim_min"][lab]),
        boundary_point=sg.points([rim_cell])[0].tolist(),
        margin=2 * sg.h,
    )


def _is_failure(stats, lab, h) -> bool:
    return (not stats["escapes"][lab] and not stats["touches"][lab]
            and stats["int_min"][lab] + 2 * h < stats["rim_min"][lab])


def _canonical_failure(sg: SliceGrid, seed: tuple, fallback):
    """Among the nested failing sublevel components around ``seed``, pick the one
    whose radius is closest to half the seed's distance to the window frontier."""
    target = 0.5 * _frontier_distance(sg, seed)
    vals = np.unique(sg.d[sg.in_x & np.isfinite(sg.d)])
    vals = vals[vals > sg.d[seed]]
    lo, hi = 0, len(vals) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        c = float(vals[mid])
        labels, lab = _component_of(sg, seed, c)
        comp = labels == lab
        r = _radius_from(sg, comp, seed)
        if comp[sg.frontier_mask()].any():
            hi = mid - 1
            continue
        stats = _component_stats(sg, labels, int(labels.max()))
        if _is_failure(stats, lab, sg.h):
            gap = abs(r - target)
            if best is None or gap < best[0]:
                best = (gap, labels, lab, c, stats)
        if r < target:
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        return fallback
    _, labels, lab, c, stats = best
    return _certificate(sg, labels, lab, c, stats)


def min_principle_slice(sg: SliceGrid) -> object:
    """HoldsUpTo, FailsCertificate or Inconclusive for d_X on one slice."""
    if not sg.in_x.any():
        return Inconclusive("slice does not meet the domain", sg.h)
    d_in = sg.d[sg.in_x]
    if np.all(np.isinf(d_in)):
        return HoldsUpTo(sg.h, sg.extent, notes=["complement is empty; d is identically +inf"])
    inconclusive = None
    for c in _levels(d_in):
        mask = sg.in_x & (sg.d < c)
        labels, ncomp = ndimage.label(mask)
        if not ncomp:
            continue
        stats = _component_stats(sg, labels, ncomp)
        for lab in range(1, ncomp + 1):
            if stats["escapes"][lab]:
                continue
            if not stats["touches"][lab]:
                if _is_failure(stats, lab, sg.h):
                    fallback = _certificate(sg, labels, lab, c, stats)
                    seed = tuple(int(v) for v in stats["int_arg"][lab])
                    return _canonical_failure(sg, seed, fallback)
                continue
            barrier = min(stats["rim_min"][lab], stats["fr_min"][lab])
            if stats["int_min"][lab] + 2 * sg.h < barrier and inconclusive is None:
                inconclusive = Inconclusive(
                    f"sublevel component at level {c:.6g} has an interior minimum "
                    f"{stats['int_min'][lab]:.6g} but reaches the window frontier", sg.h)
    if inconclusive is not None:
        return inconclusive
    return HoldsUpTo(sg.h, sg.extent)


# -- families of slices --------------------------------------------------------

def default_offsets(X: Domain, W: Subspace, steps=(0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0)) -> list[np.ndarray]:
    """Translates of the domain center along a grid in the complement of W."""
    base = X.center()
    C = W.complement()
    if C.is_trivial:
        return [base]
    grids = np.meshgrid(*[np.array(steps, dtype=float)] * C.dim, indexing="ij")
    coef = np.stack([g.ravel() for g in grids], axis=1)
    return [base + c @ C.basis for c in coef]


def _subslices(W: Subspace, count: int, rng) -> list[Subspace]:
    out = []
    for _ in range(count):
        c = rng.normal(size=(2, W.dim))
        out.append(Subspace.span(c @ W.basis, W.ambient))
    return out


def min_principle_family(X: Domain, W: Subspace, offsets=None, h: float = 0.05, extent=2.0,
                         seed: int = 0, subslices: int = 4) -> FamilyReport:
    """Check the minimum principle on the slices x + W for the given offsets x.

    Failures dominate.  A passing result is resolution-qualified; when W has
    dimension above 3 only random 2-D subslices are examined, so passing
    becomes Inconclusive.
    """
    if W.is_trivial:
        return FamilyReport(HoldsUpTo(h, [], 0, ["W is trivial; every compact subset is its own boundary"]))
    if offsets is None:
        offsets = default_offsets(X, W)
    rng = np.random.default_rng(seed)
    pieces = [W] if W.dim <= MAX_SLICE_DIM else None
    rep = FamilyReport(None)
    inconclusive = None
    for i, x in enumerate(offsets):
        x = np.asarray(x, dtype=float)
        subs = pieces if pieces is not None else _subslices(W, subslices, rng)
        for j, S in enumerate(subs):
            sid = f"s{i:03d}" if pieces is not None else f"s{i:03d}.{j}"
            sg = build_slice(X, x, S, h, extent, slice_id=sid)
            if not sg.in_x.any():
                # no compact subsets to test on a slice that misses X
                rep.empty.append(sid)
                continue
            r = min_principle_slice(sg)
            rep.slices.append((sid, r))
            if r.status == "fails":
                rep.failures.append(r)
            elif r.status == "inconclusive" and inconclusive is None:
                inconclusive = r
    if rep.failures:
        rep.result = rep.failures[0]
    elif inconclusive is not None:
        rep.result = inconclusive
    elif not rep.slices:
        rep.result = Inconclusive("no slice of the family meets the domain", h)
    elif pieces is None:
        rep.result = Inconclusive(f"dim W = {W.dim} > {MAX_SLICE_DIM}: only 2-D subslices were examined", h)
    else:
        notes = ["distance is approximate"] if X.approximate else []
        ext = _extent_boxes(extent, W.dim)
        rep.result = HoldsUpTo(h, [list(e) for e in ext], len(rep.slices), notes)
    return rep


# -- paths and replay ----------------------------------------------------------

def escape_path(sg: SliceGrid, start, K=()) -> list[tuple] | None:
    """Grid path through in-cells avoiding K to a cell near the boundary of X
    (d < 2h) or on the window frontier.  None when no such path exists or when
    ``start`` lies in K."""
    start = tuple(int(v) for v in start)
    if not sg.in_x[start]:
        raise NotInDomain(f"start cell {start} is not in the domain")
    blocked = np.zeros(sg.shape, bool)
    for c in K:
        blocked[tuple(c)] = True
    if blocked[start]:
        return None
    goal = (sg.d < 2 * sg.h) | sg.frontier_mask()
    prev = {start: None}
    q = deque([start])
    shape = sg.shape
    while q:
        c = q.popleft()
        if goal[c] and sg.in_x[c]:
            path = []
            while c is not None:
                path.append(c)
                c = prev[c]
            return path[::-1]
        for ax, sgn in _neighbor_pairs(sg.k):
            nb = list(c)
            nb[ax] += sgn
            nb = tuple(nb)
            if not 0 <= nb[ax] < shape[ax] or nb in prev:
                continue
            if sg.in_x[nb] and not blocked[nb]:
                prev[nb] = c
                q.append(nb)
    return None


@dataclass
class ReplayResult:
    ok: bool
    h: float
    interior_min: float
    boundary_min: float
    reason: str = ""

    def to_json(self):
        return {"ok": self.ok, "h": self.h, "interior_min": self.interior_min,
                "boundary_min": self.boundary_min, "reason": self.reason}


def replay_certificate(X: Domain, cert: FailsCertificate, factor: int = 2) -> ReplayResult:
    """Re-check a certificate on the slice refined by ``factor``.

    The refined K is the set of fine cells whose centers lie in the closed
    coarse cells of K; the check requires K to stay 2*h_fine away from the
    boundary of X and its interior minimum to lie 2*h_fine below its rim.
    """
    basis = np.asarray(cert.basis, dtype=float)
    W = Subspace(X.ambient, basis) if _orthonormal(basis) else Subspace.span(basis, X.ambient)
    hf = cert.h / factor
    ext = [tuple(e) for e in cert.extent]
    sg = build_slice(X, cert.origin, W, hf, ext, slice_id=cert.slice_id + f"/replay{factor}")
    Kc = {tuple(c) for c in cert.K}
    fine = sg.grid_index(np.argwhere(np.ones(sg.shape, bool)))    # integer multiples of hf
    # coarse cells whose closed cube contains the fine center
    inK = np.zeros(len(fine), bool)
    lo = np.floor(fine / factor).astype(int)
    hi = np.ceil(fine / factor).astype(int)
    k = basis.shape[0]
    for corner in range(1 << k):
        pick = np.array([(corner >> j) & 1 for j in range(k)])
        cand = np.where(pick, hi, lo)
        inK |= np.array([tuple(c) in Kc for c in cand])
    Kmask = inK.reshape(sg.shape)
    if not Kmask.any():
        return ReplayResult(False, hf, math.inf, math.inf, "refined K is empty")
    if (Kmask & sg.frontier_mask()).any():
        return ReplayResult(False, hf, math.inf, math.inf, "refined K reaches the window frontier")
    if not sg.in_x[Kmask].all() or (sg.d[Kmask] < 2 * hf).any():
        return ReplayResult(False, hf, math.inf, math.inf, "refined K comes within 2h of the boundary")
    int_min = float(sg.d[Kmask].min())
    rim = ndimage.binary_dilation(Kmask) & ~Kmask
    if not sg.in_x[rim].all():
        return ReplayResult(False, hf, int_min, 0.0, "rim of K leaves the domain")
    b_min = float(sg.d[rim].min())
    ok = int_min + 2 * hf < b_min
    return ReplayResult(ok, hf, int_min, b_min, "" if ok else "margin violated at refined spacing")


def _orthonormal(B: np.ndarray) -> bool:
    return np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-12)
