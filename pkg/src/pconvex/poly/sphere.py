"""Deterministic quasi-uniform sphere grids and minimization of |f| on spheres.

Grids are built so that every point of S^{k-1} lies within ``delta`` radians of
a grid direction.  Minimization scans the grid in chunks and polishes the best
few starts with a zero-residual least-squares solve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import least_squares

CHUNK = 400_000


def default_delta(k: int) -> float:
    return 0.01 if k <= 4 else 0.05


def sphere_chunks(k: int, delta: float, hemisphere: bool = False) -> Iterator[np.ndarray]:
    """Yield arrays of unit vectors in R^k covering the sphere at resolution ``delta``.

    With ``hemisphere=True`` only one point of each antipodal pair is produced
    (enough for functions with |f(-x)| = |f(x)|).
    """
    if k == 1:
        yield np.array([[1.0]]) if hemisphere else np.array([[1.0], [-1.0]])
        return
    if k == 2:
        span = math.pi if hemisphere else 2 * math.pi
        m = max(4, math.ceil(span / delta))
        th = np.arange(m) * (span / m)
        yield np.stack([np.cos(th), np.sin(th)], axis=1)
        return
    if k == 3:
        # Fibonacci lattice; mean spacing ~ sqrt(4 pi / N)
        n = max(64, math.ceil(4 * math.pi / delta**2))
        if hemisphere:
            n = (n + 1) // 2
        i = np.arange(n) + 0.5
        z = (1 - i / n) if hemisphere else (1 - 2 * i / n)
        r = np.sqrt(np.clip(1 - z * z, 0.0, None))
        phi = i * math.pi * (3 - math.sqrt(5))
        pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
        for s in range(0, n, CHUNK):
            yield pts[s : s + CHUNK]
        return
    yield from _sphere_chunks_recursive(k, delta, hemisphere)


def _sphere_chunks_recursive(k: int, delta: float, hemisphere: bool) -> Iterator[np.ndarray]:
    # x = (cos a * u, sin a * w) with u in S^{p-1}, w in S^{q-1}; a in [0, pi/2].
    p = k // 2
    q = k - p
    na = max(2, math.ceil((math.pi / 2) / delta)) + 1
    buf = []
    size = 0
    for a in np.linspace(0.0, math.pi / 2, na):
        ca, sa = math.cos(a), math.sin(a)
        du = delta / ca if ca > 1e-12 else None
        dw = delta / sa if sa > 1e-12 else None
        us = [np.eye(p)[:1]] if du is None else list(sphere_chunks(p, min(du, 1.0), hemisphere))
        ws = [np.eye(q)[:1]] if dw is None else list(sphere_chunks(q, min(dw, 1.0), False))
        U = np.vstack(us)
        Wp = np.vstack(ws)
        block = np.empty((len(U) * len(Wp), k))
        block[:, :p] = ca * np.repeat(U, len(Wp), axis=0)
        block[:, p:] = sa * np.tile(Wp, (len(U), 1))
        buf.append(block)
        size += len(block)
        if size >= CHUNK:
            yield np.vstack(buf)
            buf, size = [], 0
    if buf:
        yield np.vstack(buf)


@dataclass
class SphereMin:
    value: float            # min |f| found
    point: np.ndarray       # argmin on the (possibly weighted) sphere
    direction: np.ndarray   # the same point normalized to Euclidean length 1
    grid_min: float         # min over the raw grid (before polishing)
    n_grid: int


def _spread_starts(points: np.ndarray, values: np.ndarray, n: int, min_sep: float) -> list[int]:
    order = np.argsort(values, kind="stable")
    chosen: list[int] = []
    for idx in order:
        if len(chosen) >= n:
            break
        p = points[idx]
        if all(np.linalg.norm(points[c] - p) >= min_sep for c in chosen):
            chosen.append(int(idx))
    return chosen


def minimize_abs_on_sphere(
    f: Callable[[np.ndarray], np.ndarray],
    k: int,
    delta: float | None = None,
    mapping: Callable[[np.ndarray], np.ndarray] | None = None,
    hemisphere: bool = False,
    n_starts: int = 8,
    stop_below: float | None = None,
) -> SphereMin:
    """Minimize |f(mapping(u))| over unit vectors u in R^k.

    ``f`` takes an (N, k) array and returns N complex values.  ``mapping``
    sends unit vectors to another compact surface (the weighted sphere);
    it defaults to the identity.  ``stop_below`` allows an early exit once a
    polished value falls below it.
    """
    delta = default_delta(k) if delta is None else delta
    mapping = mapping or (lambda u: u)
    keep_n = 64
    best_pts = np.zeros((0, k))
    best_vals = np.zeros(0)
    n_grid = 0
    for chunk in sphere_chunks(k, delta, hemisphere):
        vals = np.abs(f(mapping(chunk)))
        n_grid += len(chunk)
        if len(vals) > keep_n:
            part = np.argpartition(vals, keep_n)[:keep_n]
        else:
            part = np.arange(len(vals))
        best_pts = np.vstack([best_pts, chunk[part]])
        best_vals = np.concatenate([best_vals, vals[part]])
        if len(best_vals) > keep_n:
            sel = np.argsort(best_vals, kind="stable")[:keep_n]
            best_pts, best_vals = best_pts[sel], best_vals[sel]
        if stop_below is not None and best_vals.min() < stop_below * 1e3:
            res = _polish(f, mapping, best_pts[np.argmin(best_vals)])
            if res[0] < stop_below:
                return _result(res, mapping, float(best_vals.min()), n_grid)
    grid_min = float(best_vals.min())
    starts = _spread_starts(best_pts, best_vals, n_starts, min_sep=4 * delta)
    results = [_polish(f, mapping, best_pts[i]) for i in starts]
    best = min(results, key=lambda r: r[0])
    if best[0] > grid_min:
        i = int(np.argmin(best_vals))
        best = (grid_min, best_pts[i] / np.linalg.norm(best_pts[i]))
    return _result(best, mapping, grid_min, n_grid)


def _result(res, mapping, grid_min, n_grid) -> SphereMin:
    value, u = res
    pt = mapping(u[None, :])[0]
    return SphereMin(float(value), pt, pt / np.linalg.norm(pt), grid_min, n_grid)


def _polish(f, mapping, u0: np.ndarray) -> tuple[float, np.ndarray]:
    def resid(u):
        nu = np.linalg.norm(u)
        v = f(mapping((u / nu)[None, :]))[0]
        return np.array([v.real, v.imag])

    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sol = least_squares(resid, u0, method="trf", xtol=1e-15, ftol=None, gtol=None, max_nfev=200)
        u = sol.x / np.linalg.norm(sol.x)
    except (ValueError, FloatingPointError):
        u = u0 / np.linalg.norm(u0)
    val = float(np.abs(f(mapping(u[None, :]))[0]))
    start_val = float(np.abs(f(mapping(u0[None, :] / np.linalg.norm(u0)))[0]))
    if start_val < val:
        return start_val, u0 / np.linalg.norm(u0)
    return val, u
