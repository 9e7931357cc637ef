"""Localization functionals of a polynomial symbol.

    P~_V(xi, t) = sup { |P(x + xi)| : x in V, |x| <= t }
    sigma_P(V)  = inf_{t >= 1} liminf_{xi -> oo} P~_V(xi, t) / P~(xi, t)
    sigma0_P(V) = inf_{t >= 1, xi}               P~_V(xi, t) / P~(xi, t)

The suprema are estimated by quasi-random sampling of the ball followed by
projected gradient ascent; the liminf is replaced by a minimum over directions
at the largest radius of a schedule.  These estimates carry no error bound and
are advisory.  Exact answers for the classes where the zero set of sigma_P is
known in closed form come from :func:`sigma_zero_subspace_exact`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .poly import (
    NotActingAlong,
    Polynomial,
    Subspace,
    dependence_subspace,
    is_elliptic_on,
    principal_part,
    semi_elliptic_weights,
    zero_set_structure,
)

DEFAULT_SEED = 0xC0FFEE
N_ASCENT_STARTS = 5
_SAMPLE_BLOCK = 1 << 16     # points per vectorized block


@dataclass(frozen=True)
class SigmaParams:
    t_grid: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    radius_schedule: tuple[float, ...] = (10.0, 1e2, 1e3, 1e4)
    n_directions: int = 200
    ball_samples: int = 500
    descent_iters: int = 50
    seed: int = DEFAULT_SEED
    small_radii: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    refine_starts: int = 3
    refine_iters: int = 12

    def __post_init__(self):
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        object.__setattr__(self, "radius_schedule", tuple(float(r) for r in self.radius_schedule))
        if not self.t_grid or any(t < 1 for t in self.t_grid):
            raise ValueError("t_grid entries must be >= 1")
        rs = self.radius_schedule
        if not rs or any(b <= a for a, b in zip(rs, rs[1:])) or rs[0] <= 0:
            raise ValueError("radius_schedule must be positive and strictly increasing")
        if self.n_directions < 1 or self.ball_samples < 1 or self.descent_iters < 0:
            raise ValueError("sample counts must be positive")

    @classmethod
    def from_mapping(cls, cfg: dict) -> "SigmaParams":
        keys = {"t_grid": "t_grid", "radii": "radius_schedule", "radius_schedule": "radius_schedule",
                "directions": "n_directions", "n_directions": "n_directions",
                "samples": "ball_samples", "ball_samples": "ball_samples",
                "descent_iters": "descent_iters", "seed": "seed"}
        kwargs = {}
        for k, v in cfg.items():
            if k not in keys:
                raise ValueError(f"unknown sigma parameter {k!r}")
            kwargs[keys[k]] = tuple(v) if isinstance(v, list) else v
        return cls(**kwargs)

    def to_json(self) -> dict:
        return {
            "t_grid": list(self.t_grid), "radii": list(self.radius_schedule),
            "directions": self.n_directions, "samples": self.ball_samples,
            "descent_iters": self.descent_iters, "seed": self.seed,
        }


@dataclass
class SigmaEstimate:
    value: float
    per_t: dict[float, float]
    per_radius: dict[float, dict[float, float]]
    converged: bool
    argmin: dict[float, list[float]] = field(default_factory=dict)
    exact: bool = False

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "per_t": {repr(t): v for t, v in self.per_t.items()},
            "per_radius": {repr(t): {repr(r): v for r, v in d.items()} for t, d in self.per_radius.items()},
            "converged": self.converged,
            "argmin": {repr(t): x for t, x in self.argmin.items()},
            "exact": self.exact,
        }


# -- ball suprema ---------------------------------------------------------

@lru_cache(maxsize=64)
def _ball_design(k: int, n_samples: int, seed: int) -> np.ndarray:
    """Deterministic points of the closed unit ball in R^k: center, axis poles,
    a scrambled-Sobol interior cloud and an equally large boundary cloud."""
    fixed = [np.zeros(k)]
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        fixed += [e, -e]
    n_rand = max(2, n_samples - len(fixed))
    sob = _sobol(k + 1, n_rand, seed)
    g = _normal_ppf(np.clip(sob[:, :k], 1e-12, 1 - 1e-12))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    half = n_rand // 2
    radius = np.ones(n_rand)
    radius[:half] = sob[:half, k] ** (1.0 / k)
    pts = np.vstack([np.array(fixed), u * radius[:, None]])
    pts.setflags(write=False)
    return pts


def _normal_ppf(p):
    return ndtri(p)


def _sobol(d: int, count: int, seed: int) -> np.ndarray:
    with warnings.catch_warnings():
        # balance warnings for non power-of-two counts are irrelevant here
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(d=d, scramble=True, seed=seed).random(count)


def _sup_abs(num, centers: np.ndarray, basis: np.ndarray, t, design: np.ndarray, iters: int) -> np.ndarray:
    """sup |P(c + x)| over x in span(basis), |x| <= t, for each row c of ``centers``.

    ``t`` is a scalar or one radius per center.
    """
    centers = np.atleast_2d(centers)
    B = centers.shape[0]
    t = np.broadcast_to(np.asarray(t, dtype=float), (B,))
    k = basis.shape[0]
    if k == 0 or not np.any(t > 0):
        return np.abs(num(centers))
    s = min(N_ASCENT_STARTS, design.shape[0])
    DB = design @ basis                              # (S, n)
    best = np.empty(B)
    y = np.empty((B, s, k))
    f = np.empty((B, s))
    step_b = max(1, _SAMPLE_BLOCK // design.shape[0])
    for lo in range(0, B, step_b):
        sl = slice(lo, lo + step_b)
        tb = t[sl, None, None]
        vals = np.abs(num(centers[sl, None, :] + tb * DB[None]))    # (b, S)
        best[sl] = vals.max(axis=1)
        idx = np.argpartition(-vals, s - 1, axis=1)[:, :s]
        y[sl] = tb * design[idx]
        f[sl] = np.take_along_axis(vals, idx, axis=1) ** 2
    if iters <= 0:
        return best
    # flatten the (center, start) pairs and iterate only on those still moving
    C = np.repeat(centers, s, axis=0)
    y = y.reshape(B * s, k)
    f = f.reshape(B * s)
    tt = np.repeat(t, s)
    step = 0.25 * tt
    p0, gx0 = num.value_and_grad(C + y @ basis)
    # gradient of |P|^2 in V-coordinates, kept for the current iterate
    G = 2.0 * np.real(np.conj(p0)[:, None] * gx0) @ basis.T
    act = np.flatnonzero(step > 0)
    for _ in range(iters):
        if not len(act):
            break
        ya, ta, sa, gy = y[act], tt[act], step[act], G[act]
        gn = np.linalg.norm(gy, axis=1, keepdims=True)
        direction = np.divide(gy, gn, out=np.zeros_like(gy), where=gn > 0)
        y_new = ya + sa[:, None] * direction
        r = np.linalg.norm(y_new, axis=1)
        y_new *= np.minimum(1.0, ta / np.maximum(r, 1e-300))[:, None]
        p, gx = num.value_and_grad(C[act] + y_new @ basis)
        f_new = np.abs(p) ** 2
        better = f_new > f[act]
        up = act[better]
        y[up] = y_new[better]
        f[up] = f_new[better]
        G[up] = 2.0 * np.real(np.conj(p[better])[:, None] * gx[better]) @ basis.T
        step[act] = np.where(better, np.minimum(sa * 1.5, ta), sa * 0.5)
        act = act[step[act] > 1e-7 * ta]
    f = f.reshape(B, s)
    return np.maximum(best, np.sqrt(f.max(axis=1)))


def p_tilde_sub(
    P: Polynomial, V: Subspace, xi, t: float,
    ball_samples: int = 500, descent_iters: int = 50, seed: int = DEFAULT_SEED,
) -> float:
    """Estimate sup { |P(x + xi)| : x in V, |x| <= t }."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    xi = np.asarray(xi, dtype=float)
    if V.ambient != P.nvars or xi.shape != (P.nvars,):
        raise ValueError("dimension mismatch between P, V and xi")
    num = P.numeric()
    if V.is_trivial or t == 0:
        return float(abs(num(xi[None])[0]))
    design = _ball_design(V.dim, ball_samples, seed)
    return float(_sup_abs(num, xi[None], V.basis, t, design, descent_iters)[0])


class _RatioField:
    """Batched evaluation of P~_V(xi, t) / P~(xi, t) for fixed P and V."""

    def __init__(self, P: Polynomial, V: Subspace, params: SigmaParams):
        self.num = P.numeric()
        self.V = V
        self.full = np.eye(P.nvars)
        self.iters = params.descent_iters
        self.d_sub = _ball_design(V.dim, params.ball_samples, params.seed) if V.dim else None
        self.d_full = _ball_design(P.nvars, params.ball_samples, params.seed)

    def __call__(self, xis: np.ndarray, ts) -> np.ndarray:
        xis = np.atleast_2d(xis)
        if self.V.is_trivial:
            top = np.abs(self.num(xis))
        else:
            top = _sup_abs(self.num, xis, self.V.basis, ts, self.d_sub, self.iters)
        bottom = _sup_abs(self.num, xis, self.full, ts, self.d_full, self.iters)
        bottom = np.maximum(bottom, top)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(bottom > 0, top / bottom, 1.0)
        return np.clip(r, 0.0, 1.0)


@lru_cache(maxsize=32)
def _directions(n: int, count: int, seed: int) -> np.ndarray:
    """Quasi-uniform unit directions plus the signed coordinate axes."""
    eye = np.eye(n)
    axes = np.vstack([eye, -eye])
    if n == 1:
        return axes
    sob = _sobol(n, max(count, 2), seed)
    g = _normal_ppf(np.clip(sob, 1e-12, 1 - 1e-12))
    d = g / np.linalg.norm(g, axis=1, keepdims=True)
    out = np.vstack([axes, d])
    out.setflags(write=False)
    return out


def _tangent_moves(D: np.ndarray) -> np.ndarray:
    """For unit rows d, an orthonormal frame of the tangent space at d plus diagonals.

    Returns (m, M, n)."""
    m, n = D.shape
    q, _ = np.linalg.qr(np.concatenate([D[:, :, None], np.broadcast_to(np.eye(n), (m, n, n))], axis=2))
    T = np.swapaxes(q[:, :, 1:n], 1, 2)               # (m, n-1, n)
    moves = [T, -T]
    if n > 2:
        moves += [T[:, :1] + T[:, 1:], T[:, :1] - T[:, 1:]]
    return np.concatenate(moves, axis=1)


@lru_cache(maxsize=32)
def _axis_offsets(n: int, seed: int, per_axis: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Signed axes a and unit vectors u orthogonal to them, as paired rows."""
    base = _directions(n, per_axis, seed ^ 0x5A5A)
    A, U = [], []
    for j in range(n):
        for sgn in (1.0, -1.0):
            a = np.zeros(n)
            a[j] = sgn
            u = base.copy()
            u[:, j] = 0.0
            norms = np.linalg.norm(u, axis=1)
            u = u[norms > 1e-9] / norms[norms > 1e-9, None]
            u = np.unique(np.round(u, 12), axis=0)
            A.append(np.broadcast_to(a, u.shape))
            U.append(u)
    return np.vstack(A), np.vstack(U)


def _cell_directions(dirs: np.ndarray, n: int, t: float, R: float, seed: int) -> np.ndarray:
    # xi = R*a + r*u with a bounded offset r ~ t: sequences whose direction tends
    # to an axis while the transverse part stays bounded are invisible to a pure
    # direction sweep at large R.
    if n == 1 or R == 0:
        return dirs
    A, U = _axis_offsets(n, seed)
    extra = [R * A + r * U for r in (0.5 * t, t, 2.0 * t)]
    E = np.vstack(extra)
    E /= np.linalg.norm(E, axis=1, keepdims=True)
    return np.vstack([dirs, E])


def _refine(field: _RatioField, Rs: np.ndarray, ts: np.ndarray, D: np.ndarray, v: np.ndarray,
            s: np.ndarray, iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Shrinking pattern search on the spheres |xi| = R, all searches in one batch.

    Row i searches around direction D[i] on radius Rs[i] with ball radius ts[i]
    and initial angular step s[i].  Returns the final values and directions.
    """
    D, v, s = D.astype(float).copy(), v.astype(float).copy(), s.astype(float).copy()
    if D.shape[1] == 1:
        return v, D
    for _ in range(iters):
        idx = np.flatnonzero(s >= 1e-9)
        if not len(idx):
            break
        moves = _tangent_moves(D[idx])                  # (a, M, n)
        cand = D[idx, None, :] + s[idx, None, None] * moves
        cand /= np.linalg.norm(cand, axis=2, keepdims=True)
        a, M, n = cand.shape
        xis = (Rs[idx, None, None] * cand).reshape(a * M, n)
        vals = field(xis, np.repeat(ts[idx], M)).reshape(a, M)
        j = np.argmin(vals, axis=1)
        vbest = vals[np.arange(a), j]
        improved = vbest < v[idx]
        D[idx[improved]] = cand[np.flatnonzero(improved), j[improved]]
        v[idx[improved]] = vbest[improved]
        s[idx] = np.where(improved, s[idx] * 1.5, s[idx] * 0.4)
    return v, D


def _scan(P, V, params: SigmaParams, radii) -> tuple[dict, dict]:
    """Ratio minima for every (t, R) cell: a direction sweep, then batched refinement."""
    field = _RatioField(P, V, params)
    n = P.nvars
    dirs = _directions(n, params.n_directions, params.seed)
    spacing = math.sqrt(4 * math.pi / len(dirs)) if n > 1 else 1.0
    cells = [(t, R) for t in params.t_grid for R in radii]
    xis, ts = [], []
    cell_dirs = []
    for t, R in cells:
        cd = _cell_directions(dirs, n, t, R, params.seed)
        cell_dirs.append(cd)
        pts = np.zeros((1, n)) if R == 0 else R * cd
        xis.append(pts)
        ts.append(np.full(len(pts), t))
    sizes = [len(x) for x in xis]
    vals = field(np.vstack(xis), np.concatenate(ts))
    per_radius: dict = {t: {} for t in params.t_grid}
    argmin: dict = {t: {} for t in params.t_grid}
    rows_D, rows_v, rows_s, rows_R, rows_t, owner = [], [], [], [], [], []
    off = 0
    for c, ((t, R), m) in enumerate(zip(cells, sizes)):
        cv = vals[off:off + m]
        off += m
        top = np.argsort(cv, kind="stable")[: min(params.refine_starts, m)]
        per_radius[t][R] = float(cv[top[0]])
        cd = cell_dirs[c]
        argmin[t][R] = (0.0 * cd[0] if R == 0 else R * cd[top[0]]).tolist()
        if R == 0 or n == 1:
            continue
        for i in top:
            for scale in (spacing, min(spacing, 4.0 * t / R)):
                rows_D.append(cd[i]); rows_v.append(cv[i]); rows_s.append(scale)
                rows_R.append(R); rows_t.append(t); owner.append(c)
    if rows_D:
        v, D = _refine(field, np.array(rows_R), np.array(rows_t), np.array(rows_D),
                       np.array(rows_v), np.array(rows_s), params.refine_iters)
        for c, vi, di, R in zip(owner, v, D, rows_R):
            t = cells[c][0]
            if vi < per_radius[t][R]:
                per_radius[t][R] = float(vi)
                argmin[t][R] = (R * di).tolist()
    return per_radius, argmin


def _check(P: Polynomial, V: Subspace):
    if P.is_zero:
        raise ValueError("sigma is undefined for the zero polynomial")
    if V.ambient != P.nvars:
        raise ValueError(f"dimension mismatch: P has {P.nvars} variables, V lives in R^{V.ambient}")


def _full_space_estimate(params: SigmaParams, radii) -> SigmaEstimate:
    per_r = {t: {R: 1.0 for R in radii} for t in params.t_grid}
    return SigmaEstimate(1.0, {t: 1.0 for t in params.t_grid}, per_r, True, exact=True)


def _converged(trace: dict[float, dict[float, float]], schedule) -> bool:
    if len(schedule) < 2:
        return False
    a_r, b_r = schedule[-2], schedule[-1]
    for d in trace.values():
        a, b = d[a_r], d[b_r]
        hi = max(a, b)
        if hi > 1e-6 and abs(a - b) > 0.1 * hi:
            return False
    return True


def sigma_estimate(P: Polynomial, V: Subspace, params: SigmaParams | None = None) -> SigmaEstimate:
    """Heuristic estimate of sigma_P(V) with a per-t, per-radius trace."""
    params = params or SigmaParams()
    _check(P, V)
    radii = params.radius_schedule
    if V.is_full:
        return _full_space_estimate(params, radii)
    per_radius, args = _scan(P, V, params, radii)
    per_t = {t: per_radius[t][radii[-1]] for t in params.t_grid}
    argmin = {t: args[t][radii[-1]] for t in params.t_grid}
    value = min(per_t.values())
    return SigmaEstimate(value, per_t, per_radius, _converged(per_radius, radii), argmin)


def sigma0_estimate(P: Polynomial, V: Subspace, params: SigmaParams | None = None) -> SigmaEstimate:
    """Heuristic estimate of sigma0_P(V): infimum over all xi, including xi = 0."""
    params = params or SigmaParams()
    _check(P, V)
    radii = tuple(sorted({0.0, *params.small_radii, *params.radius_schedule}))
    if V.is_full:
        return _full_space_estimate(params, radii)
    per_radius, args = _scan(P, V, params, radii)
    per_t, argmin = {}, {}
    for t, per_r in per_radius.items():
        R_best = min(per_r, key=lambda r: per_r[r])
        per_t[t] = per_r[R_best]
        argmin[t] = args[t][R_best]
    value = min(per_t.values())
    return SigmaEstimate(value, per_t, per_radius, True, argmin)


# -- exact rule table -----------------------------------------------------

@dataclass
class SigmaZeroSet:
    """The exact set {x : sigma_P(x) = 0} as a subspace, with the rule that produced it."""

    subspace: Subspace
    rule: str                       # "elliptic-along" | "augmented-semi-elliptic"
    acting_subspace: Subspace       # W with {sigma_P = 0} = W^perp
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "subspace": self.subspace.to_json(),
            "rule": self.rule,
            "acting_subspace": self.acting_subspace.to_json(),
            "detail": self.detail,
        }


def sigma_zero_subspace_exact(P: Polynomial) -> SigmaZeroSet | None:
    """Closed-form {x : sigma_P(x) = 0} for the settled operator classes, else None.

    (a) P acts along W and is elliptic on W: the set is W^perp.
    (b) P = Q+ with Q semi-elliptic and principal zero set Z: the set is Z x R.
    """
    if P.is_zero or P.degree == 0:
        return None
    W = dependence_subspace(P)
    try:
        ell = is_elliptic_on(P, W)
    except (NotActingAlong, ValueError):
        ell = None
    if ell is not None and ell.elliptic:
        return SigmaZeroSet(W.complement(), "elliptic-along", W, {"C_lower": ell.c_lower})
    n = P.nvars
    if n >= 2 and P.degree_in(n - 1) == 0:
        Q = Polynomial(n - 1, {a[:-1]: c for a, c in P.terms.items()})
        if Q.degree > 0:
            se = semi_elliptic_weights(Q)
            if se.accepted:
                zs = zero_set_structure(principal_part(Q))
                if zs.kind in ("subspace", "trivial"):
                    Z = zs.subspace if zs.subspace is not None else Subspace.trivial(n - 1)
                    S = Z.times_line()
                    return SigmaZeroSet(S, "augmented-semi-elliptic", S.complement(),
                                        {"weights": list(se.weights), "principal_zero_set": Z.to_json()})
    return None
