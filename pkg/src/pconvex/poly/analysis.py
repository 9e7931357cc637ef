"""Symbolic and numeric analysis of polynomial symbols.

Exact operations (principal part, augmentation, dependence subspace, vanishing
on rational subspaces) use Gaussian-rational arithmetic.  Ellipticity,
semi-ellipticity and zero-set structure minimize |Q| over a sphere and carry
a tolerance band: minima inside (eps, 10 eps) are reported as undecided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .polynomial import GaussQ, Polynomial
from .sphere import default_delta, minimize_abs_on_sphere
from .subspace import Subspace, rref

EPS_REL = 1e-7          # eps_ell = EPS_REL * (max coefficient modulus)
BAND = 10.0             # minima in (eps, BAND*eps) are undecided
VANISH_TOL = 1e-12      # float vanishing test, relative to the coefficient scale


class NotActingAlong(ValueError):
    """The polynomial depends on directions outside the given subspace."""


def principal_part(P: Polynomial) -> Polynomial:
    if P.is_zero:
        raise ValueError("the zero polynomial has no principal part")
    m = P.degree
    return Polynomial(P.nvars, {a: c for a, c in P.terms.items() if sum(a) == m})


def augment(P: Polynomial) -> Polynomial:
    """P+(x_1, ..., x_{n+1}) = P(x_1, ..., x_n)."""
    return Polynomial(P.nvars + 1, {a + (0,): c for a, c in P.terms.items()})


def compose_linear(P: Polynomial, rows: Sequence[Sequence]) -> Polynomial:
    """Q(y) = P(sum_j y_j * rows[j]); exact when P and ``rows`` are exact."""
    k = len(rows)
    n = P.nvars
    if any(len(r) != n for r in rows):
        raise ValueError("substitution vectors must have length nvars")
    linear = []
    for i in range(n):
        terms = {}
        for j in range(k):
            c = rows[j][i]
            if c:
                alpha = [0] * k
                alpha[j] = 1
                terms[tuple(alpha)] = c
        linear.append(Polynomial(k, terms))
    powers: dict[tuple[int, int], Polynomial] = {}

    def power(i, e):
        if (i, e) not in powers:
            powers[(i, e)] = linear[i] ** e
        return powers[(i, e)]

    result = Polynomial.zero(k)
    for alpha, c in P.items():
        term = Polynomial.constant(c, k)
        for i, e in enumerate(alpha):
            if e:
                term = term * power(i, e)
        result = result + term
    return result


def _clean(Q: Polynomial, scale: float, rel: float = 1e-14) -> Polynomial:
    if Q.is_exact:
        return Q
    return Polynomial(Q.nvars, {a: c for a, c in Q.terms.items() if abs(c) > rel * scale})


def _exact_rows(V: Subspace):
    """Exact substitution rows for V when its orthonormal basis is a signed unit basis."""
    b = V.basis
    if np.all(np.isin(b, (-1.0, 0.0, 1.0))):
        return [[Fraction(int(x)) for x in row] for row in b]
    return None


def dependence_subspace(P: Polynomial) -> Subspace:
    """Smallest W with P(x + xi) = P(x) for all xi orthogonal to W.

    W is the span of the coefficient columns of the gradient of P: v is
    orthogonal to W exactly when the directional derivative D_v P vanishes.
    """
    n = P.nvars
    derivs = [P.derivative(j) for j in range(n)]
    monomials = sorted({a for d in derivs for a in d.terms})
    if not monomials:
        return Subspace.trivial(n)
    if P.is_exact:
        columns = []
        for a in monomials:
            coeffs = [GaussQ.coerce(d.coefficient(a)) for d in derivs]
            columns.append([c.re for c in coeffs])
            columns.append([c.im for c in coeffs])
        reduced, _ = rref(columns)
        return Subspace.from_rational(reduced, n)
    cols = []
    for a in monomials:
        coeffs = np.array([complex(d.coefficient(a)) for d in derivs])
        cols.extend([coeffs.real, coeffs.imag])
    return Subspace.span(cols, n)


def vanishes_on_subspace(P: Polynomial, V: Subspace) -> bool:
    """True iff P restricted to V is the zero polynomial."""
    if V.ambient != P.nvars:
        raise ValueError(f"dimension mismatch: P has {P.nvars} variables, V lives in R^{V.ambient}")
    if V.is_trivial:
        return abs(P.coefficient((0,) * P.nvars)) == 0
    if P.is_exact and V.rational is not None:
        return compose_linear(P, V.rational).is_zero
    Q = compose_linear(P, V.basis.tolist())
    return all(abs(c) <= VANISH_TOL * P.scale() for c in Q.terms.values())


def restrict_to_subspace(P: Polynomial, W: Subspace) -> Polynomial:
    """Polynomial in dim W variables y with value P(sum_j y_j b_j), b_j the basis of W."""
    if W.ambient != P.nvars:
        raise ValueError(f"dimension mismatch: P has {P.nvars} variables, W lives in R^{W.ambient}")
    if W.is_trivial:
        raise ValueError("cannot restrict to the trivial subspace")
    rows = _exact_rows(W) if P.is_exact else None
    if rows is not None:
        return compose_linear(P, rows)
    return _clean(compose_linear(P, W.basis.tolist()), P.scale())


@dataclass
class EllipticityReport:
    elliptic: bool | None        # None inside the tolerance band
    c_lower: float               # min |P_m| over the unit sphere of W
    witness: np.ndarray | None   # unit vector in R^n with |P_m| < eps
    eps: float

    def to_json(self) -> dict:
        return {
            "elliptic": self.elliptic,
            "C_lower": self.c_lower,
            "witness": None if self.witness is None else self.witness.tolist(),
            "eps": self.eps,
        }


def _band_decision(value: float, eps: float) -> bool | None:
    if value > BAND * eps:
        return True
    if value < eps:
        return False
    return None


def is_elliptic_on(P: Polynomial, W: Subspace, delta: float | None = None) -> EllipticityReport:
    """Decide whether P (acting along W) is elliptic as a polynomial on W."""
    if W.ambient != P.nvars:
        raise ValueError("dimension mismatch")
    if P.is_zero:
        raise ValueError("the zero polynomial is not elliptic on any subspace")
    D = dependence_subspace(P)
    if not D.is_subspace_of(W):
        raise NotActingAlong("P does not act along the given subspace")
    if W.is_trivial:
        raise ValueError("ellipticity on the trivial subspace is undefined")
    eps = EPS_REL * P.scale()
    Q = restrict_to_subspace(principal_part(P), W)
    num = Q.numeric()
    k = W.dim
    found = minimize_abs_on_sphere(
        num, k, delta or default_delta(k), hemisphere=True, stop_below=eps
    )
    decision = _band_decision(found.value, eps)
    witness = None
    if decision is False:
        w = found.direction @ W.basis
        witness = w / np.linalg.norm(w)
    return EllipticityReport(decision, found.value, witness, eps)


@dataclass
class SemiEllipticity:
    status: str                          # "accepted" | "refused" | "unknown"
    weights: tuple[int, ...] | None      # m when accepted
    candidate: tuple[int, ...]           # the weight vector that was tested
    weighted_principal: Polynomial | None
    witness: np.ndarray | None = None    # point on the weighted sphere with |Q_w| < eps
    min_value: float | None = None
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "weights": None if self.weights is None else list(self.weights),
            "candidate": list(self.candidate),
            "weighted_principal": None if self.weighted_principal is None else str(self.weighted_principal),
            "witness": None if self.witness is None else self.witness.tolist(),
            "min_value": self.min_value,
            "reason": self.reason,
        }


def weighted_order(alpha, weights) -> Fraction:
    """|alpha : m| = sum_j alpha_j / m_j."""
    return sum((Fraction(a, m) for a, m in zip(alpha, weights)), Fraction(0))


def weighted_sphere_map(weights: Sequence[int]):
    """Map unit vectors onto {rho = 1}, rho(xi) = sum_j |xi_j|^(2 m_j / mbar).

    rho is homogeneous of degree 2/mbar under xi_j -> s^(1/m_j) xi_j, the
    dilation under which every term with |alpha : m| = 1 scales like s.
    """
    m = np.asarray(weights, dtype=float)
    mbar = float(reduce(math.lcm, [int(w) for w in weights]))
    expo = 2.0 * m / mbar

    def mapping(U: np.ndarray) -> np.ndarray:
        A = np.abs(U)
        rho = np.zeros(U.shape[:-1])
        for j, e in enumerate(expo):
            col = A[..., j]
            rho += col if e == 1.0 else col * col if e == 2.0 else col**e
        log_s = (-mbar / 2.0) * np.log(rho)
        out = np.empty_like(U)
        for j, w in enumerate(m):
            out[..., j] = U[..., j] * np.exp(log_s / w)
        return out

    return mapping


def semi_elliptic_weights(P: Polynomial, delta: float | None = None) -> SemiEllipticity:
    """Test the canonical weights m_j = deg_{x_j} P (1 for absent variables)."""
    if P.degree == 0:
        raise ValueError("constant polynomials have no semi-elliptic structure")
    n = P.nvars
    cand = tuple(max(1, P.degree_in(j)) for j in range(n))
    orders = {a: weighted_order(a, cand) for a in P.terms}
    over = [a for a, o in orders.items() if o > 1]
    if over:
        return SemiEllipticity(
            "refused", None, cand, None,
            reason=f"term with exponents {over[0]} has weighted order {orders[over[0]]} > 1",
        )
    Qw = Polynomial(n, {a: c for a, c in P.terms.items() if orders[a] == 1})
    eps = EPS_REL * P.scale()
    found = minimize_abs_on_sphere(
        Qw.numeric(), n, delta or default_delta(n), mapping=weighted_sphere_map(cand), stop_below=eps
    )
    decision = _band_decision(found.value, eps)
    if decision:
        return SemiEllipticity("accepted", cand, cand, Qw, min_value=found.value)
    if decision is False:
        return SemiEllipticity(
            "refused", None, cand, Qw, witness=found.point, min_value=found.value,
            reason="weighted principal part vanishes off the origin",
        )
    return SemiEllipticity(
        "unknown", None, cand, Qw, min_value=found.value,
        reason="weighted sphere minimum inside the tolerance band",
    )


@dataclass
class ZeroSetReport:
    kind: str                                   # "subspace" | "not_subspace" | "trivial" | "unknown"
    subspace: Subspace | None = None
    witness: dict | None = None
    min_value: float | None = None
    reason: str = ""

    @property
    def dim(self) -> int | None:
        if self.kind == "trivial":
            return 0
        return None if self.subspace is None else self.subspace.dim

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "subspace": None if self.subspace is None else self.subspace.to_json(),
            "witness": self.witness,
            "min_value": self.min_value,
            "reason": self.reason,
        }


def _snap_rational(basis: np.ndarray, max_den: int = 64) -> list[list[Fraction]] | None:
    """Rational spanning rows for span(basis) if its float RREF looks rational."""
    k, n = basis.shape
    a = basis.copy()
    # float RREF
    r = 0
    for c in range(n):
        if r == k:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) < 1e-8:
            continue
        a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for i in range(k):
            if i != r:
                a[i] -= a[i, c] * a[r]
        r += 1
    if r < k:
        return None
    rows = [[Fraction(float(x)).limit_denominator(max_den) for x in row] for row in a]
    if np.max(np.abs(np.array([[float(x) for x in row] for row in rows]) - a)) > 1e-6:
        return None
    return rows


def zero_set_structure(Q: Polynomial, delta: float | None = None) -> ZeroSetReport:
    """Semi-decide whether the real zero set of a homogeneous Q is a linear subspace."""
    if not Q.is_homogeneous():
        raise ValueError("zero_set_structure expects a homogeneous polynomial")
    n = Q.nvars
    if Q.is_zero:
        return ZeroSetReport("subspace", Subspace.full(n), min_value=0.0)
    if Q.degree == 0:
        return ZeroSetReport("trivial", Subspace.trivial(n), min_value=abs(Q.coefficient((0,) * n)))
    eps = EPS_REL * Q.scale()
    delta = delta or default_delta(n)
    num = Q.numeric()
    found = minimize_abs_on_sphere(num, n, delta, hemisphere=True)
    decision = _band_decision(found.value, eps)
    if decision:
        return ZeroSetReport("trivial", Subspace.trivial(n), min_value=found.value)
    if decision is None:
        return ZeroSetReport("unknown", min_value=found.value, reason="sphere minimum inside the tolerance band")

    zeros = _collect_zeros(num, n, delta, eps)
    if not zeros:
        zeros = [found.direction]
    Z = np.array(zeros)
    _, s, vt = np.linalg.svd(Z, full_matrices=False)
    rank = int(np.sum(s > 1e-3 * s[0]))
    cand_basis = vt[:rank]
    rows = _snap_rational(cand_basis)
    cand = Subspace.from_rational(rows, n) if rows is not None else Subspace.span(cand_basis, n)

    if vanishes_on_subspace(Q, cand):
        if cand.is_full:
            return ZeroSetReport("subspace", cand, min_value=found.value)
        comp = cand.complement()
        try:
            ell = is_elliptic_on(Q, comp, delta)
        except NotActingAlong:
            return ZeroSetReport(
                "unknown", min_value=found.value,
                reason="Q vanishes on the candidate subspace but does not act along its complement",
            )
        if ell.elliptic:
            return ZeroSetReport("subspace", cand, min_value=found.value)
        return ZeroSetReport("unknown", min_value=found.value, reason="complement restriction not elliptic")

    witness = _span_witness(Q, zeros, eps)
    if witness is not None:
        return ZeroSetReport("not_subspace", witness=witness, min_value=found.value)
    return ZeroSetReport("unknown", min_value=found.value, reason="no verifiable non-subspace witness")


def _collect_zeros(num, n: int, delta: float, eps: float, max_seeds: int = 24) -> list[np.ndarray]:
    from .sphere import _polish, sphere_chunks

    # |Q| is Lipschitz on the sphere with constant <= deg * sum|c|, so every zero
    # has a grid neighbour below this threshold
    lip = float(num.exps.sum(axis=1).max() * np.abs(num.coefs).sum())
    tau = lip * delta
    cand_pts, cand_vals = [], []
    for chunk in sphere_chunks(n, delta, hemisphere=True):
        v = np.abs(num(chunk))
        mask = v <= tau
        if mask.any():
            cand_pts.append(chunk[mask])
            cand_vals.append(v[mask])
    if not cand_pts:
        return []
    pts = np.vstack(cand_pts)
    vals = np.concatenate(cand_vals)
    order = np.argsort(vals, kind="stable")
    seeds: list[np.ndarray] = []
    for idx in order:
        p = pts[idx]
        if all(min(np.linalg.norm(p - s), np.linalg.norm(p + s)) > 0.2 for s in seeds):
            seeds.append(p)
            if len(seeds) >= max_seeds:
                break
    zeros = []
    for s in seeds:
        val, u = _polish(num, lambda x: x, s)
        if val < eps:
            zeros.append(u / np.linalg.norm(u))
    return zeros


def _span_witness(Q: Polynomial, zeros: list[np.ndarray], eps: float) -> dict | None:
    best = None
    for i in range(len(zeros)):
        for j in range(i + 1, len(zeros)):
            for sign in (1.0, -1.0):
                v = zeros[i] + sign * zeros[j]
                nv = np.linalg.norm(v)
                if nv < 0.5:
                    continue
                d = v / nv
                val = abs(Q.evaluate(d))
                if val > BAND * eps and (best is None or val > best["value"]):
                    best = {
                        "zeros": [zeros[i].tolist(), zeros[j].tolist()],
                        "combination": d.tolist(),
                        "value": val,
                    }
    return best
