"""Linear subspaces of R^n with an orthonormal float basis.

When a subspace is built from rational spanning vectors, the exact spanning set
is kept alongside the float basis (``Subspace.rational``) so that algebraic
tests such as vanishing of a polynomial on the subspace can run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

ORTHO_TOL = 1e-12
RANK_TOL = 1e-10


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q. Returns (nonzero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Exact basis of {v : rows @ v = 0}."""
    reduced, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def _is_rational_vector(v) -> bool:
    return all(isinstance(x, Rational) and not isinstance(x, bool) for x in v)


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient: int
    basis: np.ndarray
    rational: tuple[tuple[Fraction, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(-1, self.ambient)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        if self.ambient < 1:
            raise ValueError("ambient dimension must be positive")
        gram = b @ b.T
        if b.shape[0] > self.ambient or not np.allclose(gram, np.eye(b.shape[0]), atol=ORTHO_TOL * 10):
            raise ValueError("basis is not orthonormal")

    # -- constructors -------------------------------------------------
    @classmethod
    def span(cls, vectors, ambient: int | None = None) -> "Subspace":
        vectors = [list(v) for v in vectors]
        if ambient is None:
            if not vectors:
                raise ValueError("ambient dimension required for an empty spanning set")
            ambient = len(vectors[0])
        if any(len(v) != ambient for v in vectors):
            raise ValueError("spanning vectors must have the ambient length")
        if vectors and all(_is_rational_vector(v) for v in vectors):
            reduced, _ = rref([[Fraction(x) for x in v] for v in vectors])
            return cls.from_rational(reduced, ambient)
        if not vectors:
            return cls.trivial(ambient)
        a = np.asarray(vectors, dtype=float)
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        rank = int(np.sum(s > RANK_TOL * max(1.0, s.max(initial=0.0))))
        return cls(ambient, _canonical(vt[:rank]))

    @classmethod
    def from_rational(cls, rows, ambient: int) -> "Subspace":
        rows = [tuple(Fraction(x) for x in r) for r in rows if any(x != 0 for x in r)]
        if not rows:
            return cls.trivial(ambient)
        a = np.array([[float(x) for x in r] for r in rows])
        q, _ = np.linalg.qr(a.T)
        return cls(ambient, _canonical(q.T[: len(rows)]), tuple(rows))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls.from_rational([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], n)

    @classmethod
    def trivial(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((0, n)), ())

    @classmethod
    def coordinates(cls, n: int, indices: Sequence[int]) -> "Subspace":
        """Span of the standard basis vectors e_{j+1}, j in ``indices`` (0-based)."""
        rows = [[Fraction(int(i == j)) for i in range(n)] for j in sorted(set(indices))]
        return cls.from_rational(rows, n)

    # -- queries ------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x @ self.basis.T) @ self.basis

    def coords(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.basis.T

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.linalg.norm(x - self.project(x)) <= tol * max(1.0, np.linalg.norm(x)))

    def is_subspace_of(self, other: "Subspace", tol: float = 1e-9) -> bool:
        self._check(other)
        return all(other.contains(b, tol) for b in self.basis)

    def equals(self, other: "Subspace", tol: float = 1e-9) -> bool:
        return self.dim == other.dim and self.is_subspace_of(other, tol)

    def is_orthogonal_to(self, other: "Subspace", tol: float = 1e-9) -> bool:
        self._check(other)
        if self.is_trivial or other.is_trivial:
            return True
        return float(np.abs(self.basis @ other.basis.T).max()) <= tol

    def complement(self) -> "Subspace":
        if self.rational is not None:
            if not self.rational:
                return Subspace.full(self.ambient)
            return Subspace.from_rational(nullspace(self.rational, self.ambient), self.ambient)
        if self.is_trivial:
            return Subspace.full(self.ambient)
        u, s, vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(self.ambient, _canonical(vt[self.dim:]))

    def times_line(self) -> "Subspace":
        """V x R inside R^{n+1}."""
        return self._extend(with_line=True)

    def times_zero(self) -> "Subspace":
        """V x {0} inside R^{n+1}."""
        return self._extend(with_line=False)

    def _extend(self, with_line: bool) -> "Subspace":
        n = self.ambient
        if self.rational is not None:
            rows = [tuple(r) + (Fraction(0),) for r in self.rational]
            if with_line:
                rows.append(tuple([Fraction(0)] * n + [Fraction(1)]))
            return Subspace.from_rational(rows, n + 1)
        b = np.hstack([self.basis, np.zeros((self.dim, 1))])
        if with_line:
            e = np.zeros((1, n + 1))
            e[0, n] = 1.0
            b = np.vstack([b, e])
        return Subspace(n + 1, b)

    def _check(self, other: "Subspace"):
        if other.ambient != self.ambient:
            raise ValueError(f"ambient dimension mismatch: {self.ambient} vs {other.ambient}")

    def to_json(self) -> dict:
        out = {"ambient": self.ambient, "dim": self.dim, "basis": self.basis.tolist()}
        if self.rational is not None:
            out["rational_span"] = [[str(x) for x in r] for r in self.rational]
        return out

    def __repr__(self):
        if self.rational is not None:
            rows = ", ".join("(" + ",".join(str(x) for x in r) + ")" for r in self.rational)
            return f"Subspace(n={self.ambient}, span{{{rows}}})"
        return f"Subspace(n={self.ambient}, dim={self.dim})"


def _canonical(b: np.ndarray) -> np.ndarray:
    """Fix signs so that the first significant entry of each row is positive."""
    b = np.array(b, dtype=float)
    for row in b:
        idx = np.flatnonzero(np.abs(row) > 1e-12)
        if idx.size and row[idx[0]] < 0:
            row *= -1
    return b


def parse_subspace(spec: str, ambient: int) -> Subspace:
    """Parse ``"e1,e3"``, ``"1,1,0;0,0,1"``, ``"full"`` or ``"0"`` into a subspace."""
    spec = spec.strip()
    if spec in ("full", "R^n", "all"):
        return Subspace.full(ambient)
    if spec in ("0", "trivial", "{0}", ""):
        return Subspace.trivial(ambient)
    if all(tok.strip().startswith("e") for tok in spec.split(",")):
        idx = []
        for tok in spec.split(","):
            j = int(tok.strip()[1:])
            if not 1 <= j <= ambient:
                raise ValueError(f"basis vector {tok.strip()} outside R^{ambient}")
            idx.append(j - 1)
        return Subspace.coordinates(ambient, idx)
    vectors = []
    for chunk in spec.split(";"):
        vec = [Fraction(x.strip()) for x in chunk.split(",")]
        if len(vec) != ambient:
            raise ValueError(f"vector {chunk!r} does not have length {ambient}")
        vectors.append(vec)
    return Subspace.span(vectors, ambient)
