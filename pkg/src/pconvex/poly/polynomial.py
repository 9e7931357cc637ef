"""Multivariate polynomials with exact Gaussian-rational coefficients.

Coefficients are stored as :class:`GaussQ` (a + b*i with ``Fraction`` parts)
whenever the input is exact.  Operations that need irrational numbers, such as
restriction to a subspace with an orthonormal float basis, fall back to plain
Python ``complex`` coefficients; such polynomials report ``is_exact == False``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Iterator, Mapping

import numpy as np

MultiIndex = tuple[int, ...]


class GaussQ:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def exact(value) -> bool:
        return isinstance(value, (GaussQ, Rational))

    @classmethod
    def coerce(cls, value) -> "GaussQ":
        if isinstance(value, GaussQ):
            return value
        if isinstance(value, Rational):
            return cls(value)
        raise TypeError(f"cannot represent {value!r} exactly")

    def __add__(self, other):
        if isinstance(other, (GaussQ, Rational)):
            o = GaussQ.coerce(other)
            return GaussQ(self.re + o.re, self.im + o.im)
        if isinstance(other, (float, complex, np.number)):
            return complex(self) + complex(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (GaussQ, Rational)):
            o = GaussQ.coerce(other)
            return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if isinstance(other, (float, complex, np.number)):
            return complex(self) * complex(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (GaussQ, Rational)):
            o = GaussQ.coerce(other)
            den = o.re * o.re + o.im * o.im
            if den == 0:
                raise ZeroDivisionError("division by zero coefficient")
            num = self * o.conjugate()
            return GaussQ(num.re / den, num.im / den)
        if isinstance(other, (float, complex, np.number)):
            return complex(self) / complex(other)
        return NotImplemented

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (GaussQ, Rational)):
            o = GaussQ.coerce(other)
            return self.re == o.re and self.im == o.im
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        return _format_coeff(self)


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_coeff(c) -> str:
    if isinstance(c, GaussQ):
        if c.im == 0:
            return _format_rational(c.re)
        if c.re == 0:
            if abs(c.im) == 1:
                return "i" if c.im > 0 else "-i"
            return f"{_format_rational(c.im)}*i"
        return f"({_format_rational(c.re)} + {_format_rational(c.im)}*i)"
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r} + {c.imag!r}*i)"


def _normalize_coeff(c):
    if isinstance(c, GaussQ):
        return c
    if isinstance(c, Rational):
        return GaussQ(c)
    if isinstance(c, (float, complex, np.number)):
        return complex(c)
    raise TypeError(f"unsupported coefficient {c!r}")


def _is_zero(c) -> bool:
    return not c


class Polynomial:
    """Immutable polynomial in ``nvars`` real variables with complex coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients.  The zero polynomial
    has no terms, ``degree == 0`` and ``is_zero == True``.
    """

    __slots__ = ("nvars", "_terms", "_numeric")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, object] | Iterable | None = None):
        if not isinstance(nvars, Integral) or nvars < 1:
            raise ValueError(f"nvars must be a positive integer, got {nvars!r}")
        self.nvars = int(nvars)
        clean: dict[MultiIndex, object] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.nvars:
                raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {self.nvars}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = _normalize_coeff(c)
            if alpha in clean:
                c = clean[alpha] + c
            clean[alpha] = c
        self._terms = {a: c for a, c in clean.items() if not _is_zero(c)}
        self._numeric = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, value, nvars: int) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Polynomial":
        """The coordinate function x_{index+1} (``index`` is 0-based)."""
        alpha = [0] * nvars
        alpha[index] = 1
        return cls(nvars, {tuple(alpha): 1})

    # -- basic properties ---------------------------------------------
    @property
    def terms(self) -> dict[MultiIndex, object]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[MultiIndex, object]]:
        return iter(sorted(self._terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, GaussQ) for c in self._terms.values())

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self._terms), default=0)

    def degree_in(self, j: int) -> int:
        return max((a[j] for a in self._terms), default=0)

    def coefficient(self, alpha: MultiIndex):
        return self._terms.get(tuple(alpha), GaussQ(0))

    def is_homogeneous(self) -> bool:
        return len({sum(a) for a in self._terms}) <= 1

    def scale(self) -> float:
        """Largest coefficient modulus (1.0 for the zero polynomial)."""
        return max((abs(c) for c in self._terms.values()), default=1.0) or 1.0

    def variables(self) -> set[int]:
        return {j for a in self._terms for j, e in enumerate(a) if e}

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return Polynomial.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for a, c in other._terms.items():
            terms[a] = terms[a] + c if a in terms else c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict[MultiIndex, object] = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms[key] + c * d if key in terms else c * d
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, Integral) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (Rational, GaussQ, float, complex)):
                other = Polynomial.constant(other, self.nvars)
            else:
                return NotImplemented
        return self.nvars == other.nvars and (self - other).is_zero

    def __hash__(self):
        return hash((self.nvars, frozenset((a, complex(c)) for a, c in self._terms.items())))

    def derivative(self, j: int) -> "Polynomial":
        terms = {}
        for a, c in self._terms.items():
            if a[j]:
                b = list(a)
                b[j] -= 1
                terms[tuple(b)] = c * a[j]
        return Polynomial(self.nvars, terms)

    def map_coefficients(self, fn) -> "Polynomial":
        return Polynomial(self.nvars, {a: fn(c) for a, c in self._terms.items()})

    # -- evaluation ---------------------------------------------------
    def evaluate(self, point) -> complex:
        """Evaluate at one (complex) point with compensated summation."""
        pt = [complex(v) for v in point]
        if len(pt) != self.nvars:
            raise ValueError(f"point has length {len(pt)}, expected {self.nvars}")
        re_parts, im_parts = [], []
        for a, c in self.items():
            mono = complex(c)
            for x, e in zip(pt, a):
                if e:
                    mono *= x**e
            re_parts.append(mono.real)
            im_parts.append(mono.imag)
        return complex(math.fsum(re_parts), math.fsum(im_parts))

    def __call__(self, point) -> complex:
        return self.evaluate(point)

    def numeric(self) -> "NumericPoly":
        if self._numeric is None:
            self._numeric = NumericPoly(self)
        return self._numeric

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for a, c in sorted(self._terms.items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0]))):
            mono = "*".join(
                f"x{j + 1}" if e == 1 else f"x{j + 1}^{e}" for j, e in enumerate(a) if e
            )
            coeff = _format_coeff(c)
            if not mono:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(mono)
            elif coeff == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"{coeff}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Polynomial({self.nvars}, '{self}')"


class NumericPoly:
    """Vectorized float evaluator for a :class:`Polynomial`.

    Points are arrays of shape ``(..., nvars)``; values have shape ``(...)``.
    """

    def __init__(self, poly: Polynomial):
        self.nvars = poly.nvars
        items = list(poly.items())
        self.exps = np.array([a for a, _ in items], dtype=np.int64).reshape(len(items), poly.nvars)
        self.coefs = np.array([complex(c) for _, c in items], dtype=complex)
        self.maxdeg = self.exps.max(axis=0) if len(items) else np.zeros(poly.nvars, dtype=np.int64)
        self._grad = None
        self._joint_cache = None
        self._poly = poly

    def _monomials(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        T = len(self.coefs)
        out = np.ones(X.shape[:-1] + (T,), dtype=float)
        for j in range(self.nvars):
            md = int(self.maxdeg[j])
            if md == 0:
                continue
            xj = X[..., j]
            table = [np.ones_like(xj)]
            for _ in range(md):
                table.append(table[-1] * xj)
            for t in range(T):
                e = int(self.exps[t, j])
                if e:
                    out[..., t] *= table[e]
        return out

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.nvars:
            raise ValueError(f"points have dimension {X.shape[-1]}, expected {self.nvars}")
        if not len(self.coefs):
            return np.zeros(X.shape[:-1], dtype=complex)
        return self._monomials(X) @ self.coefs

    @property
    def gradient(self) -> list["NumericPoly"]:
        if self._grad is None:
            self._grad = [NumericPoly(self._poly.derivative(j)) for j in range(self.nvars)]
        return self._grad

    def _joint(self):
        # one monomial table serving both the value and every partial derivative
        if getattr(self, "_joint_cache", None) is None:
            n, T = self.nvars, len(self.coefs)
            index: dict[tuple, int] = {}
            rows = []

            def slot(a):
                if a not in index:
                    index[a] = len(rows)
                    rows.append(a)
                return index[a]

            entries = []
            for t in range(T):
                a = tuple(int(e) for e in self.exps[t])
                entries.append((slot(a), n, self.coefs[t]))
                for j in range(n):
                    if a[j]:
                        b = a[:j] + (a[j] - 1,) + a[j + 1:]
                        entries.append((slot(b), j, self.coefs[t] * a[j]))
            C = np.zeros((len(rows), n + 1), dtype=complex)
            for r, col, c in entries:
                C[r, col] += c
            helper = NumericPoly.__new__(NumericPoly)
            helper.nvars = n
            helper.exps = np.array(rows, dtype=np.int64).reshape(len(rows), n)
            helper.coefs = C[:, n]
            helper.maxdeg = helper.exps.max(axis=0) if rows else np.zeros(n, dtype=np.int64)
            self._joint_cache = (helper, C)
        return self._joint_cache

    def value_and_grad(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Values (...) and gradients (..., n) from a single monomial evaluation."""
        X = np.asarray(X, dtype=float)
        if not len(self.coefs):
            return np.zeros(X.shape[:-1], dtype=complex), np.zeros(X.shape, dtype=complex)
        helper, C = self._joint()
        out = helper._monomials(X) @ C
        return out[..., -1], out[..., :-1]
