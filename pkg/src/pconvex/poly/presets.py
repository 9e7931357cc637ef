"""Named operator symbols.

Convention: a derivative d/dx_j becomes -i*x_j, and time is the first
coordinate.  So the heat operator Delta_x - d/dt has symbol i*x1 - sum x_j^2
and the Schroedinger operator Delta_x + i d/dt has symbol x1 - sum x_j^2.
All functionals computed downstream (|P|, zero sets of P_m, sigma ratios)
are invariant under xi -> -xi and conjugation of coefficients, so the choice
only affects coordinates in file outputs.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .parser import parse_polynomial
from .polynomial import GaussQ, Polynomial

CONVENTIONS = {
    "symbol_map": "d/dx_j -> -i*x_j",
    "time_coordinate": "x1 (first) for heat and schrodinger presets",
}


def _sum_squares(start: int, n: int) -> str:
    return " + ".join(f"x{j}^2" for j in range(start, n + 1))


def laplace(n: int, nvars: int | None = None) -> Polynomial:
    return parse_polynomial(_sum_squares(1, n), nvars=nvars or n)


def heat(n: int) -> Polynomial:
    if n < 2:
        raise ValueError("heat(n) needs n >= 2 (one time and at least one space variable)")
    return parse_polynomial(f"i*x1 - ({_sum_squares(2, n)})", nvars=n)


def schrodinger(n: int) -> Polynomial:
    if n < 2:
        raise ValueError("schrodinger(n) needs n >= 2")
    return parse_polynomial(f"x1 - ({_sum_squares(2, n)})", nvars=n)


def wave(n: int) -> Polynomial:
    if n < 2:
        raise ValueError("wave(n) needs n >= 2")
    return parse_polynomial(f"x1^2 - ({_sum_squares(2, n)})", nvars=n)


def transport(N, c=0) -> Polynomial:
    """<N, x> + c for a complex direction N (entries: numbers or GaussQ)."""
    n = len(N)
    terms = {}
    for j, v in enumerate(N):
        alpha = [0] * n
        alpha[j] = 1
        terms[tuple(alpha)] = _exact(v)
    terms[(0,) * n] = _exact(c)
    P = Polynomial(n, terms)
    if P.degree != 1:
        raise ValueError("transport direction N must be nonzero")
    return P


def cauchy_riemann() -> Polynomial:
    # d/dz-bar = (d/dx + i d/dy)/2, up to the symbol convention and a constant factor
    return transport([1, GaussQ(0, 1)])


def _exact(v):
    if isinstance(v, (GaussQ, int, Fraction)):
        return v
    if isinstance(v, str):
        return parse_polynomial(v, nvars=1).coefficient((0,))
    if isinstance(v, complex):
        return GaussQ(Fraction(v.real), Fraction(v.imag))
    return Fraction(v)


_NAMED = re.compile(r"^(laplace|heat|schrodinger|wave)(\d+)(-sub)?$")

PRESET_HELP = {
    "laplaceN": "x1^2 + ... + xN^2",
    "laplaceN-sub": "x1^2 + ... + x(N-1)^2 in R^N (acts along a proper subspace)",
    "heatN": "i*x1 - (x2^2 + ... + xN^2), time first",
    "schrodingerN": "x1 - (x2^2 + ... + xN^2), time first",
    "waveN": "x1^2 - (x2^2 + ... + xN^2)",
    "transport:N1,...,Nn[;c]": "<N, x> + c with complex N (e.g. transport:1,i,0)",
    "cauchy-riemann": "x1 + i*x2",
}


def get_preset(name: str) -> Polynomial:
    """Resolve a preset name such as ``heat2``, ``laplace3-sub`` or ``transport:1,i,0;2``."""
    name = name.strip()
    if name == "cauchy-riemann":
        return cauchy_riemann()
    if name.startswith("transport:"):
        body = name[len("transport:"):]
        direction, _, const = body.partition(";")
        N = [v.strip() for v in direction.split(",")]
        return transport(N, const.strip() or 0)
    m = _NAMED.match(name)
    if not m:
        raise KeyError(f"unknown preset {name!r}")
    family, n, sub = m.group(1), int(m.group(2)), m.group(3)
    if sub:
        if family != "laplace" or n < 2:
            raise KeyError(f"unknown preset {name!r}")
        return laplace(n - 1, nvars=n)
    return {"laplace": laplace, "heat": heat, "schrodinger": schrodinger, "wave": wave}[family](n)


def resolve_operator(text: str, nvars: int | None = None) -> Polynomial:
    """Preset name or polynomial text."""
    try:
        return get_preset(text)
    except KeyError:
        return parse_polynomial(text, nvars=nvars)
