import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from pconvex.poly import (
    GaussQ,
    Polynomial,
    PolynomialSyntaxError,
    Subspace,
    augment,
    dependence_subspace,
    evaluate,
    get_preset,
    is_elliptic_on,
    parse_polynomial,
    parse_subspace,
    principal_part,
    restrict_to_subspace,
    semi_elliptic_weights,
    vanishes_on_subspace,
    zero_set_structure,
)
from pconvex.poly.analysis import compose_linear
from pconvex.poly.presets import heat, laplace, transport, wave


# -- parsing and evaluation ----------------------------------------------------

def test_parse_laplace2():
    P = parse_polynomial("x1^2 + x2^2")
    assert P.nvars == 2 and P.degree == 2
    assert P.terms == {(2, 0): 1, (0, 2): 1}


def test_parse_heat_type():
    P = parse_polynomial("i*x1 - x2^2 - x3^2")
    assert P.nvars == 3
    assert P.coefficient((1, 0, 0)) == GaussQ(0, 1)
    assert P.coefficient((0, 2, 0)) == -1


def test_parse_binomial():
    P = parse_polynomial("(x1+x2)^2")
    assert P.terms == {(2, 0): 1, (1, 1): 2, (0, 2): 1}


@pytest.mark.parametrize("text", ["x1^^2", "x1 +", "(x1", "x0^2", "x1^-1", "2 x1 @"])
def test_parse_errors_report_position(text):
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse_polynomial(text)
    assert exc.value.position >= 0


def test_parse_nvars_too_small():
    with pytest.raises(ValueError):
        parse_polynomial("x3", nvars=2)


def test_evaluate_examples():
    assert evaluate(heat(2), (1, 1)) == complex(-1, 1)
    assert evaluate(laplace(2), (3, 4)) == 25
    assert evaluate(parse_polynomial("(x1+x2)^2"), (1, -1)) == 0


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(laplace(2), (1, 2, 3))


def test_numeric_matches_exact():
    P = parse_polynomial("i*x1^3*x2 - 2/3*x2^2 + (1+i)*x1 + 5", nvars=2)
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 2))
    num = P.numeric()
    vals = num(X)
    for x, v in zip(X, vals):
        assert abs(v - P.evaluate(x)) < 1e-12 * (1 + abs(v))
    v2, g = num.value_and_grad(X)
    assert np.allclose(v2, vals)
    eps = 1e-6
    fd = (num(X + [eps, 0]) - num(X - [eps, 0])) / (2 * eps)
    assert np.allclose(g[:, 0], fd, rtol=1e-6, atol=1e-6)


# -- structural operations ------------------------------------------------------

def test_principal_part_examples():
    assert principal_part(heat(2)) == parse_polynomial("-x2^2", nvars=2)
    assert principal_part(parse_polynomial("x1*x2 + x1")) == parse_polynomial("x1*x2")
    assert principal_part(laplace(3)) == laplace(3)


def test_augment_examples():
    H = heat(2)
    Hp = augment(H)
    assert Hp.nvars == 3
    rng = np.random.default_rng(0)
    for a, b, c in rng.normal(size=(20, 3)):
        assert Hp.evaluate((a, b, c)) == pytest.approx(H.evaluate((a, b)))
    Z = augment(Polynomial.zero(2))
    assert Z.is_zero and Z.nvars == 3


def test_augment_twice_independent_of_last_two():
    P = parse_polynomial("i*x1*x2 - x2^3 + 4")
    P2 = augment(augment(P))
    rng = np.random.default_rng(1)
    for x in rng.normal(size=(100, 4)):
        y = x.copy()
        y[2:] = rng.normal(size=2) * 10
        assert P2.evaluate(x) == pytest.approx(P2.evaluate(y), rel=1e-12, abs=1e-12)


def test_dependence_subspace_examples():
    W = dependence_subspace(parse_polynomial("x1^2+x2^2", nvars=3))
    assert W.equals(Subspace.coordinates(3, [0, 1]))
    W = dependence_subspace(parse_polynomial("(x1+x2)^2"))
    assert W.equals(Subspace.span([[1, 1]], 2))
    assert dependence_subspace(heat(2)).is_full


def test_vanishes_on_subspace_examples():
    assert vanishes_on_subspace(principal_part(heat(2)), Subspace.coordinates(2, [0]))
    assert not vanishes_on_subspace(laplace(2), Subspace.coordinates(2, [0]))
    assert vanishes_on_subspace(parse_polynomial("(x1+x2)^2"), Subspace.span([[1, -1]], 2))


def test_restrict_examples():
    R = restrict_to_subspace(parse_polynomial("x1^2+x2^2", nvars=3), Subspace.coordinates(3, [0, 1]))
    assert R.nvars == 2
    assert complex(R.coefficient((2, 0))) == pytest.approx(1)
    assert complex(R.coefficient((0, 2))) == pytest.approx(1)
    R = restrict_to_subspace(parse_polynomial("x1^2", nvars=2), Subspace.span([[1, 1]], 2))
    assert complex(R.coefficient((2,))) == pytest.approx(0.5)
    R = restrict_to_subspace(parse_polynomial("5", nvars=3), Subspace.coordinates(3, [1]))
    assert complex(R.coefficient((0,))) == pytest.approx(5)


def test_ellipticity_examples():
    r = is_elliptic_on(laplace(2), Subspace.full(2))
    assert r.elliptic and r.c_lower == pytest.approx(1, rel=1e-6)
    r = is_elliptic_on(wave(2), Subspace.full(2))
    assert r.elliptic is False
    w = r.witness / np.linalg.norm(r.witness)
    assert abs(abs(w[0]) - abs(w[1])) < 1e-6
    r = is_elliptic_on(parse_polynomial("x1^2+x2^2", nvars=3), Subspace.coordinates(3, [0, 1]))
    assert r.elliptic


def test_semi_elliptic_examples():
    assert semi_elliptic_weights(parse_polynomial("i*x1 - x2^2 - x3^2")).weights == (1, 2, 2)
    assert semi_elliptic_weights(laplace(2)).weights == (2, 2)
    s = semi_elliptic_weights(wave(2))
    assert not s.accepted
    w = s.witness / np.linalg.norm(s.witness)
    assert abs(abs(w[0]) - abs(w[1])) < 1e-6
    assert abs(s.weighted_principal.evaluate(s.witness)) < 1e-7


def test_zero_set_examples():
    z = zero_set_structure(parse_polynomial("-x2^2", nvars=2))
    assert z.kind == "subspace" and z.subspace.equals(Subspace.coordinates(2, [0]))
    assert zero_set_structure(laplace(3)).kind == "trivial"
    z = zero_set_structure(parse_polynomial("x1^2-x2^2"))
    assert z.kind == "not_subspace"
    Q = parse_polynomial("x1^2-x2^2")
    for zero in z.witness["zeros"]:
        assert abs(Q.evaluate(zero)) < 1e-9
    assert abs(z.witness["value"]) == pytest.approx(1.0)


def test_presets():
    assert get_preset("laplace3-sub") == parse_polynomial("x1^2+x2^2", nvars=3)
    assert get_preset("heat2") == heat(2)
    T = get_preset("transport:1,i,0")
    assert T.degree == 1 and T.nvars == 3
    with pytest.raises(KeyError):
        get_preset("nonsense7")
    with pytest.raises(ValueError):
        transport([0, 0])


def test_parse_subspace_forms():
    assert parse_subspace("e1,e3", 3).equals(Subspace.coordinates(3, [0, 2]))
    assert parse_subspace("1,1,0", 3).equals(Subspace.span([[1, 1, 0]], 3))
    assert parse_subspace("full", 2).is_full
    assert parse_subspace("0", 2).is_trivial
    with pytest.raises(ValueError):
        parse_subspace("e4", 3)


def test_subspace_complement_and_products():
    V = Subspace.span([[1, 1, 0]], 3)
    C = V.complement()
    assert C.dim == 2 and V.is_orthogonal_to(C)
    assert V.times_line().dim == 2 and V.times_line().ambient == 4
    assert V.times_zero().dim == 1


# -- invariant-subspace statement ------------------------------------------------

def test_vanishing_alone_does_not_give_translation_invariance():
    # x1*x2 is zero on span{e1} yet changes under translation along e1
    P = parse_polynomial("x1*x2")
    V = Subspace.coordinates(2, [0])
    assert vanishes_on_subspace(P, V)
    assert P.evaluate((1.0, 1.0)) != P.evaluate((2.0, 1.0))


def test_pullback_from_complement_is_invariant():
    Q = parse_polynomial("x1^2 - i*x1 + 3", nvars=1)
    V = Subspace.span([[1, 2]], 2)
    B = V.complement().basis             # coordinates on V-perp
    P = compose_linear(Q, B.T)
    assert vanishes_on_subspace(P - P.coefficient((0, 0)), V)
    x = np.array([0.3, -0.7])
    for s in (-2.0, 0.5, 7.0):
        assert P.evaluate(x + s * V.basis[0]) == pytest.approx(P.evaluate(x), rel=1e-12)


# -- properties -----------------------------------------------------------------

small = st.integers(-3, 3)
terms = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                        st.tuples(small, small), max_size=6)


def _poly(d):
    return Polynomial(2, {a: GaussQ(re, im) for a, (re, im) in d.items()})


@settings(max_examples=60, deadline=None)
@given(terms, terms, st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_ring_homomorphism(a, b, x):
    P, Q = _poly(a), _poly(b)
    assert (P + Q).evaluate(x) == pytest.approx(P.evaluate(x) + Q.evaluate(x), abs=1e-9)
    assert (P * Q).evaluate(x) == pytest.approx(P.evaluate(x) * Q.evaluate(x), rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(terms)
def test_str_round_trip(a):
    P = _poly(a)
    assert parse_polynomial(str(P), nvars=2) == P


@settings(max_examples=60, deadline=None)
@given(terms, st.floats(0.1, 3))
def test_principal_part_homogeneous(a, lam):
    P = _poly(a)
    if P.is_zero:
        return
    Pm = principal_part(P)
    m = P.degree
    x = np.array([0.4, -1.3])
    assert Pm.evaluate(lam * x) == pytest.approx(lam ** m * Pm.evaluate(x), rel=1e-9, abs=1e-9)


def test_exact_rational_arithmetic():
    P = parse_polynomial("1/3*x1 + 1/6*x1")
    assert P.coefficient((1,)) == Fraction(1, 2)
