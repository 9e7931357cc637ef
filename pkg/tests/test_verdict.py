import numpy as np
import pytest

from pconvex.geometry import OpenBall, OpenBox, complement_of_axis, punctured_space
from pconvex.poly import Subspace, parse_polynomial
from pconvex.poly.presets import get_preset, heat, laplace, wave
from pconvex.verdict import (
    NO,
    RULES,
    UNKNOWN,
    YES,
    GeomParams,
    augmented_verdict,
    classify_operator,
    convexity_verdict,
    surjectivity_verdict,
)

LAP3_SUB = parse_polynomial("x1^2+x2^2", nvars=3)
AXIS_OFFSETS = tuple((0.0, 0.0, z) for z in np.linspace(-1.0, 1.0, 20))


def _ids(v, outcome=None):
    return [r.id for r in v.rules if outcome is None or r.outcome == outcome]


@pytest.mark.parametrize("a,b,out", [(YES, YES, YES), (YES, NO, NO), (NO, YES, NO),
                                     (YES, UNKNOWN, UNKNOWN), (UNKNOWN, UNKNOWN, UNKNOWN),
                                     (NO, UNKNOWN, NO)])
def test_surjectivity_table(a, b, out):
    assert surjectivity_verdict(a, b) == out


def test_classify_heat3():
    oc = classify_operator(heat(3))
    assert not oc.elliptic
    assert oc.semi_elliptic.weights == (1, 2, 2)
    assert oc.zero_subspace.equals(Subspace.coordinates(3, [0]))


def test_classify_laplace_and_transport():
    assert classify_operator(laplace(2)).elliptic
    oc = classify_operator(get_preset("transport:1,i,0"))
    assert oc.first_order is not None
    assert oc.acts_along.equals(Subspace.coordinates(3, [0, 1]))
    assert oc.elliptic_along


def test_classify_rejects_constants():
    with pytest.raises(ValueError):
        classify_operator(parse_polynomial("0", nvars=2))
    with pytest.raises(ValueError):
        classify_operator(parse_polynomial("3", nvars=2))


def test_heat_punctured_plane_fails_supports():
    v = convexity_verdict(heat(2), punctured_space(2), GeomParams(h=0.02))
    assert v.supports == NO and v.surjective == NO
    assert "R3" in _ids(v, NO)
    origins = [tuple(np.round(c["certificate"]["origin"], 9)) for c in v.certificates]
    assert (0.5, 0.0) in origins
    assert all(c["replay"]["ok"] for c in v.certificates)
    assert all(c["rule"] == "R3" for c in v.certificates)


def test_laplace3_any_domain_yes():
    v = convexity_verdict(laplace(3), punctured_space(3))
    assert (v.supports, v.sing_supports, v.surjective) == (YES, YES, YES)
    assert _ids(v)[0] == "R1"
    assert not v.certificates


def test_subspace_elliptic_dichotomy():
    yes = convexity_verdict(LAP3_SUB, complement_of_axis(3, 2), GeomParams(offsets=AXIS_OFFSETS))
    assert (yes.supports, yes.sing_supports) == (YES, YES)
    assert "R2" in _ids(yes, YES)
    assert any("holds up to h=" in q for q in yes.qualifiers)
    no = convexity_verdict(LAP3_SUB, punctured_space(3))
    assert (no.supports, no.sing_supports, no.surjective) == (NO, NO, NO)
    assert "R2" in _ids(no, NO) and no.certificates


def test_convex_domain_rule():
    v = convexity_verdict(heat(2), OpenBox((-1, -1), (1, 1)))
    assert v.surjective == YES


def test_wave_is_unknown():
    v = convexity_verdict(wave(2), punctured_space(2))
    assert (v.supports, v.sing_supports, v.surjective) == (UNKNOWN, UNKNOWN, UNKNOWN)
    assert not v.certificates


def test_wave_on_convex_set_uses_convexity():
    v = convexity_verdict(wave(2), OpenBall((0, 0), 1.0))
    assert v.surjective == YES and "R6" in _ids(v)


def test_transport_punctured_space_no():
    v = convexity_verdict(get_preset("transport:1,i,0"), punctured_space(3))
    assert v.supports == NO and "R2" in _ids(v, NO)


def test_augmented_heat_ball():
    v = augmented_verdict(heat(2), OpenBall((0, 0), 1.0))
    assert v.surjective == YES and v.augmented_surjective == YES
    assert "A-ii" in _ids(v, YES)
    assert v.conditions["coherent"]


def test_augmented_laplace_sub_axis_complement():
    v = augmented_verdict(LAP3_SUB, complement_of_axis(3, 2), GeomParams(offsets=AXIS_OFFSETS))
    assert v.augmented_surjective == YES and "A-i" in _ids(v, YES)


def test_augmented_heat_punctured_plane():
    v = augmented_verdict(heat(2), punctured_space(2))
    assert v.surjective == NO and v.certificates
    assert v.augmented_sing_supports == NO
    assert v.conditions["coherent"]


def test_rule_trace_has_citations():
    v = augmented_verdict(heat(2), OpenBall((0, 0), 1.0))
    js = v.to_json()
    for r in js["rules"]:
        assert r["citation"] == RULES[r["id"]] and r["citation"]
    assert js["rules"][-1]["id"] in {"S", "A-ii", "A-iv", "A-sup", "A-i"}


def test_refinement_never_flips_no_to_yes():
    for h in (0.05, 0.025):
        assert convexity_verdict(heat(2), punctured_space(2), GeomParams(h=h)).supports == NO
    assert convexity_verdict(heat(2), punctured_space(2), GeomParams(h=0.05, extent=3.0)).supports == NO


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        convexity_verdict(heat(2), punctured_space(3))
