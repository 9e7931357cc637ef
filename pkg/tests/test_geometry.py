import json

import numpy as np
import pytest

from pconvex.geometry import (
    ComplementOfAffine,
    DomainConfigError,
    FailsCertificate,
    FiniteIntersection,
    FullSpace,
    GridDomain,
    HalfSpace,
    NotInDomain,
    OpenBall,
    OpenBox,
    Product,
    boundary_distance,
    build_slice,
    characteristic_directions,
    complement_of_axis,
    domain_from_mapping,
    escape_path,
    load_domain,
    min_principle_family,
    min_principle_slice,
    product_lift,
    punctured_space,
    replay_certificate,
    write_grid,
)
from pconvex.poly import Subspace, parse_polynomial
from pconvex.poly.presets import heat, laplace

E1_2 = Subspace.coordinates(2, [0])
PUNCT2 = punctured_space(2)


def _line_slice(h=0.01):
    # the slice {x2 = 0.5} of the punctured plane
    return build_slice(PUNCT2, [0.0, 0.5], E1_2, h, 2.0, slice_id="x2=0.5")


def exact_domains():
    return {
        "ball": OpenBall((0.2, -0.1, 0.0), 1.5),
        "box": OpenBox((-1, -2, 0), (1, 1, 3)),
        "halfspace": HalfSpace((1, 2, -1), 0.5),
        "punctured": punctured_space(3),
        "axis": complement_of_axis(3, 2),
        "affine_plane": ComplementOfAffine((1, 0, 0), Subspace.coordinates(3, [1, 2])),
        "intersection": FiniteIntersection((OpenBall((0, 0, 0), 2.0), HalfSpace((0, 0, 1), 0.3),
                                            punctured_space(3))),
        "product": Product(OpenBall((0, 0), 1.0)),
    }


# -- distances -------------------------------------------------------------------

def test_boundary_distance_examples():
    assert boundary_distance(OpenBall((0, 0), 1.0), [0, 0]) == 1.0
    assert boundary_distance(complement_of_axis(3, 2), [3, 4, 7]) == pytest.approx(5.0)
    assert boundary_distance(FullSpace(2), [1, 1]) == np.inf


def test_boundary_distance_outside_raises():
    with pytest.raises(NotInDomain):
        boundary_distance(OpenBall((0, 0), 1.0), [2, 0])
    with pytest.raises(NotInDomain):
        boundary_distance(PUNCT2, [0, 0])
    with pytest.raises(ValueError):
        boundary_distance(PUNCT2, [0, 0, 1])


@pytest.mark.parametrize("name", sorted(exact_domains()))
def test_distance_is_one_lipschitz(name):
    X = exact_domains()[name]
    rng = np.random.default_rng(7)
    a = rng.uniform(-2.5, 2.5, size=(4000, X.ambient))
    b = a + rng.normal(size=a.shape) * rng.uniform(0, 1, size=(len(a), 1))
    keep = X.contains(a) & X.contains(b)
    da, db = X.distance(a[keep]), X.distance(b[keep])
    gap = np.abs(da - db) - np.linalg.norm(a[keep] - b[keep], axis=1)
    assert keep.sum() > 100
    assert gap.max() <= 1e-9


@pytest.mark.parametrize("name", sorted(exact_domains()))
def test_distance_matches_sampled_complement(name):
    # d(x) <= |x - y| for every sampled y outside X
    X = exact_domains()[name]
    rng = np.random.default_rng(1)
    pts = rng.uniform(-2, 2, size=(200, X.ambient))
    pts = pts[X.contains(pts)]
    out = rng.uniform(-3, 3, size=(4000, X.ambient))
    out = out[~X.contains(out)]
    if isinstance(X, ComplementOfAffine):
        # the removed set has measure zero; sample it directly
        c = rng.uniform(-3, 3, size=(4000, max(X.A.dim, 1)))
        out = np.array(X.point) + (c @ X.A.basis if X.A.dim else 0.0 * c[:, :1])
    d = X.distance(pts)
    nearest = np.linalg.norm(pts[:, None, :] - out[None], axis=2).min(axis=1)
    assert np.all(d <= nearest + 1e-9)


def test_grid_domain_error_bound(tmp_path):
    h = 0.02
    g = np.arange(-1, 1, h) + h / 2
    X, Y = np.meshgrid(g, g, indexing="ij")
    mask = X ** 2 + Y ** 2 < 0.8 ** 2
    hdr = write_grid(tmp_path / "disk", mask, (-1, -1), h)
    dom = GridDomain.from_header(tmp_path / "disk.json")
    assert dom.approximate and hdr["shape"] == [100, 100]
    pts = np.random.default_rng(0).uniform(-0.7, 0.7, size=(500, 2))
    pts = pts[np.linalg.norm(pts, axis=1) < 0.75]
    exact = 0.8 - np.linalg.norm(pts, axis=1)
    assert np.abs(dom.distance(pts) - exact).max() <= dom.error_bound()
    loaded = load_domain(tmp_path / "disk.json")
    assert np.allclose(loaded.distance(pts), dom.distance(pts))


def test_grid_domain_bad_size(tmp_path):
    np.zeros(10, np.uint8).tofile(tmp_path / "g.raw")
    with pytest.raises(ValueError):
        GridDomain.from_raw(tmp_path / "g.raw", (3, 3), (0, 0), 0.1)


def test_config_round_trip(tmp_path):
    for X in exact_domains().values():
        Y = domain_from_mapping(json.loads(json.dumps(X.to_json())))
        pts = np.random.default_rng(2).uniform(-2, 2, size=(50, X.ambient))
        assert np.array_equal(X.contains(pts), Y.contains(pts))
        inside = X.contains(pts)
        assert np.allclose(X.distance(pts[inside]), Y.distance(pts[inside]))
    p = tmp_path / "d.toml"
    p.write_text('type = "complement_affine"\npoint = [0, 0, 0]\ndirections = "e3"\n')
    assert load_domain(p).distance(np.array([[3.0, 4.0, 9.0]]))[0] == pytest.approx(5.0)


@pytest.mark.parametrize("cfg", [{"type": "blob"}, {"type": "ball", "center": [0, 0]},
                                 {"type": "ball", "center": [0, 0], "radius": -1},
                                 {"type": "box", "lo": [0, 0], "hi": [0, 1]}])
def test_config_errors(cfg):
    with pytest.raises(DomainConfigError):
        domain_from_mapping(cfg)


def test_product_lift_distance():
    C = product_lift(OpenBall((0, 0), 1.0))
    assert C.distance(np.array([[0.3, 0.4, 17.0]]))[0] == pytest.approx(0.5)
    F = product_lift(FullSpace(2))
    assert np.isinf(F.distance(np.array([[1.0, 2.0, 3.0]]))[0])


# -- slices ---------------------------------------------------------------------

def test_ball_slice_is_disk():
    sg = build_slice(OpenBall((0, 0, 0), 1.0), [0, 0, 0], Subspace.coordinates(3, [0, 1]), 0.1, 1.5)
    area = sg.in_x.sum() * 0.01
    assert area == pytest.approx(np.pi, rel=0.05)


def test_punctured_line_distance_formula():
    sg = _line_slice()
    x = sg.axes()[0]
    assert sg.in_x.all()
    assert np.allclose(sg.d, np.sqrt(x ** 2 + 0.25), atol=1e-12)


def test_min_principle_fails_on_punctured_line():
    r = min_principle_slice(_line_slice())
    assert r.status == "fails"
    assert r.interior_min == pytest.approx(0.5, abs=0.02)
    assert r.boundary_min == pytest.approx(np.sqrt(1.25), abs=0.02)
    assert abs(r.interior_local[0]) <= 0.02
    assert replay_certificate(PUNCT2, r).ok


def test_certificate_json_round_trip():
    r = min_principle_slice(_line_slice(0.05))
    back = FailsCertificate.from_json(json.loads(json.dumps(r.to_json())))
    assert back == r


def test_tampered_certificate_does_not_replay():
    r = min_principle_slice(_line_slice(0.05))
    moved = FailsCertificate.from_json({**r.to_json(), "origin": [0.0, 3.0]})
    assert not replay_certificate(OpenBall((0, 0), 1.0), moved).ok


def test_ball_slices_through_center_hold():
    X = OpenBall((0, 0, 0), 1.0)
    for W in (Subspace.coordinates(3, [0]), Subspace.coordinates(3, [0, 1]), Subspace.full(3)):
        h = 0.05 if W.dim < 3 else 0.1
        assert min_principle_slice(build_slice(X, [0, 0, 0], W, h, 1.5)).status == "holds"


def test_axis_complement_plane_holds():
    X = complement_of_axis(3, 2)
    sg = build_slice(X, [0, 0, 0], Subspace.coordinates(3, [0, 1]), 0.05, 2.0)
    assert min_principle_slice(sg).status == "holds"


def test_family_punctured_space_fails_at_every_offset():
    X = punctured_space(3)
    W = Subspace.coordinates(3, [0, 1])
    offs = [np.array([0, 0, z]) for z in (0.25, 0.5, 1.0)]
    rep = min_principle_family(X, W, offs, h=0.05, extent=2.0)
    assert rep.status == "fails" and len(rep.failures) == 3
    for cert, z in zip(rep.failures, (0.25, 0.5, 1.0)):
        assert cert.interior_min == pytest.approx(z, abs=0.1)


def test_family_ball_random_offsets_hold():
    X = OpenBall((0, 0), 1.0)
    rng = np.random.default_rng(4)
    offs = [np.array([0.0, y]) for y in rng.uniform(-0.95, 0.95, 20)]
    assert min_principle_family(X, E1_2, offs, h=0.02, extent=1.2).status == "holds"


def test_family_full_space_vacuous():
    rep = min_principle_family(FullSpace(2), E1_2, [np.zeros(2)], h=0.1)
    assert rep.status == "holds"


@pytest.mark.parametrize("X", [OpenBox((-1, -1), (1, 2)), HalfSpace((1, 1), 0.3),
                               FiniteIntersection((OpenBall((0, 0), 1.0), HalfSpace((0, 1), 0.5)))])
def test_convex_domains_hold(X):
    for W in (E1_2, Subspace.span([[1, 1]], 2), Subspace.full(2)):
        rep = min_principle_family(X, W, h=0.05, extent=2.0)
        assert rep.status == "holds", (X, W, rep.status)


def test_empty_slices_are_recorded():
    X = OpenBall((0, 0), 1.0)
    rep = min_principle_family(X, E1_2, [np.array([0, 0.0]), np.array([0, 5.0])], h=0.05)
    assert rep.status == "holds" and rep.empty == ["s001"]


def test_refinement_keeps_failures():
    # halving h never turns a failing slice into a passing one
    for h in (0.04, 0.02, 0.01):
        assert min_principle_slice(_line_slice(h)).status == "fails"


# -- escape paths ----------------------------------------------------------------

def test_escape_from_ball_center():
    sg = build_slice(OpenBall((0, 0), 1.0), [0, 0], Subspace.full(2), 0.05, 1.2)
    start = sg.cell_of([0.0, 0.0])
    path = escape_path(sg, start)
    assert path[0] == start
    end = path[-1]
    assert sg.d[end] < 2 * sg.h or sg.frontier_mask()[end]


def test_escape_blocked_on_punctured_line():
    sg = _line_slice()
    x = sg.axes()[0]
    K = [(i,) for i in np.flatnonzero(np.abs(x) <= 1.0 + 1e-12)]
    assert escape_path(sg, sg.cell_of([0.0]), K) is None
    path = escape_path(sg, sg.cell_of([1.5]), K)
    assert path is not None and sg.frontier_mask()[path[-1]]


def test_escape_start_outside_raises():
    sg = build_slice(PUNCT2, [0, 0], E1_2, 0.1, 1.0)
    with pytest.raises(NotInDomain):
        escape_path(sg, sg.cell_of([0.0]))


# -- lifting and characteristic directions -----------------------------------------

@pytest.mark.parametrize("X", [OpenBall((0, 0), 1.0), PUNCT2])
def test_lift_agrees_with_base(X):
    L = product_lift(X)
    for W in (E1_2, Subspace.coordinates(2, [1]), Subspace.span([[1, 2]], 2)):
        for y in (0.0, 0.3, 0.5):
            x0 = W.complement().basis[0] * y
            base = min_principle_slice(build_slice(X, x0, W, 0.05, 2.0)).status
            lifted = min_principle_slice(build_slice(L, np.append(x0, 0.0), W.times_zero(), 0.05, 2.0)).status
            assert base == lifted


def test_characteristic_directions():
    dirs = characteristic_directions(heat(2))
    assert sorted(tuple(np.round(d, 12)) for d in dirs) == [(-1.0, 0.0), (1.0, 0.0)]
    assert characteristic_directions(laplace(3)) == []
    dirs = characteristic_directions(parse_polynomial("x1^2+x2^2", nvars=3))
    assert sorted(tuple(np.round(d, 12)) for d in dirs) == [(0.0, 0.0, -1.0), (0.0, 0.0, 1.0)]
    with pytest.raises(ValueError):
        characteristic_directions(parse_polynomial("x1^2-x2^2"))
