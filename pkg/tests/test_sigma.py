import numpy as np
import pytest

from oracles import laplace_sub_ratio_oracle, p_tilde_brute
from pconvex.poly import Subspace, augment, parse_polynomial
from pconvex.poly.presets import heat, laplace
from pconvex.sigma import (
    SigmaParams,
    p_tilde_sub,
    sigma0_estimate,
    sigma_estimate,
    sigma_zero_subspace_exact,
)

LAP3_SUB = parse_polynomial("x1^2+x2^2", nvars=3)


def test_p_tilde_examples():
    P = parse_polynomial("x1")
    assert p_tilde_sub(P, Subspace.full(1), [0.0], 1.0) == pytest.approx(1.0, rel=1e-9)
    v = p_tilde_sub(laplace(2), Subspace.coordinates(2, [1]), [10.0, 0.0], 1.0)
    assert v == pytest.approx(101.0, rel=1e-9)


def test_p_tilde_heat_against_grid():
    H = heat(2)
    est = p_tilde_sub(H, Subspace.full(2), [3.0, 2.0], 2.0)
    ref = p_tilde_brute(H, np.eye(2), [3.0, 2.0], 2.0)
    assert abs(est - ref) <= 0.01 * ref


def test_p_tilde_trivial_and_zero_radius():
    H = heat(2)
    xi = [0.5, 2.0]
    assert p_tilde_sub(H, Subspace.trivial(2), xi, 3.0) == pytest.approx(abs(H.evaluate(xi)))
    assert p_tilde_sub(H, Subspace.full(2), xi, 0.0) == pytest.approx(abs(H.evaluate(xi)))


def test_p_tilde_rejects_bad_input():
    with pytest.raises(ValueError):
        p_tilde_sub(heat(2), Subspace.full(2), [0.0, 0.0], -1.0)
    with pytest.raises(ValueError):
        p_tilde_sub(heat(2), Subspace.full(3), [0.0, 0.0, 0.0], 1.0)


def test_p_tilde_monotone_in_t_and_v():
    rng = np.random.default_rng(11)
    P = parse_polynomial("x1^3 - i*x2^2 + x1*x3 + 2", nvars=3)
    V1 = Subspace.coordinates(3, [0])
    V2 = Subspace.coordinates(3, [0, 1])
    for _ in range(40):
        xi = rng.normal(size=3) * 3
        t1, t2 = sorted(rng.uniform(0, 3, size=2))
        a = p_tilde_sub(P, V2, xi, t1)
        b = p_tilde_sub(P, V2, xi, t2)
        assert a <= b * (1 + 1e-6)
        c = p_tilde_sub(P, V1, xi, t1)
        assert c <= a * (1 + 1e-6)


def test_sigma_full_space_is_one():
    for P in (heat(2), LAP3_SUB):
        est = sigma_estimate(P, Subspace.full(P.nvars))
        assert est.value == 1.0 and est.exact
        assert sigma0_estimate(P, Subspace.full(P.nvars)).value == 1.0


def test_sigma_separation_matches_oracle():
    low = sigma_estimate(LAP3_SUB, Subspace.coordinates(3, [2]))
    assert low.value <= 0.05
    ref = laplace_sub_ratio_oracle()
    high = sigma_estimate(LAP3_SUB, Subspace.coordinates(3, [0]))
    assert high.value >= 0.2
    assert abs(high.value - ref) <= 0.05
    assert high.converged


def test_sigma_trace_is_complete():
    params = SigmaParams(t_grid=(1, 2), radius_schedule=(10, 100), n_directions=40)
    est = sigma_estimate(LAP3_SUB, Subspace.coordinates(3, [0]), params)
    assert set(est.per_t) == {1.0, 2.0}
    assert all(set(d) == {10.0, 100.0} for d in est.per_radius.values())
    assert est.value == min(est.per_t.values())
    assert 0.0 <= est.value <= 1.0
    js = est.to_json()
    assert set(js["per_radius"]) == {"1.0", "2.0"}


def test_sigma_deterministic_for_seed():
    params = SigmaParams(t_grid=(1,), radius_schedule=(10, 100), n_directions=30, seed=5)
    V = Subspace.coordinates(3, [0])
    assert sigma_estimate(LAP3_SUB, V, params).to_json() == sigma_estimate(LAP3_SUB, V, params).to_json()


def test_sigma0_heat_trivial_is_zero():
    assert sigma0_estimate(heat(2), Subspace.trivial(2)).value == pytest.approx(0.0, abs=1e-12)


def test_sigma_params_validation():
    with pytest.raises(ValueError):
        SigmaParams(t_grid=(0.5,))
    with pytest.raises(ValueError):
        SigmaParams(radius_schedule=(10, 5))
    with pytest.raises(ValueError):
        SigmaParams.from_mapping({"bogus": 1})
    p = SigmaParams.from_mapping({"t_grid": [1, 2], "radii": [10, 20], "directions": 7, "samples": 50, "seed": 3})
    assert p.n_directions == 7 and p.radius_schedule == (10.0, 20.0)


def test_sigma_zero_exact_examples():
    z = sigma_zero_subspace_exact(laplace(3))
    assert z.subspace.is_trivial and z.rule == "elliptic-along"
    z = sigma_zero_subspace_exact(LAP3_SUB)
    assert z.subspace.equals(Subspace.coordinates(3, [2]))
    z = sigma_zero_subspace_exact(augment(heat(2)))
    assert z.rule == "augmented-semi-elliptic"
    assert z.subspace.equals(Subspace.coordinates(3, [0, 2]))
    assert sigma_zero_subspace_exact(parse_polynomial("x1^2-x2^2")) is None
