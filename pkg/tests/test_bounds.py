"""Closed-form tail bounds: frozen spot values, shapes, degeneracies."""

import math

import numpy as np
import pytest

from multislice.bounds import (
    REGISTRY,
    bounded_difference,
    convex_lipschitz,
    convex_lipschitz_median,
    eigenvalue_tail,
    evaluate_bound,
    kolmogorov_tail,
    mean_median_gap,
    multilinear_tail,
    serfling,
    serfling_original,
    swor_bounded_difference,
    swor_convex_distance,
    swor_convex_lipschitz,
    triangle_tail,
    triangle_tail_relative,
)
from multislice.tensor_norms import Partition


def test_bounded_difference_spot_values():
    assert bounded_difference(0.0, 4, 2.0) == 1.0
    assert bounded_difference(1.0, 4, 2.0) == pytest.approx(math.exp(-0.5))
    # constant statistic: all switch increments zero
    assert bounded_difference(0.5, 4, 0.0) == 0.0
    assert bounded_difference(0.0, 4, 0.0) == 1.0


def test_convex_lipschitz_spot_value():
    assert convex_lipschitz(2.0, 1.0) == pytest.approx(math.exp(-0.25))
    assert convex_lipschitz(0.0, 3.0) == 1.0


def test_swor_bounded_difference_spot_value():
    # n=5 of N=20, coordinate increments 1/5 each: sum of squares 1/5
    val = swor_bounded_difference(0.2, 5, 20, 0.2)
    assert val == pytest.approx(math.exp(-0.04 / (4 * 0.75 * 0.2)))


def test_serfling_spot_values():
    assert serfling(0.1, 5, 20, 1.0) == pytest.approx(math.exp(-5 * 0.01 / (4 * 0.75)))
    assert serfling_original(0.1, 5, 20, 1.0) == pytest.approx(
        math.exp(-2 * 5 * 0.01 / (1.0 - 4 / 20))
    )


def test_kolmogorov_spot_value_and_degenerate():
    assert kolmogorov_tail(1.0, 5, 20) == pytest.approx(2 * math.exp(-1 / 3))
    assert kolmogorov_tail(0.0, 20, 20) == 2.0
    assert kolmogorov_tail(0.5, 20, 20) == 0.0


def test_median_family_spot_values():
    assert convex_lipschitz_median(6.0, 1.0, 1.0) == pytest.approx(4 * math.exp(-0.25))
    assert eigenvalue_tail(12.0, 2.0) == pytest.approx(4 * math.exp(-0.25))
    assert swor_convex_distance(2.0, 5, 20) == pytest.approx(math.e * math.exp(-1 / 3))
    assert swor_convex_lipschitz(2.0, 5, 20, 2.0, 1.0) == pytest.approx(
        2 * math.e * math.exp(-4.0 / 48.0)
    )


def test_mean_median_gap_limit():
    # vanishing sampling fraction with unit Lipschitz norm and unit spread
    val = mean_median_gap(1, 10**9, 1.0, 1.0)
    assert val == pytest.approx(2 * math.e * math.sqrt(4 * math.pi), rel=1e-6)
    assert val == pytest.approx(19.2721, abs=2e-4)
    assert mean_median_gap(20, 20, 1.0, 1.0) == 0.0


def test_multilinear_tail_quadratic_shape():
    # degree-2 centered form: Hilbert-Schmidt and operator branches
    hs, op, diam, t = 2.0, 0.5, 1.5, 3.0
    norms = {Partition.single(2): hs, Partition.singletons(2): op}
    want = 2 * math.exp(-min(t**2 / (diam**4 * hs**2), t / (diam**2 * op)))
    assert multilinear_tail(t, norms, diam) == pytest.approx(want)
    # zero norms are skipped, an all-zero map is rejected
    norms[Partition.single(1)] = 0.0
    assert multilinear_tail(t, norms, diam) == pytest.approx(want)
    with pytest.raises(ValueError):
        multilinear_tail(t, {Partition.single(1): 0.0}, diam)


def test_triangle_tails():
    n, p = 10, 0.3
    var_scale = n**3 + p**2 * n**3 + p**4 * n**4
    t = 5.0
    want = 2 * math.exp(-min(t**2 / var_scale, t / (math.sqrt(n) + p * n), t ** (2 / 3)))
    assert triangle_tail(t, n, p) == pytest.approx(want)
    assert triangle_tail(0.0, n, p) == 2.0
    eps = 0.25
    want_rel = 2 * math.exp(
        -min(eps**2 * n**3 * p**6, min(eps**2, eps ** (2 / 3)) * n**2 * p**2)
    )
    assert triangle_tail_relative(eps, n, p) == pytest.approx(want_rel)
    # halving the constant halves the exponent
    assert triangle_tail(t, n, p, c=0.5) == pytest.approx(
        2 * math.exp(-0.5 * min(t**2 / var_scale, t / (math.sqrt(n) + p * n), t ** (2 / 3)))
    )


def test_vectorized_and_monotone():
    ts = np.linspace(0.0, 3.0, 25)
    for bound_id, info in REGISTRY.items():
        params = {
            "total": 20,
            "n": 5,
            "diam": 1.0,
            "sum_c_sq": 0.2,
            "lipschitz": 1.0,
            "n_vertices": 10,
            "edge_prob": 0.3,
            "norms": {Partition.singletons(2): 1.0},
        }
        params = {k: v for k, v in params.items() if k in info.params}
        vals = evaluate_bound(bound_id, params, ts)
        assert vals.shape == ts.shape
        assert np.all(np.diff(vals) <= 1e-15), bound_id
        assert vals[0] == pytest.approx(info.prefactor), bound_id
        assert np.all(vals <= info.prefactor + 1e-15)


def test_validation_errors():
    with pytest.raises(ValueError):
        serfling(-0.1, 5, 20, 1.0)
    with pytest.raises(ValueError):
        serfling(0.1, 0, 20, 1.0)
    with pytest.raises(ValueError):
        serfling(0.1, 21, 20, 1.0)
    with pytest.raises(ValueError):
        convex_lipschitz(1.0, 0.0)
    with pytest.raises(ValueError):
        triangle_tail(1.0, 2, 0.5)
    with pytest.raises(ValueError):
        triangle_tail(1.0, 10, 1.5)
    with pytest.raises(KeyError):
        evaluate_bound("no-such-bound", {}, 1.0)
    with pytest.raises(ValueError):
        evaluate_bound("serfling", {"n": 5, "total": 20}, 1.0)
    with pytest.raises(ValueError):
        evaluate_bound("serfling", {"n": 5, "total": 20, "diam": 1.0, "bogus": 1}, 1.0)


def test_registry_sidedness_and_flags():
    assert REGISTRY["serfling"].sided == "upper"
    assert REGISTRY["kolmogorov"].sided == "two"
    assert REGISTRY["kolmogorov"].prefactor == 2.0
    assert REGISTRY["triangles"].qualitative
    assert not REGISTRY["serfling"].qualitative
    # default constant c = 1 is injected when omitted
    v1 = evaluate_bound("triangles", {"n_vertices": 10, "edge_prob": 0.3}, 2.0)
    v2 = triangle_tail(2.0, 10, 0.3, c=1.0)
    assert v1 == pytest.approx(v2)
