"""Thickening membership, inclusion verdicts, gauge fits, equivalence."""

from fractions import Fraction

import numpy as np
import pytest

from germlens.gauges import MonomialGauge, TabulatedGauge, gauge_eval
from germlens.seatangle import (
    _grid_gauge,
    gauge_fit,
    sandwich_gauges,
    st_contains,
    st_equivalence_search,
    st_inclusion_test,
)
from germlens.germs import (
    germ_from_parametric,
    germ_from_ray,
    germ_from_subspace,
    union_germ,
)
from oracles import xaxis_st_member_exact


def axis2():
    return germ_from_subspace([[1.0, 0.0]], 2, name="axis")


def cusp_germ():
    def curve(ts):
        ts = np.asarray(ts, float)
        return np.stack([ts**2, ts**3], axis=-1)

    return germ_from_parametric(curve, 2, name="cusp")


def test_st_contains_matches_exact_rational_membership():
    A = axis2()
    C, alpha = Fraction(1), 1
    theta = MonomialGauge(float(C), float(alpha), t_max=200.0)
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(300):
        x = Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 40)))
        y = Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 40)))
        if x == 0 and y == 0:
            continue
        want = xaxis_st_member_exact(x, y, C, alpha)
        got = st_contains(np.array([float(x), float(y)]), A, theta)
        if got is None:
            # only allowed when the float threshold is genuinely grazed
            nx = float(np.hypot(float(x), float(y)))
            assert abs(abs(float(y)) - nx * nx) <= 3e-6 * nx * nx
            continue
        assert got == want
        checked += 1
    assert checked >= 250


def test_st_contains_origin_and_band():
    A = axis2()
    theta = MonomialGauge(1.0, 1.0)
    assert st_contains(np.zeros(2), A, theta) is True
    # a point whose distance equals the threshold |x|^2 falls in the band
    nx, y = 0.2, 0.04
    x = np.array([np.sqrt(nx**2 - y**2), y])
    assert abs(y - np.linalg.norm(x) ** 2) < 1e-12
    assert st_contains(x, A, theta) is None


def test_inclusion_cusp_in_axis_thickening():
    v = st_inclusion_test(cusp_germ(), axis2(), MonomialGauge(2.0, 0.4), seed=1)
    assert v.relation == "included"
    assert v.witness_gauges and isinstance(v.witness_gauges[0], MonomialGauge)
    assert all(row["out"] == 0 for row in v.shells_checked if row["n"])


def test_inclusion_refuted_with_counterexamples():
    # the negative half-axis stays at relative distance 1 from the branch,
    # but a certified refutation needs exact distances: use the mirrored
    # ray against a narrow thickening of the positive ray
    pos, neg = germ_from_ray([1.0, 0.0]), germ_from_ray([-1.0, 0.0])
    v = st_inclusion_test(neg, pos, MonomialGauge(1.0, 0.5), seed=2)
    assert v.relation == "not-included"
    assert v.counterexamples
    ce = v.counterexamples[0]
    assert ce["dist_lower"] > ce["threshold"]


def test_inclusion_abstains_without_lower_bounds():
    # distances to the branch are upper bounds only, so far-away points
    # cannot be certified outside and the verdict abstains
    v = st_inclusion_test(axis2(), cusp_germ(), MonomialGauge(0.5, 1.0), seed=3, per_shell=40)
    assert v.relation == "abstained"
    assert v.meta["indet_frac"] > 0.05


def test_gauge_fit_cusp_exponent():
    fit = gauge_fit(cusp_germ(), axis2(), seed=4)
    assert fit.status == "fitted"
    assert fit.alpha == pytest.approx(0.5, abs=0.1)
    assert not fit.counterexamples
    # fitted gauge dominates every measured relative gap
    nn, gg = fit.meta["points_norm"], fit.meta["points_g"]
    assert np.all(gg <= fit.C * nn**fit.alpha * (1 + 1e-6))


def test_gauge_fit_zero_distance():
    A = axis2()
    fit = gauge_fit(A, A, seed=5)
    assert fit.status == "zero-distance"
    assert isinstance(fit.gauge, MonomialGauge)


def test_gauge_fit_flat_gap_has_no_witness():
    tilted = germ_from_subspace([[1.0, 0.1]], 2, name="tilted")
    fit = gauge_fit(tilted, axis2(), seed=6)
    assert fit.status == "no-monomial-gauge"
    assert fit.alpha <= 0.02
    assert fit.gauge is None


def test_equivalence_of_identical_sets():
    A = axis2()
    B = union_germ([germ_from_ray([1.0, 0.0]), germ_from_ray([-1.0, 0.0])], name="two-rays")
    v = st_equivalence_search(A, B, seed=7)
    assert v.relation == "equivalent"
    assert len(v.witness_gauges) == 2


def test_equivalence_refuted_by_flat_direction():
    v = st_equivalence_search(germ_from_subspace([[1.0, 0.1]], 2), axis2(), seed=8)
    assert v.relation == "not-equivalent"
    assert v.meta["reason"] == "relative gap does not decay"


def test_equivalence_rejects_unknown_family():
    with pytest.raises(ValueError):
        st_equivalence_search(axis2(), axis2(), gauge_family="dyadic")


def test_grid_gauge_dominates_measurements():
    rng = np.random.default_rng(9)
    nn = rng.uniform(1e-4, 0.2, size=200)
    gg = 0.7 * nn**0.8 * rng.uniform(0.2, 1.0, size=200)
    g = _grid_gauge(nn, gg)
    assert np.all(gg <= np.asarray(gauge_eval(g, nn)) * (1 + 1e-9))


def test_sandwich_wraps_non_monomial_gauges():
    theta = TabulatedGauge([0.25, 0.5, 1.0], [0.1, 0.3, 0.9])
    out, inn = sandwich_gauges(theta, 0.5, 2.0)
    t = 0.2
    assert out(t) == pytest.approx(4.0 * theta(t / 0.5))
    assert inn(t) == pytest.approx(0.25 * theta(t / 2.0))
    with pytest.raises(ValueError):
        sandwich_gauges(theta, 2.0, 0.5)
