"""Catalog contract: samplers, oracles, maps, and recorded ground truth."""

import math

import numpy as np
import pytest

from germlens.directions import direction_set_estimate
from germlens.fixtures import (
    _cone_dist_batch,
    _pts_em_a,
    _pts_em_b,
    _vrev_dist_batch,
    catalog,
    crush_z_map,
    osc_shear_map,
    radial_map,
    standard_maps_2d,
    standard_maps_3d,
)
from germlens.germs import nearest_with_distance
from germlens.seatangle import gauge_fit
import oracles
from oracles import brute_min_dist, em_partial_slope, seq_worst_gap_ratio

CATALOG_KEYS = {
    "lines2d",
    "lines3d",
    "cone",
    "pinch",
    "cusp",
    "osc",
    "seq-em",
    "flat",
    "seq-4k",
}


def test_catalog_keys_and_targets():
    fx = catalog()
    assert set(fx.keys()) == CATALOG_KEYS
    for f in fx.values():
        assert f.germs, f.name
        for target in f.ssp_targets:
            assert target in f.germs, (f.name, target)


@pytest.mark.parametrize("key", sorted(CATALOG_KEYS))
def test_fixture_samplers_and_membership(key):
    fx = catalog()[key]
    for gname, g in fx.germs.items():
        pts, rad = g.sample_shells(per_shell=6, seed=1)
        nn = oracles.stable_norms(pts)
        assert np.all(nn <= rad * (1 + 1e-9)), (key, gname)
        assert np.all(nn >= rad / 2 * (1 - 1e-9)), (key, gname)
        for p in pts[:: max(1, len(pts) // 8)]:
            assert g.membership(p), (key, gname, p)
        if g.distance_oracle is not None and g.distance_oracle_batch is not None:
            sub = pts[:5]
            batch = g.distance_oracle_batch(sub)
            single = [g.distance_oracle(p) for p in sub]
            assert np.allclose(batch, single, rtol=1e-9, atol=1e-300), (key, gname)


@pytest.mark.parametrize("key", sorted(CATALOG_KEYS))
def test_fixture_maps_roundtrip_and_constants(key):
    rng = np.random.default_rng(3)
    fx = catalog()[key]
    for mname, h in fx.maps.items():
        n = h.ambient_dim_in
        X = rng.uniform(-0.2, 0.2, size=(200, n))
        Y = h.apply(X)
        assert Y.shape == (200, h.ambient_dim_out)
        if h.inverse is not None:
            assert np.allclose(h.apply_inverse(Y), X, atol=1e-9), (key, mname)
        if h.K1 and h.K2 and not h.meta.get("restricted_to"):
            U = rng.uniform(-0.2, 0.2, size=(200, n))
            d0 = np.linalg.norm(X - U, axis=1)
            d1 = np.linalg.norm(Y - h.apply(U), axis=1)
            q = d1 / d0
            assert np.all(q <= h.K2 * (1 + 1e-9)), (key, mname)
            assert np.all(q >= h.K1 * (1 - 1e-9)), (key, mname)


def test_ground_truth_direction_dims():
    fx = catalog()
    for key in ("lines2d", "lines3d", "cone"):
        truth = fx[key].ground_truth["direction_dims"]["value"]
        for gname, want in truth.items():
            D = direction_set_estimate(fx[key].germs[gname], per_shell_count=150, seed=5)
            assert D.dim_estimate == want, (key, gname)
            assert D.dim_confidence >= 0.8, (key, gname)


def test_pinch_dims_and_gauge_exponent():
    fx = catalog()["pinch"]
    DV = direction_set_estimate(fx.germs["V"], seed=6)
    assert DV.dim_estimate == fx.ground_truth["dim_directions_V"]["value"]
    labels = DV.clusters[DV.meta["estimate_mask"]]
    assert len(np.unique(labels)) == fx.ground_truth["cluster_count_V"]["value"]
    DI = direction_set_estimate(fx.germs["image"], seed=6)
    assert DI.dim_estimate == fx.ground_truth["dim_directions_image"]["value"]

    gt = fx.ground_truth["gauge_alpha_V_vs_axis"]
    fit = gauge_fit(fx.germs["V"], fx.germs["z-axis"], seed=6)
    assert fit.status == "fitted"
    assert abs(fit.alpha - gt["value"]) <= gt["tolerance"]


def test_cusp_gauge_exponent():
    fx = catalog()["cusp"]
    gt = fx.ground_truth["gauge_alpha_vs_axis"]
    fit = gauge_fit(fx.germs["cusp"], fx.germs["x-axis"], seed=7)
    assert fit.status == "fitted"
    assert abs(fit.alpha - gt["value"]) <= gt["tolerance"]


def test_cone_oracle_against_brute_force():
    # closed-form check: the apex-on point (0,0,1) sits sqrt(2)/2 away
    assert _cone_dist_batch(np.array([[0.0, 0.0, 1.0]]))[0] == pytest.approx(np.sqrt(0.5))
    ts = np.linspace(0, 0.4, 2001)
    phis = np.linspace(0, 2 * np.pi, 181)
    T, PHI = np.meshgrid(ts, phis)
    surf = np.stack(
        [(T / np.sqrt(2)) * np.cos(PHI), (T / np.sqrt(2)) * np.sin(PHI), T / np.sqrt(2)], axis=-1
    ).reshape(-1, 3)
    surf = np.vstack([surf, surf * np.array([1, 1, -1.0])])
    rng = np.random.default_rng(8)
    for x in rng.uniform(-0.2, 0.2, size=(10, 3)):
        want = brute_min_dist(x, surf)
        got = _cone_dist_batch(x[None, :])[0]
        assert got <= want + 1e-12
        assert got >= want - 2e-4  # grid resolution slack


def test_vrev_oracle_against_brute_force():
    ts = np.linspace(0, 0.7, 4001)
    phis = np.linspace(0, 2 * np.pi, 181)
    T, PHI = np.meshgrid(ts, phis)
    surf = np.stack([T**3 * np.cos(PHI), T**3 * np.sin(PHI), T], axis=-1).reshape(-1, 3)
    surf = np.vstack([surf, surf * np.array([1, 1, -1.0])])
    rng = np.random.default_rng(9)
    for x in rng.uniform(-0.3, 0.3, size=(10, 3)):
        want = brute_min_dist(x, surf)
        got = _vrev_dist_batch(x[None, :])[0]
        assert got <= want + 1e-12
        assert got >= want - 5e-4


def test_pinch_image_is_the_cone():
    fx = catalog()["pinch"]
    V, img, h = fx.germs["V"], fx.germs["image"], fx.maps["h"]
    pts = V.sampler(0.05, 40, seed=2)
    mapped = h.apply(pts)
    assert np.max(_cone_dist_batch(mapped)) <= 1e-9
    ipts = img.sampler(0.05, 40, seed=2)
    assert np.max(_cone_dist_batch(ipts)) <= 1e-9


def test_seq_em_limit_slope():
    # partial factorial sums approach e - 1; the exact slopes are rational
    assert float(em_partial_slope(20)) == pytest.approx(math.e - 1.0, abs=1e-15)
    p = _pts_em_a(np.array([40]))[0]
    assert p[1] / p[0] == pytest.approx(math.e - 1.0, abs=1e-12)
    q = _pts_em_b(np.array([40]))[0]
    assert q[0] == 0.0


def test_seq_correspondence_matches_indices():
    fx = catalog()["seq-em"]
    corr = fx.maps["corr"]
    ms = np.arange(1, 30)
    assert np.allclose(corr.apply(_pts_em_a(ms)), _pts_em_b(ms), atol=1e-15)
    assert corr.K1 is not None and corr.K1 <= corr.K2


def test_seq4k_worst_gap_matches_closed_form():
    fx = catalog()["seq-4k"]
    want = fx.ground_truth["worst_gap_ratio"]["value"]
    assert float(seq_worst_gap_ratio(4)) == pytest.approx(want)
    A = fx.germs["A"]
    m = 6
    mid = 0.5 * (4.0**-m + 4.0 ** -(m + 1))
    _, d = nearest_with_distance(np.array([mid, 0.0]), A)
    assert d / mid == pytest.approx(want, rel=1e-9)


def test_map_pack_contents():
    m2, m3 = standard_maps_2d(), standard_maps_3d()
    assert {"identity2", "rot2-10", "rot2-30", "rot2-45", "shear2", "diag2", "radial2"} <= set(m2)
    assert {"identity3", "rot3z-20", "rot3x-20", "shear3", "diag3", "diag3b", "radial3"} <= set(m3)
    osc = osc_shear_map()
    assert osc.K2 == pytest.approx((math.sqrt(6) + math.sqrt(2)) / 2)
    assert osc.K1 == pytest.approx(1.0 / osc.K2)
    crush = crush_z_map()
    assert crush.meta["not_bilipschitz"]
    r = radial_map(3)
    x = np.array([0.1, -0.2, 0.05])
    assert np.allclose(r.apply_inverse(r.apply(x[None]))[0], x, atol=1e-12)
