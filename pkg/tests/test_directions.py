"""Direction clouds: dimension estimates, cones, intersections, invariance."""

import numpy as np
import pytest

from germlens.directions import (
    DirectionSample,
    dimension_estimate,
    direction_intersection_dim,
    direction_set_estimate,
    germ_local_dim,
    intersection_from_samples,
    tangent_cone,
)
from germlens.germs import (
    germ_from_parametric,
    germ_from_sequence,
    germ_from_subspace,
    full_space_germ,
)
from oracles import direction_dim_of_subspace_pair, mapped_basis


def axis_germ(n=2):
    return germ_from_subspace([[1.0] + [0.0] * (n - 1)], n, name="axis")


def cusp_germ():
    def curve(ts):
        ts = np.asarray(ts, float)
        return np.stack([ts**2, ts**3], axis=-1)

    return germ_from_parametric(curve, 2, name="cusp")


def test_axis_directions_two_antipodal_clusters():
    D = direction_set_estimate(axis_germ(), seed=1)
    assert D.dim_estimate == 0
    assert D.dim_confidence >= 0.8
    # exactly the two antipodal limit directions
    fine = D.estimate_points()
    assert len(np.unique(np.sign(fine[:, 0]))) == 2
    assert np.allclose(np.abs(fine[:, 0]), 1.0, atol=1e-9)
    labels = D.clusters[D.meta.get("estimate_mask", slice(None))]
    assert len(np.unique(labels)) >= 2


def test_plane_directions_are_a_circle():
    P = germ_from_subspace([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3, name="plane")
    D = direction_set_estimate(P, seed=2)
    assert D.dim_estimate == 1
    assert D.dim_confidence >= 0.8
    fine = D.estimate_points()
    assert np.allclose(fine[:, 2], 0.0, atol=1e-9)


def test_full_space_directions_fill_the_sphere():
    D = direction_set_estimate(full_space_germ(3), seed=3)
    assert D.dim_estimate == 2


def test_cusp_has_one_limit_direction():
    D = direction_set_estimate(cusp_germ(), seed=4)
    assert D.dim_estimate == 0
    fine = D.estimate_points()
    # the branch flattens onto +e1
    assert np.all(fine[:, 0] > 0.99)


def test_sequence_directions_dim_zero():
    def pf(ms):
        ms = np.asarray(ms, float)
        return np.stack([2.0**-ms, np.zeros_like(ms)], axis=-1)

    D = direction_set_estimate(germ_from_sequence(pf, 2), seed=5)
    assert D.dim_estimate == 0


def test_dimension_estimate_needs_points():
    with pytest.raises(ValueError):
        dimension_estimate(np.eye(3)[:2])


def test_tiny_radii_do_not_underflow():
    sched = np.array([1e-160, 5e-161, 2.5e-161])
    D = direction_set_estimate(axis_germ(), schedule=sched, per_shell_count=100, seed=6)
    assert D.dim_estimate == 0
    assert np.all(np.isfinite(D.points))


def test_tangent_cone_of_axis_is_the_axis():
    A = axis_germ()
    D = direction_set_estimate(A, seed=7)
    C = tangent_cone(D, name="axis-cone")
    dirs = C.meta["cone_dirs"]
    assert len(dirs) == 2
    assert np.allclose(np.abs(dirs[:, 0]), 1.0, atol=1e-9)
    # exact oracle: distance from (0, b) to the x-axis cone is |b|
    assert C.distance_oracle(np.array([0.3, 0.4])) == pytest.approx(0.4)
    pts = C.sampler(0.01, 50, seed=0)
    assert np.allclose(C.distance_oracle_batch(pts), 0.0, atol=1e-12)


def test_tangent_cone_sector_interpolates():
    P = germ_from_subspace([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3)
    D = direction_set_estimate(P, seed=8)
    C = tangent_cone(D)
    assert len(C.meta["cone_pairs"]) > 0
    pts = C.sampler(0.05, 100, seed=1)
    # samples stay inside the fan and inside the plane
    assert np.max(C.distance_oracle_batch(pts)) <= 1e-9
    assert np.max(np.abs(pts[:, 2])) <= 1e-9
    x = np.array([0.1, 0.1, 0.2])
    d = C.distance_oracle(x)
    assert d == pytest.approx(0.2, abs=1e-3)


def test_subspace_pair_intersections_match_rank_oracle():
    cases = [
        ([[1, 0, 0, 0], [0, 1, 0, 0]], [[1, 0, 0, 0], [0, 0, 1, 0]]),  # share a line
        ([[1, 0, 0, 0]], [[0, 1, 0, 0]]),  # disjoint directions
        ([[1, 0, 0, 0], [0, 1, 0, 0]], [[1, 0, 0, 0], [0, 1, 0, 0]]),  # equal planes
    ]
    rng = np.random.default_rng(11)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    for ba, bb in cases:
        want = direction_dim_of_subspace_pair(ba, bb)
        A = germ_from_subspace(ba, 4)
        B = germ_from_subspace(bb, 4)
        got = direction_intersection_dim(A, B, {"seed": 3})
        assert got == want
        # the same configuration rotated off the coordinate axes
        A2 = germ_from_subspace(mapped_basis(Q, ba), 4)
        B2 = germ_from_subspace(mapped_basis(Q, bb), 4)
        assert direction_intersection_dim(A2, B2, {"seed": 3}) == want


def test_intersection_empty_is_minus_one():
    DA = direction_set_estimate(axis_germ(), seed=9)
    B = germ_from_subspace([[0.0, 1.0]], 2)
    DB = direction_set_estimate(B, seed=10)
    dim, conf, cloud = intersection_from_samples(DA, DB)
    assert dim == -1 and conf == 1.0 and len(cloud) == 0


def test_intersection_of_cloud_with_itself():
    D = direction_set_estimate(cusp_germ(), seed=12)
    dim, conf, cloud = intersection_from_samples(D, D)
    assert dim == 0 and len(cloud) > 0


def test_germ_local_dim():
    assert germ_local_dim(axis_germ()) == 1
    P = germ_from_subspace([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3)
    assert germ_local_dim(P) == 2

    def pf(ms):
        ms = np.asarray(ms, float)
        return np.stack([2.0**-ms, np.zeros_like(ms)], axis=-1)

    assert germ_local_dim(germ_from_sequence(pf, 2)) == 0


def test_direction_sample_estimate_mask():
    D = direction_set_estimate(axis_germ(), seed=13)
    mask = D.meta.get("estimate_mask")
    assert mask is not None
    # estimate shells are the finest ones that produced points
    est_radii = D.source_radii[mask]
    assert est_radii.max() <= D.source_radii.min() * 4.0
