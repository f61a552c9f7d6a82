"""Approach-rate probes and cone-image consistency."""

import numpy as np
import pytest

from germlens.directions import direction_set_estimate
from germlens.germs import germ_from_parametric, germ_from_sequence, germ_from_subspace
from germlens.lipschitz import linear_map
from germlens.ssp import (
    SSPConfig,
    _rays_from_sample,
    _refine_rays,
    ld_image_check,
    ssp_probe,
    wssp_probe,
)
from oracles import seq_worst_gap_ratio


def axis2():
    return germ_from_subspace([[1.0, 0.0]], 2, name="axis")


def cusp_germ():
    def curve(ts):
        ts = np.asarray(ts, float)
        return np.stack([ts**2, ts**3], axis=-1)

    return germ_from_parametric(curve, 2, name="cusp")


def seq_germ(q=4.0):
    def pf(ms):
        ms = np.asarray(ms, float)
        return np.stack([q**-ms, np.zeros_like(ms)], axis=-1)

    return germ_from_sequence(pf, 2, name=f"seq{q:g}")


# trimmed eps grid for speed; the delta ladder must still descend well
# below eps^2 so curved branches can be certified at the smallest eps
SMALL = SSPConfig(
    eps_grid=(1e-1, 1e-2, 1e-3),
    delta_grid=tuple(10.0**-k for k in range(1, 8)),
    n_rays=12,
    seed=3,
)


def test_axis_passes_both_probes():
    A = axis2()
    s = ssp_probe(A, cfg=SMALL)
    w = wssp_probe(A, cfg=SMALL)
    assert s.verdict == "pass" and w.verdict == "pass"
    assert s.mode == "strong" and w.mode == "weak"
    assert s.probes_total > 0
    assert all(p["verdict"] == "pass" for p in s.per_eps)
    assert "wssp_proxy" in w.flags and "wssp_proxy" not in s.flags


def test_sparse_sequence_fails_both_probes():
    # consecutive points at ratio 4 leave relative gaps of 3/5 on the ray,
    # far above every eps in the grid
    assert float(seq_worst_gap_ratio(4)) == pytest.approx(0.6)
    A = seq_germ(4.0)
    s = ssp_probe(A, cfg=SMALL)
    w = wssp_probe(A, cfg=SMALL)
    assert s.verdict == "fail" and w.verdict == "fail"
    failing = [p for p in s.per_eps if p["verdict"] == "fail"]
    assert failing
    worst = max(c["worst_ratio"] for p in failing for c in p["cells"])
    assert worst > 1.0


def test_cusp_passes_strong_probe():
    # regression guard: probe rays must follow the branch down to probe
    # scale, otherwise the angular error at estimation shells dominates
    s = ssp_probe(cusp_germ(), cfg=SMALL)
    assert s.verdict == "pass"


def test_ray_refinement_tightens_angles():
    A = cusp_germ()
    D = direction_set_estimate(A, seed=5)
    rays = _rays_from_sample(D, 12)
    refined = _refine_rays(A, rays, r_start=1e-2, r_final=1e-7, budget=400, seed=0)
    assert refined.shape == rays.shape
    assert np.allclose(np.linalg.norm(refined, axis=1), 1.0, atol=1e-9)
    ang = lambda V: np.arccos(np.clip(V[:, 0], -1, 1)).max()
    assert ang(refined) < ang(rays)
    assert ang(refined) < 1e-3


def test_refinement_keeps_rays_without_witnesses():
    A = axis2()  # exact oracle, no witness points
    rays = np.array([[1.0, 0.0], [-1.0, 0.0]])
    out = _refine_rays(A, rays, r_start=1e-2, r_final=1e-6, budget=100, seed=0)
    assert np.allclose(out, rays)


def test_probe_determinism():
    A = seq_germ(4.0)
    s1 = ssp_probe(A, cfg=SMALL)
    s2 = ssp_probe(A, cfg=SMALL)
    assert s1.verdict == s2.verdict
    assert s1.probes_total == s2.probes_total
    assert [c["worst_ratio"] for c in s1.cells] == [c["worst_ratio"] for c in s2.cells]


def test_ld_image_match_for_linear_map():
    h = linear_map(np.diag([1.0, 3.0]), name="stretch")
    rep = ld_image_check(h, cusp_germ(), {"seed": 1})
    assert rep.verdict == "match"
    assert rep.dim_image == rep.dim_cone_image
    assert rep.hausdorff <= rep.meta["tol"]


def test_ld_image_mismatch_for_coordinate_crush():
    # cubing the last coordinate fans the pinched surface out into a
    # double cone, while the surface's tangent cone (the vertical axis)
    # maps back onto itself: image directions outgrow the cone's image
    from germlens.fixtures import catalog

    fx = catalog()["pinch"]
    rep = ld_image_check(fx.maps["h"], fx.germs["V"], {"seed": 2})
    assert rep.verdict == "mismatch"
    assert rep.dim_image != rep.dim_cone_image
