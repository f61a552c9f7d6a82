"""Fixture catalog: named germs, maps and ground truth shared by the
test-suite and the CLI.

Each fixture bundles the germs of one scenario with the maps that act on
them and with the values we can certify independently. ground_truth
entries carry a provenance tag: "analytic" for closed-form facts,
"measured" for constants read off from controlled sampling, and
"documented" for statements recorded here without a derivation the
toolkit could re-run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .germs import (
    GermSet,
    apply_map_germ,
    full_space_germ,
    geometric_schedule,
    germ_from_parametric,
    germ_from_ray,
    germ_from_sequence,
    germ_from_subspace,
    log_schedule,
    union_germ,
)
from .lipschitz import LipschitzMap, linear_map


@dataclass
class Fixture:
    name: str
    germs: dict
    maps: dict = field(default_factory=dict)
    ground_truth: dict = field(default_factory=dict)
    hypothesis_flags: dict = field(default_factory=dict)
    ssp_targets: tuple = ()
    notes: str = ""


# ---------------------------------------------------------------------------
# linear and radial maps


def rot2(deg: float, name: str = "") -> LipschitzMap:
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return linear_map([[c, -s], [s, c]], name or f"rot2-{deg:g}")


def rot3z(deg: float, name: str = "") -> LipschitzMap:
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return linear_map([[c, -s, 0], [s, c, 0], [0, 0, 1]], name or f"rot3z-{deg:g}")


def rot3x(deg: float, name: str = "") -> LipschitzMap:
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return linear_map([[1, 0, 0], [0, c, -s], [0, s, c]], name or f"rot3x-{deg:g}")


def radial_map(n: int, region: float = 0.5, name: str = "") -> LipschitzMap:
    """x -> x * (1 + |x|), a definable non-linear bi-Lipschitz map.

    On the ball of the given radius the derivative norms sit in
    [1, 1 + 2*region]; the lower bound 1 holds globally because the map
    is the gradient of a convex radial potential.
    """

    def fwd(p):
        p = np.asarray(p, float)
        if p.ndim == 1:
            return p * (1.0 + np.linalg.norm(p))
        return p * (1.0 + np.linalg.norm(p, axis=1, keepdims=True))

    def inv(q):
        q = np.asarray(q, float)
        if q.ndim == 1:
            R = np.linalg.norm(q)
            if R == 0.0:
                return q.copy()
            r = 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * R))
            return q * (r / R)
        R = np.linalg.norm(q, axis=1, keepdims=True)
        r = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * R))
        return q * np.where(R > 0, r / np.maximum(R, 1e-300), 0.0)

    return LipschitzMap(
        forward=fwd,
        inverse=inv,
        K1=1.0,
        K2=1.0 + 2.0 * region,
        provenance="analytic",
        name=name or f"radial{n}",
        ambient_dim_in=n,
        ambient_dim_out=n,
        meta={"definable_map": True, "region": region},
    )


def osc_shear_map() -> LipschitzMap:
    """(x, y) -> (x, y + x*sin(ln|x|)): bi-Lipschitz but with an image of
    the x-axis that spirals through every slope in [-1, 1].

    The Jacobian is unit lower-triangular with off-diagonal entry
    sin(ln|x|) + cos(ln|x|), bounded by sqrt(2); the singular values of
    such a matrix stay in [ (sqrt6 - sqrt2)/2, (sqrt6 + sqrt2)/2 ].
    """

    def _shift(q, sign):
        q = np.asarray(q, float)
        single = q.ndim == 1
        q = np.atleast_2d(q).copy()
        x = q[:, 0]
        safe = np.where(x == 0.0, 1.0, np.abs(x))
        q[:, 1] += sign * np.where(x == 0.0, 0.0, x * np.sin(np.log(safe)))
        return q[0] if single else q

    k_hi = 0.5 * (math.sqrt(6.0) + math.sqrt(2.0))
    return LipschitzMap(
        forward=lambda p: _shift(p, +1.0),
        inverse=lambda p: _shift(p, -1.0),
        K1=1.0 / k_hi,
        K2=k_hi,
        provenance="analytic",
        name="osc-shear",
        ambient_dim_in=2,
        ambient_dim_out=2,
        meta={"definable_map": False},
    )


def crush_z_map() -> LipschitzMap:
    """(x, y, z) -> (x, y, z^3): definable homeomorphism, not bi-Lipschitz
    (the inverse cube root has an unbounded difference quotient at 0)."""

    def fwd(p):
        p = np.asarray(p, float)
        single = p.ndim == 1
        q = np.atleast_2d(p).copy()
        q[:, 2] = q[:, 2] ** 3
        return q[0] if single else q

    def inv(p):
        p = np.asarray(p, float)
        single = p.ndim == 1
        q = np.atleast_2d(p).copy()
        q[:, 2] = np.cbrt(q[:, 2])
        return q[0] if single else q

    return LipschitzMap(
        forward=fwd,
        inverse=inv,
        K1=None,
        K2=None,
        provenance="analytic",
        name="crush-z",
        ambient_dim_in=3,
        ambient_dim_out=3,
        meta={"definable_map": True, "not_bilipschitz": True},
    )


def _seq_correspondence(pts_a, pts_b) -> LipschitzMap:
    """Index-matched correspondence between two point sequences, realized
    as the vertical projection (x, y) -> (0, y). Constants are estimated
    over all pairs of the first 300 indices and only certify the
    restriction to the sequences, not the ambient projection."""
    ms = np.arange(1, 301)
    A, B = pts_a(ms), pts_b(ms)
    ratio = pdist(B) / pdist(A)

    def fwd(p):
        p = np.asarray(p, float)
        single = p.ndim == 1
        q = np.atleast_2d(p).copy()
        q[:, 0] = 0.0
        return q[0] if single else q

    return LipschitzMap(
        forward=fwd,
        inverse=None,
        K1=float(ratio.min()),
        K2=float(ratio.max()),
        provenance="estimated",
        name="seq-match",
        ambient_dim_in=2,
        ambient_dim_out=2,
        meta={"definable_map": True, "restricted_to": "sequence points"},
    )


# ---------------------------------------------------------------------------
# surfaces of revolution: the double cone and the cusp-profile surface


def _cone_dist_batch(P):
    """Exact distance to {x^2 + y^2 = z^2}: planar distance to the two
    generator rays in the (rho, z) half-plane."""
    P = np.atleast_2d(np.asarray(P, float))
    rho = np.hypot(P[:, 0], P[:, 1])
    w = P[:, 2]
    inv = 1.0 / math.sqrt(2.0)
    best = np.full(len(P), np.inf)
    for b in (1.0, -1.0):
        t = np.clip((rho + b * w) * inv, 0.0, None)
        best = np.minimum(best, np.hypot(rho - t * inv, w - b * t * inv))
    return best


def cone_surface_germ(name: str = "cone-z") -> GermSet:
    def oracle(x):
        return float(_cone_dist_batch(np.asarray(x, float)[None, :])[0])

    def member(x, tol=1e-10):
        x = np.asarray(x, float)
        return oracle(x) <= tol * max(np.linalg.norm(x), 1e-300)

    def sampler(r, count, seed):
        from ._rng import rng_for

        rng = rng_for(seed, "cone-rev", name)
        s = rng.uniform(r / 2.0, r, size=count)
        t = s / math.sqrt(2.0)
        phi = rng.uniform(0.0, 2.0 * np.pi, size=count)
        sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
        return np.stack([t * np.cos(phi), t * np.sin(phi), sign * t], axis=1)

    return GermSet(
        ambient_dim=3,
        kind="semialgebraic",
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=_cone_dist_batch,
        name=name,
        schedule=geometric_schedule(),
        meta={"definable": True, "local_dim": 2},
    )


def _vrev_dist_batch(P, chunk: int = 4096):
    """Distance to {x^2 + y^2 = z^6}: minimize over the profile (t^3, t),
    t >= 0, after folding into the (rho, |z|) half-plane. A 65-point grid
    brackets the minimizer and guarded Newton steps on the quintic
    stationarity equation polish it to machine accuracy."""
    P = np.atleast_2d(np.asarray(P, float))
    out = np.empty(len(P))
    for s0 in range(0, len(P), chunk):
        X = P[s0 : s0 + chunk]
        rho = np.hypot(X[:, 0], X[:, 1])
        z = np.abs(X[:, 2])
        T = 1.5 * np.maximum(np.maximum(z, np.cbrt(rho)), 1e-300)
        ts = T[:, None] * np.linspace(0.0, 1.0, 65)[None, :]
        f = (rho[:, None] - ts**3) ** 2 + (z[:, None] - ts) ** 2
        k = np.argmin(f, axis=1)
        rows = np.arange(len(X))
        t, fb = ts[rows, k], f[rows, k]
        for _ in range(8):
            g = 3.0 * t**5 - 3.0 * rho * t**2 + t - z
            gp = 15.0 * t**4 - 6.0 * rho * t + 1.0
            step = g / np.where(np.abs(gp) < 1e-300, 1.0, gp)
            t1 = np.clip(t - step, 0.0, 2.0 * T)
            f1 = (rho - t1**3) ** 2 + (z - t1) ** 2
            keep = f1 < fb
            t, fb = np.where(keep, t1, t), np.where(keep, f1, fb)
        out[s0 : s0 + chunk] = np.sqrt(np.clip(fb, 0.0, None))
    return out


def vrev_surface_germ(name: str = "V") -> GermSet:
    """{x^2 + y^2 = z^6}: a surface whose horizontal sections shrink like
    |z|^3, so its directions collapse onto the two poles."""

    def _t_for(s):
        # invert t*sqrt(1 + t^4) = s; the norm is increasing and >= t
        lo = np.zeros_like(s)
        hi = np.maximum(s, 1e-12)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = mid * np.sqrt(1.0 + mid**4) < s
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def sampler(r, count, seed):
        from ._rng import rng_for

        rng = rng_for(seed, "v-rev", name)
        s = rng.uniform(r / 2.0, r, size=count)
        t = _t_for(s)
        phi = rng.uniform(0.0, 2.0 * np.pi, size=count)
        sign = np.where(rng.random(count) < 0.5, 1.0, -1.0)
        rho = t**3
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), sign * t], axis=1)

    def oracle(x):
        return float(_vrev_dist_batch(np.asarray(x, float)[None, :])[0])

    def member(x, tol=1e-10):
        x = np.asarray(x, float)
        return oracle(x) <= tol * max(np.linalg.norm(x), 1e-300)

    return GermSet(
        ambient_dim=3,
        kind="semialgebraic",
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=_vrev_dist_batch,
        name=name,
        schedule=geometric_schedule(),
        meta={"definable": True, "local_dim": 2},
    )


# ---------------------------------------------------------------------------
# curve and sequence germs


def cusp_germ(name: str = "cusp") -> GermSet:
    """{y^2 = x^3, x >= 0}: union of the two parametric branches
    (t^2, +-t^3). Mirroring one branch through the origin would leave the
    curve, so the union is built from two one-sided parametrizations."""
    up = germ_from_parametric(
        lambda ts: np.stack([np.asarray(ts, float) ** 2, np.asarray(ts, float) ** 3], axis=-1),
        ambient_dim=2,
        name="cusp-up",
        meta={"definable": True, "local_dim": 1},
    )
    dn = germ_from_parametric(
        lambda ts: np.stack([np.asarray(ts, float) ** 2, -np.asarray(ts, float) ** 3], axis=-1),
        ambient_dim=2,
        name="cusp-down",
        meta={"definable": True, "local_dim": 1},
    )
    return union_germ([up, dn], name=name)


def cubic_graph_germ(name: str = "graph-cubic") -> GermSet:
    return germ_from_parametric(
        lambda ts: np.stack([np.asarray(ts, float), np.asarray(ts, float) ** 3], axis=-1),
        ambient_dim=2,
        name=name,
        both_signs=True,
        meta={"definable": True, "local_dim": 1},
    )


def osc_graph_germ(name: str = "osc-graph") -> GermSet:
    """Graph of y = x*sin(ln x) for x > 0, mirrored through the origin.
    Every slope in [-1, 1] recurs on every scale, so the direction set is
    a pair of antipodal arcs even though the germ is a curve."""

    def curve(ts):
        ts = np.asarray(ts, float)
        return np.stack([ts, ts * np.sin(np.log(np.maximum(ts, 1e-300)))], axis=-1)

    return germ_from_parametric(
        curve,
        ambient_dim=2,
        name=name,
        t_hi=0.5,
        both_signs=True,
        meta={"definable": False, "local_dim": 1},
    )


def flat_curve_germ(name: str = "flat-curve") -> GermSet:
    """X -> (X*exp(-1/X^2), exp(-1/X^2)): approaches the vertical axis
    slower than any power, so no monomial gauge can match it. The shell
    schedule runs far below desk scales because the interesting behavior
    only shows up logarithmically."""

    def curve(ts):
        ts = np.asarray(ts, float)
        w = np.exp(-1.0 / np.maximum(ts, 1e-300) ** 2)
        return np.stack([ts * w, w], axis=-1)

    return germ_from_parametric(
        curve,
        ambient_dim=2,
        name=name,
        t_hi=0.7,
        schedule=log_schedule(1e-4, 1e-200, 12),
        meta={"definable": True, "local_dim": 1},
    )


def _pts_4k(ms):
    ms = np.atleast_1d(np.asarray(ms, dtype=np.float64))
    x = np.power(4.0, -ms)
    return np.stack([x, np.zeros_like(x)], axis=-1)


def seq_4k_germ(name: str = "seq-4k") -> GermSet:
    """Points 4^-m on the positive x-axis. Consecutive norms drop by a
    fixed factor, so the worst relative gap along the limit ray is 3/5 on
    every scale; approach-rate probes must fail scale-free."""
    return germ_from_sequence(
        _pts_4k,
        ambient_dim=2,
        name=name,
        schedule=geometric_schedule(0.1, 0.25, 12),
        meta={"definable": False},
    )


_EM_CUM = np.cumsum(1.0 / np.array([float(math.factorial(i)) for i in range(1, 171)]))


def _em_sum(ms):
    idx = np.minimum(np.asarray(ms, dtype=np.int64), 170) - 1
    return _EM_CUM[idx]


def _pts_em_a(ms):
    ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
    s = _em_sum(ms)
    m = ms.astype(float)
    return np.stack([1.0 / m, s / m], axis=-1)


def _pts_em_b(ms):
    ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
    s = _em_sum(ms)
    m = ms.astype(float)
    return np.stack([np.zeros_like(m), s / m], axis=-1)


def seq_em_a_germ(name: str = "seq-em-a") -> GermSet:
    return germ_from_sequence(_pts_em_a, ambient_dim=2, name=name, meta={"definable": False})


def seq_em_b_germ(name: str = "seq-em-b") -> GermSet:
    return germ_from_sequence(_pts_em_b, ambient_dim=2, name=name, meta={"definable": False})


# ---------------------------------------------------------------------------
# map packs


def standard_maps_2d() -> dict:
    return {
        "identity2": linear_map(np.eye(2), "identity2"),
        "rot2-10": rot2(10.0),
        "rot2-30": rot2(30.0),
        "rot2-45": rot2(45.0),
        "shear2": linear_map([[1.0, 0.5], [0.0, 1.0]], "shear2"),
        "diag2": linear_map([[2.0, 0.0], [0.0, 0.5]], "diag2"),
        "radial2": radial_map(2),
    }


def standard_maps_3d() -> dict:
    return {
        "identity3": linear_map(np.eye(3), "identity3"),
        "rot3z-20": rot3z(20.0),
        "rot3x-20": rot3x(20.0),
        "shear3": linear_map([[1.0, 0.0, 0.3], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "shear3"),
        "diag3": linear_map(np.diag([1.0, 2.0, 3.0]), "diag3"),
        "diag3b": linear_map(np.diag([2.0, 1.0, 1.0]), "diag3b"),
        "radial3": radial_map(3),
    }


# ---------------------------------------------------------------------------
# the catalog


def catalog() -> dict:
    """Fresh fixture set, rebuilt on every call so callers may mutate."""
    fx = {}

    line_x2 = germ_from_subspace([[1.0, 0.0]], 2, "line-x2")
    line_y2 = germ_from_subspace([[0.0, 1.0]], 2, "line-y2")
    diag2 = germ_from_subspace([[1.0, 1.0]], 2, "line-diag2")
    ray_x2 = germ_from_ray([1.0, 0.0], "ray-x2")
    ray_y2 = germ_from_ray([0.0, 1.0], "ray-y2")
    full2 = full_space_germ(2, "full-plane")
    graph_cubic = cubic_graph_germ()

    fx["lines2d"] = Fixture(
        name="lines2d",
        germs={
            "x-axis": line_x2,
            "y-axis": line_y2,
            "diag": diag2,
            "ray-x": ray_x2,
            "graph-cubic": graph_cubic,
            "full": full2,
        },
        maps=standard_maps_2d(),
        ground_truth={
            "direction_dims": {
                "value": {"x-axis": 0, "y-axis": 0, "diag": 0, "ray-x": 0, "graph-cubic": 0, "full": 1},
                "provenance": "analytic",
            },
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": True, "image-definable": True},
        ssp_targets=("x-axis", "diag"),
        notes="planar linear stock used by the transversal-intersection and sandwich suites",
    )

    line_x3 = germ_from_subspace([[1.0, 0.0, 0.0]], 3, "line-x3")
    line_y3 = germ_from_subspace([[0.0, 1.0, 0.0]], 3, "line-y3")
    axis_z = germ_from_subspace([[0.0, 0.0, 1.0]], 3, "axis-z")
    plane_z0 = germ_from_subspace([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3, "plane-z0")

    fx["lines3d"] = Fixture(
        name="lines3d",
        germs={"x-axis": line_x3, "y-axis": line_y3, "z-axis": axis_z, "plane": plane_z0},
        maps=standard_maps_3d(),
        ground_truth={
            "direction_dims": {
                "value": {"x-axis": 0, "y-axis": 0, "z-axis": 0, "plane": 1},
                "provenance": "analytic",
            },
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": True, "image-definable": True},
        ssp_targets=("plane",),
        notes="spatial linear stock",
    )

    cone = cone_surface_germ()
    fx["cone"] = Fixture(
        name="cone",
        germs={"cone": cone, "z-axis": germ_from_subspace([[0.0, 0.0, 1.0]], 3, "axis-z"), "plane": germ_from_subspace([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 3, "plane-z0")},
        maps={"identity3": linear_map(np.eye(3), "identity3"), "rot3z-20": rot3z(20.0)},
        ground_truth={
            "direction_dims": {"value": {"cone": 1, "z-axis": 0, "plane": 1}, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": True, "image-definable": True},
        ssp_targets=("cone",),
        notes="self-similar double cone; exact two-ray profile distance",
    )

    v = vrev_surface_germ()
    hv = apply_map_germ(
        crush_z_map(),
        v,
        name="image-V",
        distance_oracle=lambda x: float(_cone_dist_batch(np.asarray(x, float)[None, :])[0]),
        distance_oracle_batch=_cone_dist_batch,
        membership=lambda y, tol=1e-10: float(_cone_dist_batch(np.asarray(y, float)[None, :])[0])
        <= tol * max(np.linalg.norm(y), 1e-300),
        meta={"local_dim": 2},
    )
    fx["pinch"] = Fixture(
        name="pinch",
        germs={"V": v, "image": hv, "z-axis": germ_from_subspace([[0.0, 0.0, 1.0]], 3, "axis-z")},
        maps={"h": crush_z_map()},
        ground_truth={
            "dim_directions_V": {"value": 0, "provenance": "analytic"},
            "cluster_count_V": {"value": 2, "provenance": "analytic"},
            "dim_directions_image": {"value": 1, "provenance": "analytic"},
            "gauge_alpha_V_vs_axis": {"value": 2.0, "tolerance": 0.15, "provenance": "analytic"},
            "bi_lipschitz_possible": {"value": False, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": False, "image-definable": True},
        ssp_targets=("V",),
        notes=(
            "crushing the last coordinate turns the pinched surface into the double cone; "
            "the directional dimension jumps 0 -> 1, which certifies no bi-Lipschitz map does this"
        ),
    )

    cusp = cusp_germ()
    fx["cusp"] = Fixture(
        name="cusp",
        germs={"cusp": cusp, "x-axis": germ_from_subspace([[1.0, 0.0]], 2, "line-x2"), "ray-x": germ_from_ray([1.0, 0.0], "ray-x2")},
        maps={"identity2": linear_map(np.eye(2), "identity2")},
        ground_truth={
            "gauge_alpha_vs_axis": {"value": 0.5, "tolerance": 0.1, "provenance": "analytic"},
            "direction_dims": {"value": {"cusp": 0, "x-axis": 0}, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": True, "image-definable": True},
        ssp_targets=("cusp",),
        notes="half-power distance to the tangent axis; gauge exponent 1/2",
    )

    osc = osc_graph_germ()
    fx["osc"] = Fixture(
        name="osc",
        germs={"A": germ_from_subspace([[1.0, 0.0]], 2, "line-x2"), "image": osc},
        maps={"h": osc_shear_map()},
        ground_truth={
            "dim_directions_A": {"value": 0, "provenance": "analytic"},
            "dim_directions_image": {"value": 1, "provenance": "analytic"},
            "map_constant_bound": {"value": 1.0 + math.sqrt(2.0), "provenance": "documented"},
        },
        hypothesis_flags={"definable": True, "bi-Lipschitz": True, "image-definable": False},
        ssp_targets=("image",),
        notes=(
            "a bi-Lipschitz shear whose image of the x-axis oscillates through every slope; "
            "the invariant fails here exactly because the image stops being tame"
        ),
    )

    fx["seq-em"] = Fixture(
        name="seq-em",
        germs={"seq-a": seq_em_a_germ(), "seq-b": seq_em_b_germ()},
        maps={"corr": _seq_correspondence(_pts_em_a, _pts_em_b)},
        ground_truth={
            "direction_dims": {"value": {"seq-a": 0, "seq-b": 0}, "provenance": "analytic"},
            "limit_slope_a": {"value": math.e - 1.0, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": False, "bi-Lipschitz": True, "image-definable": False},
        ssp_targets=("seq-a",),
        notes=(
            "index-matched sequences (1/m, s_m/m) and (0, s_m/m) with s_m the partial sums of 1/i!; "
            "whether the two germs can be identified depends on arithmetic facts outside numerics, "
            "recorded here as documented context only"
        ),
    )

    fx["flat"] = Fixture(
        name="flat",
        germs={"A": flat_curve_germ(), "limit-ray": ray_y2},
        maps={},
        ground_truth={
            "monomial_gauge_exists": {"value": False, "provenance": "analytic"},
            "dim_directions_A": {"value": 0, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": True},
        ssp_targets=("A",),
        notes=(
            "flatter than every power: the log-log slope of the gauge data sinks to 0 like "
            "1/(2*ln(1/r)), so a monomial fit must be rejected; shells run to 1e-200"
        ),
    )

    fx["seq-4k"] = Fixture(
        name="seq-4k",
        germs={"A": seq_4k_germ(), "ray-x": germ_from_ray([1.0, 0.0], "ray-x2")},
        maps={},
        ground_truth={
            "worst_gap_ratio": {"value": 0.6, "provenance": "analytic"},
            "approach_rate_vanishes": {"value": False, "provenance": "analytic"},
        },
        hypothesis_flags={"definable": False},
        ssp_targets=("A",),
        notes="geometric sequence with ratio 4; the relative gap along the ray never shrinks",
    )

    return fx
