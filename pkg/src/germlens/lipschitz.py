"""Lipschitz maps: constants, scalar extensions, cone and face extensions.

Conventions: a map h with constants (K1, K2) satisfies
K1*|x - y| <= |h(x) - h(y)| <= K2*|x - y|, so K1 is the contraction
floor (often < 1) and K2 the expansion ceiling. provenance records
whether constants come from a formula ("analytic") or from sampled
difference quotients ("estimated").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._rng import rng_for


@dataclass
class LipschitzMap:
    forward: Callable
    inverse: Optional[Callable]
    K1: Optional[float]
    K2: Optional[float]
    provenance: str  # analytic | estimated
    name: str = ""
    ambient_dim_in: int = 0
    ambient_dim_out: int = 0
    meta: dict = field(default_factory=dict)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Row-wise forward image; uses a batch call when the callable
        supports it, falls back to a loop otherwise."""
        pts = np.atleast_2d(np.asarray(pts, float))
        try:
            out = np.asarray(self.forward(pts), float)
            if out.shape == (len(pts), self.ambient_dim_out):
                return out
        except Exception:
            pass
        return np.array([np.asarray(self.forward(p), float) for p in pts])

    def apply_inverse(self, pts: np.ndarray) -> np.ndarray:
        if self.inverse is None:
            raise ValueError(f"{self.name}: no inverse available")
        pts = np.atleast_2d(np.asarray(pts, float))
        try:
            out = np.asarray(self.inverse(pts), float)
            if out.shape == (len(pts), self.ambient_dim_in):
                return out
        except Exception:
            pass
        return np.array([np.asarray(self.inverse(p), float) for p in pts])


def linear_map(M, name: str = "") -> LipschitzMap:
    """Invertible linear map with exact constants from singular values."""
    M = np.asarray(M, dtype=float)
    s = np.linalg.svd(M, compute_uv=False)
    if s.min() <= 0:
        raise ValueError("linear map must be invertible")
    Minv = np.linalg.inv(M)
    return LipschitzMap(
        forward=lambda x: np.asarray(x, float) @ M.T,
        inverse=lambda y: np.asarray(y, float) @ Minv.T,
        K1=float(s.min()),
        K2=float(s.max()),
        provenance="analytic",
        name=name or "linear",
        ambient_dim_in=M.shape[1],
        ambient_dim_out=M.shape[0],
        meta={"matrix": M, "definable_map": True},
    )


# ---------------------------------------------------------------------------
# constants from difference quotients


@dataclass
class ConstantsReport:
    k_lower: float  # smallest observed |h(x+e)-h(x)| / |e|
    k_upper: float  # largest observed ratio
    bins: list  # (r_lo, r_hi, min_ratio, max_ratio, count) fine -> coarse
    forward_unbounded: bool
    inverse_unbounded: bool
    pair_count: int
    seed: int


def constants_estimate(h, region=0.5, pair_count: int = 4000, seed: int = 0) -> ConstantsReport:
    """Sample difference quotients of h at log-uniform scales near 0.

    Base points get norms spread over six decades below the region
    radius, offsets spread from 1e-6 of the base norm up to half of it.
    A map whose quotients keep shrinking on the finest decade has an
    unbounded inverse near 0 (and mirrored for the forward direction);
    the 0.3 factor between the finest and coarsest decade extrema is the
    flag threshold.
    """
    if isinstance(region, dict):
        radius = float(region.get("radius", 0.5))
        dim = int(region.get("ambient_dim", getattr(h, "ambient_dim_in", 0)))
    else:
        radius = float(region)
        dim = int(getattr(h, "ambient_dim_in", 0))
    if dim <= 0:
        raise ValueError("ambient dimension unknown; pass region={'radius':..,'ambient_dim':..}")
    fwd = h.apply if isinstance(h, LipschitzMap) else (lambda P: np.array([np.asarray(h(p), float) for p in np.atleast_2d(P)]))

    rng = rng_for(seed, "lip-const")
    nx = 10.0 ** rng.uniform(np.log10(1e-6 * radius), np.log10(radius), size=pair_count)
    u = rng.normal(size=(pair_count, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    X = u * nx[:, None]
    ne = 10.0 ** rng.uniform(np.log10(1e-6) + np.log10(nx), np.log10(0.5) + np.log10(nx))
    v = rng.normal(size=(pair_count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    Y = X + v * ne[:, None]

    ratios = np.linalg.norm(fwd(Y) - fwd(X), axis=1) / ne

    edges = np.geomspace(1e-6 * radius, radius, 7)
    bins = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (nx >= lo) & (nx <= hi)
        if m.any():
            bins.append((float(lo), float(hi), float(ratios[m].min()), float(ratios[m].max()), int(m.sum())))
        else:
            bins.append((float(lo), float(hi), np.nan, np.nan, 0))
    fine, coarse = bins[0], bins[-1]
    inverse_unbounded = bool(np.isfinite(fine[2]) and np.isfinite(coarse[2]) and fine[2] < 0.3 * coarse[2])
    forward_unbounded = bool(np.isfinite(fine[3]) and np.isfinite(coarse[3]) and fine[3] * 0.3 > coarse[3])
    return ConstantsReport(
        k_lower=float(ratios.min()),
        k_upper=float(ratios.max()),
        bins=bins,
        forward_unbounded=forward_unbounded,
        inverse_unbounded=inverse_unbounded,
        pair_count=pair_count,
        seed=seed,
    )


def with_estimated_constants(h: LipschitzMap, region=0.5, pair_count: int = 4000, seed: int = 0) -> LipschitzMap:
    rep = constants_estimate(h, region=region, pair_count=pair_count, seed=seed)
    return LipschitzMap(
        forward=h.forward,
        inverse=h.inverse,
        K1=rep.k_lower,
        K2=rep.k_upper,
        provenance="estimated",
        name=h.name,
        ambient_dim_in=h.ambient_dim_in,
        ambient_dim_out=h.ambient_dim_out,
        meta={**h.meta, "constants_report": rep},
    )


# ---------------------------------------------------------------------------
# scalar extension by envelopes


def banach_extension(f, anchors, L: float, mode="inf"):
    """Extend scalar data on anchor points to all of space with the same
    Lipschitz constant.

    mode "inf" gives the upper envelope min_a f(a) + L|x-a| (the largest
    L-Lipschitz extension), "sup" the lower envelope max_a f(a) - L|x-a|,
    and a float t in [0,1] the convex mix t*upper + (1-t)*lower, which is
    again L-Lipschitz. Raises if the data itself violates L on the
    anchors, since no extension exists then.
    """
    anchors = np.atleast_2d(np.asarray(anchors, float))
    vals = np.asarray([float(f(a)) for a in anchors]) if callable(f) else np.asarray(f, float)
    if len(vals) != len(anchors):
        raise ValueError("one value per anchor required")
    L = float(L)
    D = cdist(anchors, anchors)
    gap = np.abs(vals[:, None] - vals[None, :]) - L * D
    tol = 1e-9 * max(1.0, float(np.abs(vals).max()), L * float(D.max() or 1.0))
    if gap.max() > tol:
        raise ValueError("anchor data is not L-Lipschitz; no extension with this constant exists")
    if mode == "inf":
        t = 1.0
    elif mode == "sup":
        t = 0.0
    else:
        t = float(mode)
        if not (0.0 <= t <= 1.0):
            raise ValueError("convex mode must lie in [0, 1]")

    def ext(x):
        X = np.atleast_2d(np.asarray(x, float))
        Dx = cdist(X, anchors)
        alpha = (vals[None, :] + L * Dx).min(axis=1)
        beta = (vals[None, :] - L * Dx).max(axis=1)
        out = t * alpha + (1.0 - t) * beta
        return float(out[0]) if np.asarray(x).ndim == 1 else out

    ext.anchors = anchors
    ext.values = vals
    ext.L = L
    ext.mix = t
    return ext


# ---------------------------------------------------------------------------
# cone extension


def cone_lift(points: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """(x, t) -> (t*x, t): the cone coordinates the extension lives on."""
    points = np.atleast_2d(np.asarray(points, float))
    ts = np.asarray(ts, float)
    return np.hstack([points * ts[:, None], ts[:, None]])

def cone_extension(h, domain_points, c: float | None = None, name: str = "") -> LipschitzMap:
    """Extend h, Lipschitz with constant c on a bounded set X, to the cone
    over X x {1} by homogeneous scaling: (t*x, t) -> (t*h(x), t), 0 -> 0.

    The returned constant sqrt(2) * (1 + c + M2 + c*M1), with M1 and M2
    the radii of X and h(X), bounds the extension on the whole cone; it
    is one workable explicit choice, not the sharpest.
    """
    X = np.atleast_2d(np.asarray(domain_points, float))
    fwd0 = h.apply if isinstance(h, LipschitzMap) else (lambda P: np.array([np.asarray(h(p), float) for p in np.atleast_2d(P)]))
    HX = fwd0(X)
    M1 = float(np.linalg.norm(X, axis=1).max())
    M2 = float(np.linalg.norm(HX, axis=1).max())
    provenance = "analytic"
    if c is None:
        provenance = "estimated"
        if len(X) <= 1500:
            dd = pdist(X)
            dh = pdist(HX)
            keep = dd > 0
            c = float((dh[keep] / dd[keep]).max())
        else:
            rng = rng_for(0, "cone-ext", name)
            i = rng.integers(0, len(X), size=20000)
            j = rng.integers(0, len(X), size=20000)
            keep = i != j
            num = np.linalg.norm(HX[i[keep]] - HX[j[keep]], axis=1)
            den = np.linalg.norm(X[i[keep]] - X[j[keep]], axis=1)
            c = float((num / den).max())
    c = float(c)
    c_prime = float(np.sqrt(2.0) * (1.0 + c + M2 + c * M1))
    m_out = HX.shape[1]
    h_fn = (lambda p: h.apply(p[None, :])[0]) if isinstance(h, LipschitzMap) else (lambda p: np.asarray(h(p), float))

    def fwd(z):
        z = np.asarray(z, float)
        t = float(z[-1])
        if t <= 0.0:
            return np.zeros(m_out + 1)
        x = z[:-1] / t
        return np.append(t * h_fn(x), t)

    return LipschitzMap(
        forward=fwd,
        inverse=None,
        K1=None,
        K2=c_prime,
        provenance=provenance,
        name=name or "cone-extension",
        ambient_dim_in=X.shape[1] + 1,
        ambient_dim_out=m_out + 1,
        meta={"c": c, "M1": M1, "M2": M2},
    )


# ---------------------------------------------------------------------------
# extension from a face of a simplex


def simplicial_extension(h, vertices, sub_idx):
    """Extend h, defined on the face spanned by vertices[sub_idx], to the
    whole simplex: write x in barycentric coordinates, renormalize the
    face block to a face point p and weight s, and return s * h(p)
    (0 when the face block vanishes)."""
    V = np.atleast_2d(np.asarray(vertices, float))
    sub = np.asarray(sub_idx, int)
    k1 = len(V)
    A = np.vstack([V.T, np.ones((1, k1))])  # solve V^T t = x, sum t = 1

    def bary(x):
        b = np.append(np.asarray(x, float), 1.0)
        t, res, _, _ = np.linalg.lstsq(A, b, rcond=None)
        recon = A @ t - b
        if np.linalg.norm(recon) > 1e-8 * max(1.0, np.linalg.norm(b)):
            raise ValueError("point is not in the affine span of the simplex")
        return t

    probe = np.asarray(h(V[sub[0]]), float)
    m = probe.shape[0] if probe.ndim else 1

    def ext(x):
        t = bary(x)
        s = float(t[sub].sum())
        if s <= 1e-15:
            return np.zeros(m)
        p = (t[sub] / s) @ V[sub]
        return s * np.asarray(h(p), float)

    ext.bary = bary
    ext.vertices = V
    ext.sub_idx = sub
    return ext
