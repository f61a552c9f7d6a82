"""Direction sets of germs at 0.

The direction cloud of a germ is the set of normalized sample points
x/|x| gathered over a shrinking shell schedule. Near 0 these accumulate
on the germ's limit directions, so the cloud on the finest shells is the
working estimate of the direction set. On top of the cloud this module
builds: eta-linkage clustering, an integer dimension estimate with a
two-scale confidence, a sector-fan cone germ spanned by the cloud, and
the dimension of the intersection of two direction sets (the quantity
preserved by bi-Lipschitz images of definable germs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from ._rng import rng_for
from .germs import MEMBERSHIP_TOL, EmptyGermError, GermSet, _mix, geometric_schedule

UNIT_TOL = 1e-12
ETA = 0.05  # chord-distance linkage scale on the unit sphere
MIN_DIM_POINTS = 50


@dataclass
class DirectionSample:
    """Estimated direction set: unit vectors tagged with source shells."""

    ambient_dim: int
    points: np.ndarray  # (N, n) unit vectors
    source_radii: np.ndarray  # (N,) radius of the shell each point came from
    clusters: np.ndarray  # (N,) eta-linkage labels
    dim_estimate: int
    dim_confidence: float
    meta: dict = field(default_factory=dict)

    def estimate_points(self):
        mask = self.meta.get("estimate_mask")
        return self.points if mask is None else self.points[mask]


def _link_labels(points: np.ndarray, scale: float) -> np.ndarray:
    """Single-linkage labels: points closer than scale share a label."""
    n = len(points)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n > 1:
        pairs = cKDTree(points).query_pairs(scale, output_type="ndarray")
        for i, j in pairs:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[ri] = rj
    labels = np.fromiter((find(i) for i in range(n)), dtype=np.int64, count=n)
    _, labels = np.unique(labels, return_inverse=True)
    return labels


def _cluster_diameters(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    out = []
    for lab in np.unique(labels):
        P = points[labels == lab]
        if len(P) < 2:
            out.append(0.0)
        elif len(P) > 400:
            # bounding-box diagonal: an upper bound is what the dim-0 test needs
            out.append(float(np.linalg.norm(P.max(axis=0) - P.min(axis=0))))
        else:
            out.append(float(pdist(P).max()))
    return np.array(out)


def _pca_votes(points: np.ndarray, scale: float, cap: int, max_anchors: int = 64) -> np.ndarray:
    """Local PCA rank at spread anchors; the neighborhood radius adapts to
    the 9th-nearest-neighbor distance so sparse sampling does not read as
    dimension 0."""
    N, n = points.shape
    tree = cKDTree(points)
    anchors = np.unique(np.linspace(0, N - 1, min(max_anchors, N)).astype(int))
    votes = []
    for i in anchors:
        k = min(10, N)
        dd, _ = tree.query(points[i], k=k)
        s_eff = max(scale, float(np.atleast_1d(dd)[-1]))
        nb = tree.query_ball_point(points[i], s_eff)
        P = points[nb]
        if len(P) < 4:
            votes.append(0)
            continue
        C = P - P.mean(axis=0)
        lam = np.linalg.eigvalsh(C.T @ C / len(P))
        rank = int(np.sum(lam >= (0.25 * s_eff) ** 2))
        votes.append(min(rank, cap))
    return np.array(votes)


def _dim_at_scale(points: np.ndarray, radii, scale: float, cap: int) -> int:
    labels = _link_labels(points, scale)
    diam_ok = bool(np.all(_cluster_diameters(points, labels) <= 0.5 * scale))
    counts_ok = True
    if radii is not None:
        uniq = np.unique(radii)
        if len(uniq) >= 2:
            fine = uniq[np.argsort(uniq)][:2]
            counts = []
            for r in fine:
                P = points[np.isclose(radii, r)]
                counts.append(len(np.unique(_link_labels(P, scale))) if len(P) else 0)
            counts_ok = counts[0] == counts[1] and counts[0] > 0
    if diam_ok and counts_ok:
        return 0
    votes = _pca_votes(points, scale, cap)
    return int(np.median(votes))


def dimension_estimate(D, eta: float = ETA) -> tuple:
    """Integer dimension of a direction cloud with a coarse confidence.

    Accepts a DirectionSample (uses its estimate shells) or a plain array
    of unit vectors. Votes at linkage scales eta and eta/2; agreement
    gives confidence 1.0, disagreement 0.5 with the eta-scale answer.
    Needs at least 50 points.
    """
    if isinstance(D, DirectionSample):
        mask = D.meta.get("estimate_mask")
        points = D.points if mask is None else D.points[mask]
        radii = D.source_radii if mask is None else D.source_radii[mask]
    else:
        points = np.atleast_2d(np.asarray(D, float))
        radii = None
    if len(points) < MIN_DIM_POINTS:
        raise ValueError(f"dimension_estimate needs >= {MIN_DIM_POINTS} points, got {len(points)}")
    cap = points.shape[1] - 1  # direction clouds live on the unit sphere
    d1 = _dim_at_scale(points, radii, eta, cap)
    d2 = _dim_at_scale(points, radii, eta / 2.0, cap)
    return (d1, 1.0 if d1 == d2 else 0.5)


def direction_set_estimate(
    A: GermSet,
    schedule=None,
    per_shell_count: int = 200,
    seed: int = 0,
    eta: float = ETA,
) -> DirectionSample:
    """Sample the germ on shrinking shells and normalize to the sphere.

    The dimension estimate is computed from the two finest shells that
    produced points; coarser shells stay in the cloud for plots and for
    probing how directions drift with the radius.
    """
    sched = np.asarray(A.schedule if schedule is None else schedule, float)
    pts, rad, empty = [], [], []
    for j, r in enumerate(np.sort(sched)[::-1]):
        try:
            p = np.atleast_2d(A.sampler(float(r), per_shell_count, _mix(seed, j)))
        except EmptyGermError:
            empty.append(float(r))
            continue
        if len(p) == 0:
            empty.append(float(r))
            continue
        pts.append(p)
        rad.append(np.full(len(p), float(r)))
    if len(pts) < 2:
        raise EmptyGermError(f"{A.name or 'germ'}: fewer than two shells produced points")
    X = np.vstack(pts)
    radii = np.concatenate(rad)
    # prescale by the largest coordinate so squaring cannot underflow for
    # germs sampled at radii far below sqrt(float-min)
    m = np.max(np.abs(X), axis=1)
    if np.any(m == 0):
        raise ValueError("sampler returned the origin itself")
    U = X / m[:, None]
    U = U / np.linalg.norm(U, axis=1)[:, None]
    err = np.abs(np.linalg.norm(U, axis=1) - 1.0)
    if err.max() > UNIT_TOL:
        raise AssertionError("normalization failed unit-norm tolerance")
    fine = np.sort(np.unique(radii))[:2]
    mask = np.isin(radii, fine)
    clusters = _link_labels(U, eta)
    sample = DirectionSample(
        ambient_dim=A.ambient_dim,
        points=U,
        source_radii=radii,
        clusters=clusters,
        dim_estimate=-2,
        dim_confidence=0.0,
        meta={"estimate_mask": mask, "empty_shells": empty, "germ": A.name, "eta": eta},
    )
    try:
        dim, conf = dimension_estimate(sample, eta=eta)
    except ValueError:
        # sparse cloud (discrete germs): fall back to the cluster-diameter test
        est = U[mask]
        diam_ok = bool(np.all(_cluster_diameters(est, _link_labels(est, eta)) <= 0.5 * eta))
        dim, conf = (0, 0.25) if diam_ok else (0, 0.0)
    sample.dim_estimate = dim
    sample.dim_confidence = conf
    return sample


# ---------------------------------------------------------------------------
# cone germ spanned by a direction cloud


def _subsample_by_cluster(points, labels, max_total):
    if len(points) <= max_total:
        return points
    out = []
    uniq, counts = np.unique(labels, return_counts=True)
    for lab, cnt in zip(uniq, counts):
        k = max(1, int(round(max_total * cnt / len(points))))
        idx = np.where(labels == lab)[0]
        out.append(points[idx[np.unique(np.linspace(0, len(idx) - 1, k).astype(int))]])
    return np.vstack(out)


def tangent_cone(D: DirectionSample, eta: float | None = None, max_dirs: int = 256, name: str = "") -> GermSet:
    """Cone germ {t*u : u in D, t >= 0} as a sector fan.

    Representative directions are linked to their nearest neighbors; each
    linked pair spans an exact planar sector, lone directions stay rays.
    The distance oracle is exact for the fan, the sampler interpolates
    only inside stored sectors, so every sample passes the oracle.
    """
    eta = D.meta.get("eta", ETA) if eta is None else eta
    pts = D.estimate_points()
    labels = _link_labels(pts, eta)
    dirs = _subsample_by_cluster(pts, labels, max_dirs)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    # repeated samples of a finite direction set collapse to one ray each
    _, uniq = np.unique(np.round(dirs, 9), axis=0, return_index=True)
    dirs = dirs[np.sort(uniq)]
    m, n = dirs.shape

    pair_set = set()
    if m > 1:
        tree = cKDTree(dirs)
        k = min(3, m)
        dd, jj = tree.query(dirs, k=k)
        for i in range(m):
            for d_, j in zip(np.atleast_1d(dd[i])[1:], np.atleast_1d(jj[i])[1:]):
                if d_ <= eta and i != j:
                    pair_set.add((min(i, int(j)), max(i, int(j))))
    pairs = np.array(sorted(pair_set), dtype=int).reshape(-1, 2)

    # precompute sector frames: e1 = a, e2 = unit part of b orthogonal to a
    if len(pairs):
        A_ = dirs[pairs[:, 0]]
        B_ = dirs[pairs[:, 1]]
        dots = np.sum(A_ * B_, axis=1)
        Bp = B_ - dots[:, None] * A_
        ss = np.linalg.norm(Bp, axis=1)
        keep = ss > 1e-12
        pairs, A_, Bp, ss, dots = pairs[keep], A_[keep], Bp[keep], ss[keep], dots[keep]
        E2 = Bp / ss[:, None]
        PHI = np.arctan2(ss, dots)
    else:
        A_ = np.zeros((0, n))
        E2 = np.zeros((0, n))
        PHI = np.zeros(0)

    def oracle_batch(P, chunk=2048):
        P = np.atleast_2d(np.asarray(P, float))
        out = np.empty(len(P))
        for s in range(0, len(P), chunk):
            X = P[s : s + chunk]
            nx2 = np.sum(X**2, axis=1)
            T = np.clip(X @ dirs.T, 0.0, None)
            best2 = (nx2[:, None] - T**2).min(axis=1)
            if len(PHI):
                P1 = X @ A_.T
                P2 = X @ E2.T
                psi = np.arctan2(P2, P1)
                inside = (psi >= 0.0) & (psi <= PHI[None, :])
                d2 = np.where(inside, nx2[:, None] - P1**2 - P2**2, np.inf)
                best2 = np.minimum(best2, d2.min(axis=1))
            out[s : s + chunk] = np.sqrt(np.clip(best2, 0.0, None))
        return out

    def oracle(x):
        return float(oracle_batch(np.asarray(x, float)[None, :])[0])

    lone = np.setdiff1d(np.arange(m), np.unique(pairs)) if len(pairs) else np.arange(m)
    elems = [(i, i) for i in lone] + [tuple(p) for p in pairs]

    def sampler(r, count, seed):
        rng = rng_for(seed, "cone", name)
        t = rng.uniform(r / 2.0, r, size=count)
        pick = rng.integers(0, len(elems), size=count)
        u = rng.random(count)
        out = np.empty((count, n))
        for idx in range(count):
            i, j = elems[pick[idx]]
            if i == j:
                d = dirs[i]
            else:
                a, b = dirs[i], dirs[j]
                cosw = float(np.clip(a @ b, -1.0, 1.0))
                w = np.arccos(cosw)
                if w < 1e-8:
                    d = a + u[idx] * (b - a)
                    d = d / np.linalg.norm(d)
                else:
                    d = (np.sin((1 - u[idx]) * w) * a + np.sin(u[idx] * w) * b) / np.sin(w)
            out[idx] = t[idx] * d
        return out

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        return oracle(x) <= tol * max(np.linalg.norm(x), 1e-300)

    return GermSet(
        ambient_dim=n,
        kind="cone",
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=oracle_batch,
        name=name or f"cone-{D.meta.get('germ', '')}",
        schedule=geometric_schedule(),
        meta={
            "cone": True,
            "cone_dirs": dirs,
            "cone_pairs": pairs,
            "dim_directions": D.dim_estimate,
            "local_dim": (D.dim_estimate + 1) if D.dim_estimate >= 0 else 0,
        },
    )


# ---------------------------------------------------------------------------
# intersections


def intersection_from_samples(DA: DirectionSample, DB: DirectionSample, eta: float = ETA, match_tol=None):
    """(dim, confidence, matched cloud) for D(A) and D(B).

    A direction of one cloud counts as shared when it sits within
    match_tol (default eta) of the other cloud. Empty means -1.
    """
    tol = eta if match_tol is None else match_tol
    ta, tb = cKDTree(DA.points), cKDTree(DB.points)
    da, _ = tb.query(DA.points, k=1)
    db, _ = ta.query(DB.points, k=1)
    ma, mb = da <= tol, db <= tol
    fine_a = DA.meta.get("estimate_mask", np.ones(len(DA.points), bool))
    fine_b = DB.meta.get("estimate_mask", np.ones(len(DB.points), bool))
    cloud = np.vstack([DA.points[ma & fine_a], DB.points[mb & fine_b]])
    radii = np.concatenate([DA.source_radii[ma & fine_a], DB.source_radii[mb & fine_b]])
    if len(cloud) == 0:
        return -1, 1.0, cloud
    if len(cloud) < MIN_DIM_POINTS:
        # a nonempty but sparse match: isolated shared directions
        return 0, 0.5, cloud
    sample = DirectionSample(
        ambient_dim=cloud.shape[1],
        points=cloud,
        source_radii=radii,
        clusters=_link_labels(cloud, eta),
        dim_estimate=-2,
        dim_confidence=0.0,
        meta={},
    )
    dim, conf = dimension_estimate(sample, eta=eta)
    return dim, conf, cloud


def direction_intersection_dim(A: GermSet, B: GermSet, params: dict | None = None) -> int:
    """Dimension of D(A) & D(B); -1 when the intersection is empty."""
    p = dict(params or {})
    per_shell = int(p.get("per_shell_count", 200))
    seed = int(p.get("seed", 0))
    eta = float(p.get("eta", ETA))
    tol = p.get("match_tol")
    DA = direction_set_estimate(A, per_shell_count=per_shell, seed=_mix(seed, 11), eta=eta)
    DB = direction_set_estimate(B, per_shell_count=per_shell, seed=_mix(seed, 23), eta=eta)
    dim, _, _ = intersection_from_samples(DA, DB, eta=eta, match_tol=tol)
    return int(dim)


@dataclass
class InvariantReport:
    lhs_dim: int  # dim of D(A) & D(B)
    rhs_dim: int  # dim of D(hA) & D(hB)
    equal: bool
    lhs_conf: float
    rhs_conf: float
    hypothesis_flags: dict
    meta: dict = field(default_factory=dict)


def invariant_check(h, A: GermSet, B: GermSet | None = None, params: dict | None = None) -> InvariantReport:
    """Compare dim(D(A) & D(B)) against the same quantity for the images.

    The equality is the bi-Lipschitz invariant this toolkit is built
    around; it is only guaranteed when both germs and both images are
    tame and the map is bi-Lipschitz, so the report carries those
    hypothesis flags next to the measured dimensions. Violations with a
    failed hypothesis are expected behavior, not estimator bugs.

    params may carry precomputed image germs (image_A, image_B) when the
    caller knows an exact representation of h(A); otherwise images are
    sampled through the map.
    """
    from .germs import apply_map_germ  # local import to avoid a cycle at module load

    p = dict(params or {})
    B = A if B is None else B
    per_shell = int(p.get("per_shell_count", 200))
    seed = int(p.get("seed", 0))
    eta = float(p.get("eta", ETA))
    tol = p.get("match_tol")

    imA = p.get("image_A") or apply_map_germ(h, A, name=f"im-{A.name}")
    imB = p.get("image_B") or (imA if B is A else apply_map_germ(h, B, name=f"im-{B.name}"))

    DA = direction_set_estimate(A, per_shell_count=per_shell, seed=_mix(seed, 11), eta=eta)
    DB = DA if B is A else direction_set_estimate(B, per_shell_count=per_shell, seed=_mix(seed, 23), eta=eta)
    DiA = direction_set_estimate(imA, per_shell_count=per_shell, seed=_mix(seed, 37), eta=eta)
    DiB = DiA if imB is imA else direction_set_estimate(imB, per_shell_count=per_shell, seed=_mix(seed, 53), eta=eta)

    lhs, lconf, _ = intersection_from_samples(DA, DB, eta=eta, match_tol=tol)
    rhs, rconf, _ = intersection_from_samples(DiA, DiB, eta=eta, match_tol=tol)

    bilip = bool(getattr(h, "K1", None) and getattr(h, "K2", None))
    if getattr(h, "meta", None) and h.meta.get("not_bilipschitz"):
        bilip = False
    flags = {
        "definable": bool(A.meta.get("definable")) and bool(B.meta.get("definable")),
        "bi-Lipschitz": bilip,
        "image-definable": bool(imA.meta.get("definable")) and bool(imB.meta.get("definable")),
    }
    if "hypothesis_flags" in p:
        flags.update(p["hypothesis_flags"])
    return InvariantReport(
        lhs_dim=int(lhs),
        rhs_dim=int(rhs),
        equal=bool(int(lhs) == int(rhs)),
        lhs_conf=float(lconf),
        rhs_conf=float(rconf),
        hypothesis_flags=flags,
        meta={"map": getattr(h, "name", ""), "germ_a": A.name, "germ_b": B.name},
    )


def germ_local_dim(A: GermSet, per_shell_count: int = 200, seed: int = 0, eta: float = ETA) -> int:
    """Local dimension of the germ itself near 0 (not of its directions).

    Each of the two finest shells is rescaled to unit size and local PCA
    ranks are voted; the shell-wise median is maxed over the two shells.
    For reasonable germs the direction-set dimension is at most this.
    """
    sched = np.sort(np.asarray(A.schedule, float))
    votes = []
    for j, r in enumerate(sched[:2]):
        try:
            p = np.atleast_2d(A.sampler(float(r), per_shell_count, _mix(seed, 91 + j)))
        except EmptyGermError:
            continue
        if len(p) < 4:
            votes.append(0)
            continue
        P = p / r
        v = _pca_votes(P, 2 * eta, cap=A.ambient_dim)
        votes.append(int(np.median(v)))
    if not votes:
        raise EmptyGermError(f"{A.name}: no points on the two finest shells")
    return max(votes)
