"""Approach-rate probes along limit directions.

A germ has the strong approach property when, for every relative
tolerance eps, all points lying close to its limit directions and close
enough to 0 are within eps * |x| of the germ. The weak variant only
requires this along some subsequence of scales on each ray. Both are
probed on an (eps, delta) grid: rays through the estimated direction
cloud are sampled at radii below delta and the measured relative gaps
dist(x, germ) / |x| are compared against eps.

Verdict semantics per eps: pass needs the cells at the two smallest
deltas to pass (a proxy for "from some delta on"), fail needs the
smallest-delta cell to fail, anything else abstains. The weak probe
counts a ray as good when at least half of its dyadic radii succeed; a
finite radius ladder standing in for a subsequence is a proxy, so weak
reports always carry a proxy flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._rng import rng_for
from .directions import DirectionSample, direction_set_estimate, intersection_from_samples, tangent_cone
from .germs import GermSet, _mix, apply_map_germ, distance_estimate, nearest_with_distance

DYADIC_J = np.arange(1, 7)  # radii delta * 2^-j, shared by both probes


@dataclass
class SSPConfig:
    eps_grid: tuple = (1e-1, 10**-1.5, 1e-2, 10**-2.5, 1e-3)
    delta_grid: tuple = tuple(10.0**-k for k in range(1, 8))
    direction_tol: float = 0.95  # jittered direction must stay within this * eps of the tube
    # jitter fraction of eps: kept well below 1 so the tube width alone
    # never exhausts the eps budget; the slack absorbs the germ's own
    # approach term at the probe radii
    rho: float = 0.4
    n_rays: int = 24
    n_extra_radii: int = 4  # log-uniform radii added below delta (strong probe only)
    n_jitter: int = 2
    budget: int = 400
    seed: int = 0


@dataclass
class SSPReport:
    verdict: str  # pass | fail | abstain
    mode: str  # strong | weak
    per_eps: list
    cells: list
    flags: dict
    probes_total: int
    config: SSPConfig


def _rays_from_sample(D: DirectionSample, n_rays: int) -> np.ndarray:
    """Cluster medoids plus an even subsample of the estimate cloud."""
    pts = D.estimate_points()
    mask = D.meta.get("estimate_mask")
    labels = D.clusters if mask is None else D.clusters[mask]
    reps = []
    for lab in np.unique(labels):
        P = pts[labels == lab]
        mean = P.mean(axis=0)
        reps.append(P[int(np.argmin(np.linalg.norm(P - mean, axis=1)))])
    reps = np.array(reps)
    if len(reps) < n_rays and len(pts) > len(reps):
        extra = pts[np.unique(np.linspace(0, len(pts) - 1, n_rays - len(reps)).astype(int))]
        reps = np.vstack([reps, extra])
    reps = reps / np.linalg.norm(reps, axis=1, keepdims=True)
    # deduplicate almost-identical rays
    keep = []
    for u in reps:
        if not keep or min(np.linalg.norm(u - np.array(keep), axis=1)) > 1e-9:
            keep.append(u)
    return np.array(keep[: max(n_rays, len(np.unique(labels)))])


def _refine_rays(A: GermSet, rays: np.ndarray, r_start: float, r_final: float, budget: int, seed: int) -> np.ndarray:
    """Chase each ray down the germ to the probe scale.

    A direction cloud estimated at shell radius r carries the branch's
    angular error at that radius (a cusp sits sqrt(r) off its limit ray).
    Probing such a ray at much smaller radii would charge that fixed
    offset against eps. Walking the nearest-point witness down a
    geometric radius ladder re-centers the ray on the branch at the
    scale the probes actually use. Germs with exact distance oracles
    return no witness and keep their rays as estimated.
    """
    if not (np.isfinite(r_start) and r_start > r_final):
        return rays
    radii = np.geomspace(r_start, r_final, 16)
    out = []
    for i, u in enumerate(rays):
        v = np.array(u, float)
        for k, r in enumerate(radii):
            w, _ = nearest_with_distance(r * v, A, budget, _mix(seed, 997 * i + k))
            if w is None:
                break
            wn = np.linalg.norm(w)
            if wn <= 0:
                continue
            v = w / wn
        out.append(v)
    return np.array(out)


def _gap_ratios(points: np.ndarray, A: GermSet, eps: float, budget: int, seed: int) -> np.ndarray:
    """dist(x, A) / (eps * |x|) per probe point, from upper bounds."""
    nn = np.linalg.norm(points, axis=1)
    if A.distance_oracle_batch is not None:
        d = A.distance_oracle_batch(points)
    else:
        d = np.array([distance_estimate(p, A, budget=budget, seed=_mix(seed, i))[1] for i, p in enumerate(points)])
    return d / (eps * nn)


def _eval_cell(A, rays, tree, eps, delta, cfg, mode, seed):
    """One (eps, delta) cell: returns (cell dict, per-ray dyadic matrix)."""
    rng = rng_for(seed, "ssp-cell")
    dyadic = delta * 2.0 ** (-DYADIC_J.astype(float))
    probes, tags = [], []  # tag = (ray index, dyadic index or -1)
    for i, u in enumerate(rays):
        for jx, r in enumerate(dyadic):
            probes.append(r * u)
            tags.append((i, jx))
        if mode == "strong":
            extra = np.exp(rng.uniform(np.log(delta / 64.0), np.log(delta), size=cfg.n_extra_radii))
            for r in extra:
                probes.append(r * u)
                tags.append((i, -1))
            for _ in range(cfg.n_jitter):
                w = rng.normal(size=u.shape)
                w -= (w @ u) * u
                wn = np.linalg.norm(w)
                if wn == 0:
                    continue
                v = u + (cfg.rho * eps * rng.uniform(0.3, 1.0) / wn) * w
                v = v / np.linalg.norm(v)
                dd, _ = tree.query(v, k=1)
                if float(dd) > cfg.direction_tol * eps:
                    continue  # drifted outside the direction tube
                for r in dyadic[::2]:
                    probes.append(r * v)
                    tags.append((i, -1))
    probes = np.array(probes)
    ratios = _gap_ratios(probes, A, eps, cfg.budget, seed)
    ok = ratios <= 1.0 + 1e-9

    n_rays = len(rays)
    dy_ok = np.ones((n_rays, len(DYADIC_J)), dtype=bool)
    strong_ok = True
    for (i, jx), o in zip(tags, ok):
        if jx >= 0:
            dy_ok[i, jx] = o
        if not o:
            strong_ok = False
    if mode == "strong":
        passed = strong_ok
    else:
        passed = bool(np.all(dy_ok.sum(axis=1) * 2 >= len(DYADIC_J)))
    cell = {
        "eps": float(eps),
        "delta": float(delta),
        "passed": bool(passed),
        "n_probes": int(len(probes)),
        "n_fail": int((~ok).sum()),
        "worst_ratio": float(ratios.max()),
    }
    return cell, dy_ok


def _sweep(A: GermSet, D: DirectionSample | None, cfg: SSPConfig, mode: str) -> SSPReport:
    if D is None:
        D = direction_set_estimate(A, seed=_mix(cfg.seed, 601))
    rays = _rays_from_sample(D, cfg.n_rays)
    deltas = np.sort(np.asarray(cfg.delta_grid, float))
    mask = D.meta.get("estimate_mask")
    src = D.source_radii if mask is None else D.source_radii[mask]
    r_start = float(np.median(src)) if len(src) else np.nan
    r_final = float(deltas[0] * 2.0 ** (-float(DYADIC_J[-1])))
    rays = _refine_rays(A, rays, r_start, r_final, cfg.budget, _mix(cfg.seed, 443))
    # refined rays extend the tube the jitter guard checks against
    tree = cKDTree(np.vstack([D.points, rays]))
    d_small, d_next = deltas[0], deltas[min(1, len(deltas) - 1)]
    per_eps, cells = [], []
    total = 0
    for k, eps in enumerate(sorted(cfg.eps_grid, reverse=True)):
        c0, _ = _eval_cell(A, rays, tree, eps, d_small, cfg, mode, _mix(cfg.seed, 100 + k))
        c1, _ = _eval_cell(A, rays, tree, eps, d_next, cfg, mode, _mix(cfg.seed, 200 + k))
        cells.extend([c0, c1])
        total += c0["n_probes"] + c1["n_probes"]
        if c0["passed"] and c1["passed"]:
            v = "pass"
        elif not c0["passed"]:
            v = "fail"
        else:
            v = "abstain"
        per_eps.append({"eps": float(eps), "verdict": v, "cells": [c0, c1]})
    verdicts = [p["verdict"] for p in per_eps]
    if all(v == "pass" for v in verdicts):
        overall = "pass"
    elif any(v == "fail" for v in verdicts):
        overall = "fail"
    else:
        overall = "abstain"
    flags = {"n_rays": int(len(rays)), "germ": A.name}
    if mode == "weak":
        flags["wssp_proxy"] = "finite dyadic radius ladder stands in for a subsequence of scales"
    return SSPReport(overall, mode, per_eps, cells, flags, total, cfg)


def ssp_probe(A: GermSet, D: DirectionSample | None = None, cfg: SSPConfig | None = None) -> SSPReport:
    """Strong approach probe: every sampled point near every limit
    direction must be eps-close to the germ, relative to its norm."""
    return _sweep(A, D, cfg or SSPConfig(), "strong")


def wssp_probe(A: GermSet, D: DirectionSample | None = None, cfg: SSPConfig | None = None) -> SSPReport:
    """Weak approach probe: each ray only needs a subsequence of scales
    (at least half the dyadic ladder) to come eps-close. Always flagged
    as a proxy; see SSPReport.flags."""
    return _sweep(A, D, cfg or SSPConfig(), "weak")


# ---------------------------------------------------------------------------
# cone-image consistency


@dataclass
class LDImageReport:
    verdict: str  # match | mismatch | abstain
    hausdorff: float
    dim_image: int
    dim_cone_image: int
    conf_image: float
    conf_cone_image: float
    intersection_dim: int
    meta: dict = field(default_factory=dict)


def ld_image_check(h, A: GermSet, params: dict | None = None) -> LDImageReport:
    """Do the limit directions of h(A) agree with those of h applied to
    the tangent cone of A?

    Estimates both direction clouds and compares them by chord-distance
    Hausdorff gap plus dimension. For bi-Lipschitz h on a tame germ the
    two agree; crushing maps break it.
    """
    p = dict(params or {})
    per_shell = int(p.get("per_shell_count", 200))
    seed = int(p.get("seed", 0))
    eta = float(p.get("eta", 0.05))
    tol = float(p.get("tol", 2.0 * eta))

    DA = direction_set_estimate(A, per_shell_count=per_shell, seed=_mix(seed, 71), eta=eta)
    cone = tangent_cone(DA, name=f"cone-{A.name}")
    imA = apply_map_germ(h, A, name=f"im-{A.name}")
    imE = apply_map_germ(h, cone, name=f"im-cone-{A.name}")
    D_imA = direction_set_estimate(imA, per_shell_count=per_shell, seed=_mix(seed, 72), eta=eta)
    D_imE = direction_set_estimate(imE, per_shell_count=per_shell, seed=_mix(seed, 73), eta=eta)

    Pa, Pe = D_imA.estimate_points(), D_imE.estimate_points()
    da, _ = cKDTree(Pe).query(Pa, k=1)
    de, _ = cKDTree(Pa).query(Pe, k=1)
    haus = float(max(da.max(), de.max()))
    dims_known = D_imA.dim_confidence > 0 and D_imE.dim_confidence > 0
    dim_eq = D_imA.dim_estimate == D_imE.dim_estimate
    idim, _, _ = intersection_from_samples(D_imA, D_imE, eta=eta)
    if haus <= tol and dim_eq:
        verdict = "match"
    elif haus > tol or (dims_known and not dim_eq):
        verdict = "mismatch"
    else:
        verdict = "abstain"
    return LDImageReport(
        verdict=verdict,
        hausdorff=haus,
        dim_image=D_imA.dim_estimate,
        dim_cone_image=D_imE.dim_estimate,
        conf_image=D_imA.dim_confidence,
        conf_cone_image=D_imE.dim_confidence,
        intersection_dim=int(idim),
        meta={"tol": tol, "map": getattr(h, "name", ""), "germ": A.name},
    )
