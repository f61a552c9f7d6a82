"""Volumes of gauge thickenings inside small balls.

Everything here is Monte Carlo against exact or solver-backed distance
oracles. Uniform ball sampling is the default; when a pilot run shows
the thickening occupies less than SWITCH_RATE of the ball and the germ
is a linear subspace, sampling switches to a product proposal (ball in
the subspace times a disk of the gauge width across it) that covers the
tube and keeps hit counts healthy at small radii. Points whose distance
bracket straddles the membership threshold are split half in, half out,
and widen the confidence interval; a run with more than 10% of them is
flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from ._rng import rng_for
from .directions import direction_set_estimate, germ_local_dim, _mix
from .gauges import gauge_eval
from .germs import GermSet, distance_estimate
from .seatangle import REL_BAND, gauge_fit

SWITCH_RATE = 1e-4
INDET_WARN = 0.10
CHUNK = 1 << 17
DEFAULT_EPS_SCHEDULE = tuple(10.0 ** (-1.0 - 0.25 * k) for k in range(9))


def ball_volume(k: int, r: float) -> float:
    return pi ** (k / 2.0) / gamma(k / 2.0 + 1.0) * r**k


@dataclass
class VolEstimate:
    value: float
    ci_halfwidth: float
    n_samples: int
    eps: float
    theta: dict
    seed: int
    method: str  # uniform | importance-subspace
    indeterminate_frac: float
    flags: dict = field(default_factory=dict)


@dataclass
class RatioReport:
    eps_schedule: list
    entries: list  # {eps, ratio, ci, vol_a, vol_b}
    slope: float
    verdict: str  # decays-to-zero | no-decay | indeterminate
    meta: dict = field(default_factory=dict)


def _sample_ball(rng, n_dim: int, radius: float, count: int) -> np.ndarray:
    v = rng.normal(size=(count, n_dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n_dim)
    return v * r[:, None]


def _dist_batch(A: GermSet, pts: np.ndarray, budget: int, seed: int):
    """(lower, upper) distance arrays; falls back to per-point estimates."""
    if A.distance_oracle_batch is not None:
        d = A.distance_oracle_batch(pts)
        return d, d
    lo = np.empty(len(pts))
    hi = np.empty(len(pts))
    for i, p in enumerate(pts):
        lo[i], hi[i] = distance_estimate(p, A, budget=budget, seed=_mix(seed, i))
    return lo, hi


def _classify(lo, hi, thr, band):
    is_in = hi <= thr * (1.0 - band)
    is_out = lo > thr * (1.0 + band)
    return is_in, ~(is_in | is_out)


def vol_st_ball(
    A: GermSet,
    theta,
    eps: float,
    n_samples: int = 200000,
    seed: int = 0,
    method: str = "auto",
    band: float = REL_BAND,
    budget: int = 400,
) -> VolEstimate:
    """Volume of the theta-thickening of A inside the ball of radius eps."""
    n_dim = A.ambient_dim
    eps = float(eps)

    basis = A.meta.get("subspace_basis")
    chosen = method
    if method == "auto":
        chosen = "uniform"
        if basis is not None:
            pilot_rng = rng_for(seed, "vol-pilot")
            P = _sample_ball(pilot_rng, n_dim, eps, 10000)
            nn = np.linalg.norm(P, axis=1)
            thr = np.asarray(gauge_eval(theta, nn)) * nn
            lo, hi = _dist_batch(A, P, budget, _mix(seed, 5))
            is_in, indet = _classify(lo, hi, thr, band)
            if (is_in.sum() + 0.5 * indet.sum()) / len(P) < SWITCH_RATE:
                chosen = "importance-subspace"

    rng = rng_for(seed, "vol-main")
    n_in = n_indet = 0
    if chosen == "importance-subspace":
        Q = np.asarray(basis)  # (n, k), orthonormal
        k = Q.shape[1]
        w = float(gauge_eval(theta, eps)) * eps  # tube half-width bound inside the ball
        done = 0
        while done < n_samples:
            m = min(CHUNK, n_samples - done)
            a = _sample_ball(rng, k, eps, m)
            b = _sample_ball(rng, n_dim - k, w, m)
            nn2 = np.sum(a**2, axis=1) + np.sum(b**2, axis=1)
            nn = np.sqrt(nn2)
            thr = np.asarray(gauge_eval(theta, nn)) * nn
            d = np.linalg.norm(b, axis=1)  # exact distance to the subspace
            inside = nn <= eps
            is_in, indet = _classify(d, d, thr, band)
            n_in += int((is_in & inside).sum())
            n_indet += int((indet & inside).sum())
            done += m
        cell = ball_volume(k, eps) * ball_volume(n_dim - k, w)
    else:
        done = 0
        while done < n_samples:
            m = min(CHUNK, n_samples - done)
            P = _sample_ball(rng, n_dim, eps, m)
            nn = np.linalg.norm(P, axis=1)
            thr = np.asarray(gauge_eval(theta, nn)) * nn
            lo, hi = _dist_batch(A, P, budget, _mix(seed, 1000 + done))
            is_in, indet = _classify(lo, hi, thr, band)
            n_in += int(is_in.sum())
            n_indet += int(indet.sum())
            done += m
        cell = ball_volume(n_dim, eps)

    p = (n_in + 0.5 * n_indet) / n_samples
    ci = 1.96 * np.sqrt(max(p * (1.0 - p), 1e-12) / n_samples) + 0.5 * n_indet / n_samples
    indet_frac = n_indet / n_samples
    flags = {}
    if indet_frac > INDET_WARN:
        flags["high_indeterminate"] = indet_frac
    theta_desc = theta.describe() if hasattr(theta, "describe") else {"form": "callable"}
    return VolEstimate(
        value=float(p * cell),
        ci_halfwidth=float(ci * cell),
        n_samples=int(n_samples),
        eps=eps,
        theta=theta_desc,
        seed=int(seed),
        method=chosen,
        indeterminate_frac=float(indet_frac),
        flags=flags,
    )


def ratio_curve(
    A: GermSet,
    B: GermSet,
    theta,
    eps_schedule=None,
    n_samples: int = 200000,
    seed: int = 0,
    method: str = "auto",
) -> RatioReport:
    """Vol(thickening of A) / Vol(thickening of B) on shrinking balls.

    The verdict is decays-to-zero when the last four ratios fall
    monotonically within joint confidence bounds and the final ratio is
    below a tenth of the first; it flips to no-decay when the final
    ratio stays above half the initial one, and abstains in between.
    """
    sched = list(DEFAULT_EPS_SCHEDULE if eps_schedule is None else eps_schedule)
    entries = []
    for j, eps in enumerate(sched):
        va = vol_st_ball(A, theta, eps, n_samples, _mix(seed, 2 * j), method=method)
        vb = vol_st_ball(B, theta, eps, n_samples, _mix(seed, 2 * j + 1), method=method)
        if vb.value <= 0:
            entries.append({"eps": float(eps), "ratio": np.inf, "ci": np.inf, "vol_a": va, "vol_b": vb})
            continue
        r = va.value / vb.value
        rel = np.sqrt((va.ci_halfwidth / max(va.value, 1e-300)) ** 2 + (vb.ci_halfwidth / vb.value) ** 2)
        entries.append({"eps": float(eps), "ratio": float(r), "ci": float(r * rel), "vol_a": va, "vol_b": vb})

    finite = [(e["eps"], e["ratio"], e["ci"]) for e in entries if np.isfinite(e["ratio"]) and e["ratio"] > 0]
    if len(finite) >= 2:
        xs = np.log([f[0] for f in finite])
        ys = np.log([f[1] for f in finite])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = np.nan

    verdict = "indeterminate"
    if len(finite) >= 4:
        tail = finite[-4:]
        steps_down = all(tail[i + 1][1] <= tail[i][1] + tail[i][2] + tail[i + 1][2] for i in range(3))
        first_r, last_r = finite[0][1], finite[-1][1]
        if steps_down and last_r < 0.1 * first_r:
            verdict = "decays-to-zero"
        elif last_r > 0.5 * first_r:
            verdict = "no-decay"
    return RatioReport([float(e) for e in sched], entries, slope, verdict, {"germ_a": A.name, "germ_b": B.name})


@dataclass
class CTimesReport:
    c: float
    entries: list  # {eps, ratio, ci, n_base, n_scaled}
    mean_ratio: float
    verdict: str  # ok | degenerate
    meta: dict = field(default_factory=dict)


def ctimes_check(
    A: GermSet,
    theta,
    c: float,
    eps_schedule=None,
    n_samples: int = 200000,
    seed: int = 0,
) -> CTimesReport:
    """Paired volume ratio of the c-scaled thickening to the base one.

    Both memberships are decided on the same sample cloud, drawn wide
    enough for the scaled gauge, so the ratio estimate drops the
    between-run noise. For a k-dimensional subspace germ the ratio tends
    to c^(n-k) as the ball shrinks.
    """
    c = float(c)
    if c < 1.0:
        raise ValueError("scaling factor must be >= 1")
    sched = list(DEFAULT_EPS_SCHEDULE if eps_schedule is None else eps_schedule)
    basis = A.meta.get("subspace_basis")
    n_dim = A.ambient_dim
    entries = []
    for j, eps in enumerate(sched):
        rng = rng_for(_mix(seed, j), "ctimes")
        n_base = n_scaled = 0
        use_is = basis is not None
        if use_is:
            Q = np.asarray(basis)
            k = Q.shape[1]
            w = c * float(gauge_eval(theta, eps)) * eps
            done = 0
            while done < n_samples:
                m = min(CHUNK, n_samples - done)
                a = _sample_ball(rng, k, eps, m)
                b = _sample_ball(rng, n_dim - k, w, m)
                nn = np.sqrt(np.sum(a**2, axis=1) + np.sum(b**2, axis=1))
                thr = np.asarray(gauge_eval(theta, nn)) * nn
                d = np.linalg.norm(b, axis=1)
                inside = nn <= eps
                n_base += int((inside & (d <= thr)).sum())
                n_scaled += int((inside & (d <= c * thr)).sum())
                done += m
        else:
            done = 0
            while done < n_samples:
                m = min(CHUNK, n_samples - done)
                P = _sample_ball(rng, n_dim, eps, m)
                nn = np.linalg.norm(P, axis=1)
                thr = np.asarray(gauge_eval(theta, nn)) * nn
                lo, hi = _dist_batch(A, P, 400, _mix(seed, 500 + done))
                n_base += int((hi <= thr).sum())
                n_scaled += int((hi <= c * thr).sum())
                done += m
        if n_base < 100:
            entries.append({"eps": float(eps), "ratio": np.nan, "ci": np.nan, "n_base": n_base, "n_scaled": n_scaled})
            continue
        ratio = n_scaled / n_base
        ci = 1.96 * ratio * np.sqrt(1.0 / n_base + 1.0 / max(n_scaled, 1))
        entries.append({"eps": float(eps), "ratio": float(ratio), "ci": float(ci), "n_base": n_base, "n_scaled": n_scaled})
    good = [e["ratio"] for e in entries if np.isfinite(e.get("ratio", np.nan))]
    mean_ratio = float(np.exp(np.mean(np.log(good)))) if good else np.nan
    verdict = "ok" if len(good) == len(sched) else "degenerate"
    return CTimesReport(c, entries, mean_ratio, verdict, {"germ": A.name})


@dataclass
class VolumeEquivReport:
    verdict: str  # equivalent | not-equivalent | abstain
    precondition_ok: bool
    frac_ab: float  # A-tube samples certified inside the doubled B-tube
    frac_ba: float
    entries: list
    theta3: dict
    theta4: dict
    meta: dict = field(default_factory=dict)


def st_volume_equiv_check(
    A: GermSet,
    B: GermSet,
    theta,
    eps_schedule=(0.05, 0.02, 0.01),
    n_samples: int = 200000,
    seed: int = 0,
    band: float = REL_BAND,
) -> VolumeEquivReport:
    """Two-sided tube comparison for germs that sit in each other's
    thickenings.

    Fits witness gauges both ways and grid-checks the working
    precondition theta(t) >= 2 * max(theta3(2t), theta4(2t)); under it
    every point of the theta-tube around A must land in the 2*theta-tube
    around B and vice versa. The check samples each tube inside shrinking
    balls and certifies membership in the doubled other tube, reporting
    per-ball volumes alongside.
    """
    f_ab = gauge_fit(A, B, seed=_mix(seed, 3))
    f_ba = gauge_fit(B, A, seed=_mix(seed, 7))
    if f_ab.gauge is None or f_ba.gauge is None:
        return VolumeEquivReport(
            "abstain", False, np.nan, np.nan, [],
            {"status": f_ab.status}, {"status": f_ba.status},
            {"reason": "no witness gauge in at least one direction"},
        )
    eps_hi = max(eps_schedule)
    grid = np.geomspace(min(eps_schedule) / 64.0, eps_hi, 64)
    lhs = np.asarray(gauge_eval(theta, grid))
    rhs = 2.0 * np.maximum(np.asarray(gauge_eval(f_ab.gauge, 2.0 * grid)), np.asarray(gauge_eval(f_ba.gauge, 2.0 * grid)))
    pre_ok = bool(np.all(lhs >= rhs))

    entries = []
    tot_ab = ok_ab = tot_ba = ok_ba = 0
    for j, eps in enumerate(eps_schedule):
        row = {"eps": float(eps)}
        for tag, (X, Y) in {"ab": (A, B), "ba": (B, A)}.items():
            rng = rng_for(_mix(seed, 100 + 10 * j + (0 if tag == "ab" else 1)), "vol-equiv")
            P = _sample_ball(rng, A.ambient_dim, float(eps), n_samples)
            nn = np.linalg.norm(P, axis=1)
            thr = np.asarray(gauge_eval(theta, nn)) * nn
            loX, hiX = _dist_batch(X, P, 400, _mix(seed, 11 + j))
            in_tube = hiX <= thr * (1.0 - band)
            H = P[in_tube]
            if len(H):
                nnH = nn[in_tube]
                loY, hiY = _dist_batch(Y, H, 400, _mix(seed, 13 + j))
                inside2 = hiY <= 2.0 * thr[in_tube] * (1.0 + band)
                n_ok, n_tot = int(inside2.sum()), int(len(H))
            else:
                n_ok = n_tot = 0
            row[f"hits_{tag}"] = n_tot
            row[f"inside_doubled_{tag}"] = n_ok
            row[f"vol_{tag}"] = float(n_tot / n_samples * ball_volume(A.ambient_dim, float(eps)))
            if tag == "ab":
                tot_ab += n_tot
                ok_ab += n_ok
            else:
                tot_ba += n_tot
                ok_ba += n_ok
        entries.append(row)

    frac_ab = ok_ab / tot_ab if tot_ab else np.nan
    frac_ba = ok_ba / tot_ba if tot_ba else np.nan
    if tot_ab < 200 or tot_ba < 200:
        verdict = "abstain"
    elif pre_ok and frac_ab >= 0.999 and frac_ba >= 0.999:
        verdict = "equivalent"
    elif frac_ab < 0.99 or frac_ba < 0.99:
        verdict = "not-equivalent"
    else:
        verdict = "abstain" if not pre_ok else "equivalent"
    return VolumeEquivReport(
        verdict, pre_ok, float(frac_ab), float(frac_ba), entries,
        f_ab.gauge.describe(), f_ba.gauge.describe(),
        {"germ_a": A.name, "germ_b": B.name},
    )


@dataclass
class DimInequalityReport:
    verdict: str  # pass | fail | abstain
    dim_directions: int
    dim_directions_image: int
    germ_dim: int
    germ_dim_image: int
    confs: dict
    checks: dict
    meta: dict = field(default_factory=dict)


def dim_inequality_check(h, A: GermSet, params: dict | None = None) -> DimInequalityReport:
    """Dimension sanity for a germ and its image.

    Checks that the direction-set dimension never exceeds the local
    dimension of the germ itself, on both sides of the map, and that a
    bi-Lipschitz map preserves the direction-set dimension. Abstains
    when either dimension estimate reports low confidence.
    """
    from .germs import apply_map_germ

    p = dict(params or {})
    per_shell = int(p.get("per_shell_count", 200))
    seed = int(p.get("seed", 0))
    imA = p.get("image") or apply_map_germ(h, A, name=f"im-{A.name}")

    DA = direction_set_estimate(A, per_shell_count=per_shell, seed=_mix(seed, 41))
    DI = direction_set_estimate(imA, per_shell_count=per_shell, seed=_mix(seed, 43))
    gA = germ_local_dim(A, per_shell_count=per_shell, seed=_mix(seed, 47))
    gI = germ_local_dim(imA, per_shell_count=per_shell, seed=_mix(seed, 51))

    bilip = bool(getattr(h, "K1", None) and getattr(h, "K2", None))
    if getattr(h, "meta", None) and h.meta.get("not_bilipschitz"):
        bilip = False
    checks = {
        "directions_le_germ": DA.dim_estimate <= gA,
        "image_directions_le_germ": DI.dim_estimate <= gI,
    }
    if bilip:
        checks["bi-lipschitz_preserves_direction_dim"] = DA.dim_estimate == DI.dim_estimate
    confs = {"directions": DA.dim_confidence, "image_directions": DI.dim_confidence}
    if min(confs.values()) < 0.8:
        verdict = "abstain"
    else:
        verdict = "pass" if all(checks.values()) else "fail"
    return DimInequalityReport(
        verdict=verdict,
        dim_directions=DA.dim_estimate,
        dim_directions_image=DI.dim_estimate,
        germ_dim=gA,
        germ_dim_image=gI,
        confs=confs,
        checks=checks,
        meta={"map": getattr(h, "name", ""), "germ": A.name, "bi_lipschitz": bilip},
    )
