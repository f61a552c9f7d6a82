"""Adaptive thickenings of germs and gauge-based comparisons.

The thickening of B by a gauge theta collects the points x with
dist(x, B) <= theta(|x|) * |x|: a tube whose relative width follows the
gauge. This module decides membership with honest three-valued logic
(distance brackets may straddle the threshold), tests inclusion of one
germ in a thickening of another on a shell schedule, fits monomial
gauges to measured relative gaps, searches for two-sided equivalence
witnesses, and transports gauges through bi-Lipschitz maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gauges import Gauge, MonomialGauge, ScaledGauge, gauge_eval
from .germs import GermSet, _mix, _norms, distance_estimate

REL_BAND = 1e-6  # indifference band around the threshold, relative
DRIVE_SHELLS = 4  # finest shells that decide a verdict
ABSTAIN_FRAC = 0.05
ALPHA_GRID = np.geomspace(0.05, 8.0, 40)
FLAT_SLOPE = 0.02  # at or below this the relative gap does not vanish


@dataclass
class STVerdict:
    relation: str  # included | not-included | equivalent | not-equivalent | abstained
    witness_gauges: tuple = ()
    counterexamples: list = field(default_factory=list)
    shells_checked: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def st_contains(x, A: GermSet, theta, band: float = REL_BAND, budget: int = 2000, seed: int = 0):
    """Is x in the theta-thickening of A? True/False/None.

    None means the distance bracket straddles the threshold within the
    relative band; germs that only provide upper distance bounds can
    certify membership but never exclusion, which shows up as None.
    """
    x = np.asarray(x, float)
    nx = float(_norms(x)[0])
    if nx == 0.0:
        return True
    thresh = float(gauge_eval(theta, nx)) * nx
    lo, hi = distance_estimate(x, A, budget=budget, seed=seed)
    if hi <= thresh * (1.0 - band):
        return True
    if lo > thresh * (1.0 + band):
        return False
    return None


def st_inclusion_test(
    A: GermSet,
    B: GermSet,
    theta,
    schedule=None,
    per_shell: int = 120,
    seed: int = 0,
    band: float = REL_BAND,
    budget: int = 1500,
) -> STVerdict:
    """Does A sit inside the theta-thickening of B near 0?

    A is sampled on its shells; the finest DRIVE_SHELLS shells decide.
    Any certified outside point refutes; more than ABSTAIN_FRAC
    indeterminate points abstain; otherwise the inclusion is accepted
    with theta as witness. Coarser shells are recorded but only carry
    context (germ statements only bind near 0).
    """
    sched = np.sort(np.asarray(A.schedule if schedule is None else schedule, float))[::-1]
    rows = []
    counterexamples = []
    drive = sched[::-1][: len(sched)] if len(sched) <= DRIVE_SHELLS else np.sort(sched)[:DRIVE_SHELLS]
    n_drive = n_indet_drive = 0
    refuted = False
    for j, r in enumerate(sched):
        try:
            pts = np.atleast_2d(A.sampler(float(r), per_shell, _mix(seed, j)))
        except Exception:
            rows.append({"radius": float(r), "n": 0, "in": 0, "out": 0, "indet": 0, "max_ratio": np.nan})
            continue
        nn = _norms(pts)
        thr = np.array([float(gauge_eval(theta, v)) * v for v in nn])
        his = np.empty(len(pts))
        los = np.empty(len(pts))
        if B.distance_oracle_batch is not None:
            d = B.distance_oracle_batch(pts)
            los, his = d.copy(), d.copy()
        else:
            for i, p in enumerate(pts):
                los[i], his[i] = distance_estimate(p, B, budget=budget, seed=_mix(seed, 9173 + j))
        is_in = his <= thr * (1.0 - band)
        is_out = los > thr * (1.0 + band)
        indet = ~(is_in | is_out)
        in_drive = float(r) in drive
        rows.append(
            {
                "radius": float(r),
                "n": int(len(pts)),
                "in": int(is_in.sum()),
                "out": int(is_out.sum()),
                "indet": int(indet.sum()),
                "max_ratio": float((his / np.maximum(thr, 1e-300)).max()),
                "drives": bool(in_drive),
            }
        )
        if in_drive:
            n_drive += len(pts)
            n_indet_drive += int(indet.sum())
            if is_out.any():
                refuted = True
                for i in np.nonzero(is_out)[0][:10]:
                    counterexamples.append(
                        {
                            "point": pts[i].tolist(),
                            "dist_lower": float(los[i]),
                            "dist_upper": float(his[i]),
                            "threshold": float(thr[i]),
                            "radius": float(r),
                        }
                    )
    if refuted:
        return STVerdict("not-included", (), counterexamples, rows, {"theta": _describe(theta)})
    if n_drive == 0 or n_indet_drive > ABSTAIN_FRAC * n_drive:
        return STVerdict("abstained", (), [], rows, {"theta": _describe(theta), "indet_frac": (n_indet_drive / n_drive) if n_drive else 1.0})
    return STVerdict("included", (theta,), [], rows, {"theta": _describe(theta)})


def _describe(theta):
    if isinstance(theta, Gauge):
        return theta.describe()
    return {"form": "callable"}


# ---------------------------------------------------------------------------
# gauge fitting


@dataclass
class GaugeFit:
    status: str  # fitted | zero-distance | no-monomial-gauge
    gauge: object
    alpha: float
    C: float
    shell_radii: np.ndarray
    shell_gmax: np.ndarray
    counterexamples: list
    n_points: int
    meta: dict = field(default_factory=dict)


def gauge_fit(
    A: GermSet,
    B: GermSet,
    schedule=None,
    per_shell: int = 60,
    seed: int = 0,
    budget: int = 1500,
    band: float = REL_BAND,
) -> GaugeFit:
    """Fit a monomial gauge certifying that A lies in a thickening of B.

    Measures the relative gap g(x) = dist(x, B)/|x| over A's shells,
    regresses the per-shell maxima in log-log, doubles the intercept for
    safety, then rechecks every sampled point against the fitted gauge.
    Counterexamples are reported, not patched away. A regression slope
    at or below FLAT_SLOPE means the relative gap does not decay, so no
    vanishing monomial gauge can work: status "no-monomial-gauge".
    """
    sched = np.sort(np.asarray(A.schedule if schedule is None else schedule, float))[::-1]
    all_n, all_g, all_r = [], [], []
    for j, r in enumerate(sched):
        try:
            pts = np.atleast_2d(A.sampler(float(r), per_shell, _mix(seed, 31 * j + 1)))
        except Exception:
            continue
        nn = _norms(pts)
        if B.distance_oracle_batch is not None:
            his = B.distance_oracle_batch(pts)
        else:
            his = np.array([distance_estimate(p, B, budget=budget, seed=_mix(seed, 777 + j))[1] for p in pts])
        all_n.append(nn)
        all_g.append(his / nn)
        all_r.append(np.full(len(pts), float(r)))
    if not all_n:
        raise ValueError("no samples for gauge fit")
    nn = np.concatenate(all_n)
    gg = np.concatenate(all_g)
    rr = np.concatenate(all_r)

    shell_radii, shell_gmax, shell_nstar = [], [], []
    for r in np.unique(rr)[::-1]:
        m = rr == r
        k = int(np.argmax(gg[m]))
        shell_radii.append(float(r))
        shell_gmax.append(float(gg[m][k]))
        shell_nstar.append(float(nn[m][k]))
    shell_radii = np.array(shell_radii)
    shell_gmax = np.array(shell_gmax)
    shell_nstar = np.array(shell_nstar)

    live = shell_gmax > 1e-13
    base_meta = {"points_norm": nn, "points_g": gg, "points_radius": rr}
    if not live.any():
        gauge = MonomialGauge(1.0, 1.0)
        return GaugeFit("zero-distance", gauge, 1.0, 1.0, shell_radii, shell_gmax, [], len(nn), base_meta)

    slope, intercept = np.polyfit(np.log(shell_nstar[live]), np.log(shell_gmax[live]), 1)
    if slope <= FLAT_SLOPE:
        return GaugeFit(
            "no-monomial-gauge", None, float(slope), np.nan, shell_radii, shell_gmax, [], len(nn),
            {**base_meta, "intercept": float(intercept)},
        )
    alpha = float(slope)
    C = 2.0 * float(np.exp(intercept))
    gauge = MonomialGauge(C, alpha)
    thr = C * nn**alpha * nn
    bad = gg * nn > thr * (1.0 + band)
    counterexamples = [
        {"point_norm": float(nn[i]), "g": float(gg[i]), "threshold_rel": float(C * nn[i] ** alpha)}
        for i in np.nonzero(bad)[0][:10]
    ]
    return GaugeFit("fitted", gauge, alpha, C, shell_radii, shell_gmax, counterexamples, len(nn), base_meta)


def _grid_gauge(nn: np.ndarray, gg: np.ndarray, grid=ALPHA_GRID) -> MonomialGauge:
    """Certified fallback: for each exponent on the grid take the smallest
    constant dominating every measured gap, then keep the exponent whose
    gauge is smallest at the coarsest observed norm."""
    r_max = float(nn.max())
    best = None
    for a in grid:
        C = float((gg / nn**a).max())
        score = C * r_max**a
        if best is None or score < best[0]:
            best = (score, a, C)
    _, a, C = best
    return MonomialGauge(2.0 * C, float(a))


def st_equivalence_search(
    A: GermSet,
    B: GermSet,
    gauge_family: str = "monomial",
    schedule=None,
    seed: int = 0,
    per_shell: int = 60,
    budget: int = 1500,
) -> STVerdict:
    """Search for gauges theta_f, theta_b with A inside the theta_f
    thickening of B and B inside the theta_b thickening of A.

    Fits each direction independently, verifies both with the inclusion
    test, and falls back to a certified exponent-grid gauge when a
    least-squares fit fails verification. Only the monomial family is
    implemented; a direction with a flat relative gap has no vanishing
    monomial witness and refutes equivalence within the family.
    """
    if gauge_family != "monomial":
        raise ValueError("only the monomial gauge family is supported")
    fits = {}
    gauges = {}
    rows = []
    tag_salt = {"fwd": 211, "bwd": 431}
    for tag, (X, Y) in {"fwd": (A, B), "bwd": (B, A)}.items():
        fit = gauge_fit(X, Y, schedule=schedule, per_shell=per_shell, seed=_mix(seed, tag_salt[tag]), budget=budget)
        fits[tag] = fit
        if fit.status == "no-monomial-gauge":
            return STVerdict(
                "not-equivalent",
                (),
                [],
                rows,
                {"failing_direction": tag, "reason": "relative gap does not decay", "slope": fit.alpha},
            )
        gauges[tag] = fit.gauge

    verdicts = {}
    for tag, (X, Y) in {"fwd": (A, B), "bwd": (B, A)}.items():
        v = st_inclusion_test(X, Y, gauges[tag], schedule=schedule, per_shell=max(per_shell, 80), seed=_mix(seed, 5 + tag_salt[tag]), budget=budget)
        if v.relation == "not-included":
            # retry once with the certified grid gauge before giving up
            fit = fits[tag]
            g2 = _grid_gauge(fit.meta["points_norm"], fit.meta["points_g"])
            v2 = st_inclusion_test(X, Y, g2, schedule=schedule, per_shell=max(per_shell, 80), seed=_mix(seed, 11 + tag_salt[tag]), budget=budget)
            if v2.relation == "included":
                gauges[tag] = g2
                v = v2
        verdicts[tag] = v
        rows.extend([{**row, "direction": tag} for row in v.shells_checked])

    rels = {t: v.relation for t, v in verdicts.items()}
    if all(r == "included" for r in rels.values()):
        return STVerdict("equivalent", (gauges["fwd"], gauges["bwd"]), [], rows, {"directions": rels})
    if any(r == "not-included" for r in rels.values()):
        bad = [t for t, r in rels.items() if r == "not-included"]
        ces = [c for t in bad for c in verdicts[t].counterexamples]
        return STVerdict("not-equivalent", (), ces, rows, {"directions": rels, "failing_direction": bad[0]})
    return STVerdict("abstained", (), [], rows, {"directions": rels})


# ---------------------------------------------------------------------------
# transporting gauges through bi-Lipschitz maps


def sandwich_gauges(theta, K1: float, K2: float):
    """Gauges (theta_out, theta_in) bracketing the image of a thickening.

    For a map with K1|x-y| <= |h(x)-h(y)| <= K2|x-y| and h(0) = 0:
    the image of the theta-thickening of A lands inside the theta_out
    thickening of h(A), and the theta_in thickening of h(A) pulls back
    inside the theta-thickening of A. With theta(t) = t, K1 = 1/2,
    K2 = 2 this gives 8t and t/8.
    """
    K1, K2 = float(K1), float(K2)
    if not (0 < K1 <= K2):
        raise ValueError("need 0 < K1 <= K2")
    if isinstance(theta, MonomialGauge):
        a = theta.alpha
        out = MonomialGauge(theta.C * K2 / K1 ** (1.0 + a), a, t_max=theta.t_max * K1)
        inn = MonomialGauge(theta.C * K1 / K2 ** (1.0 + a), a, t_max=theta.t_max * K2)
        return out, inn
    out = ScaledGauge(theta, out_scale=K2 / K1, in_scale=K1)
    inn = ScaledGauge(theta, out_scale=K1 / K2, in_scale=K2)
    return out, inn
