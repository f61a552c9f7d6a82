"""Batch experiment runner.

Every estimator is exposed as a subcommand that writes a JSON report, an
RFC-4180 CSV of the plottable data, and (unless --no-plot) a PNG figure
next to them. Exit codes: 0 for pass-verdicts, 2 for fail/refutation
verdicts, 3 for abstentions, 1 for config/schema errors. Reports embed
the exact config so a run can be reproduced byte-for-byte (the timestamp
line is the only varying part).
"""

from __future__ import annotations

import argparse
import os
import sys
from time import perf_counter

import numpy as np

from ._rng import rng_for
from .config import ConfigError, SUBCOMMANDS, load_config, resolve_gauge, validate_config
from .directions import (
    direction_set_estimate,
    invariant_check,
    tangent_cone,
)
from .fixtures import catalog, standard_maps_2d, standard_maps_3d
from .germs import EmptyGermError, _mix, germ_from_subspace, make_germ
from .gauges import gauge_eval
from .lipschitz import banach_extension, linear_map
from .puiseux import (
    PX_ONE,
    cell,
    px_add,
    px_compare,
    px_const,
    px_inv,
    px_lt,
    px_mul,
    px_norm,
    px_print,
    px_sub,
    px_t,
    px_dist_set,
    px_vol_cell,
    px_vol_scaling_check,
)
from .reporting import (
    plot_bars,
    plot_curves,
    plot_directions,
    plot_heat,
    plot_loglog,
    write_csv,
    write_report,
)
from .seatangle import gauge_fit, sandwich_gauges, st_equivalence_search
from .ssp import SSPConfig, ld_image_check, ssp_probe, wssp_probe
from .volume import DEFAULT_EPS_SCHEDULE, ctimes_check, ratio_curve, vol_st_ball

# short definitions echoed into reports so a reader can tell what ran
# without consulting the source
_OPERATIONS = {
    "dirset": [{"operation": "direction_set_estimate", "definition": "limit directions x/|x| over shrinking shells, with integer dimension"}],
    "cone": [{"operation": "tangent_cone", "definition": "half-cone spanned by the estimated direction set"}],
    "st-fit": [{"operation": "gauge_fit", "definition": "monomial width C*t^alpha bounding dist(x,B)/|x| over A"}],
    "st-equiv": [{"operation": "st_equivalence_search", "definition": "mutual thickening inclusion with fitted gauges"}],
    "sandwich": [{"operation": "sandwich_gauges", "definition": "image of a theta-thickening sits in the (K2/K1)*theta(t/K1) thickening of the image"}],
    "ssp": [{"operation": "ssp_probe", "definition": "relative approach error along limit directions must vanish"}],
    "ld-image": [{"operation": "ld_image_check", "definition": "directions of h(A) versus directions of h(tangent cone of A)"}],
    "vol": [{"operation": "vol_st_ball", "definition": "Monte Carlo volume of the thickening inside shrinking balls"}],
    "vol-ratio": [{"operation": "ratio_curve", "definition": "volume ratio of two thickenings as the ball shrinks"}],
    "ctimes": [{"operation": "ctimes_check", "definition": "volume response to scaling the gauge by c"}],
    "invariant": [{"operation": "invariant_check", "definition": "dim(D(A) & D(B)) equals the same after a bi-Lipschitz map"}],
    "extend": [{"operation": "banach_extension", "definition": "envelope extension of L-Lipschitz anchor data"}],
    "puiseux": [{"operation": "exact-arithmetic", "definition": "truncated series field arithmetic and exact cell volumes"}],
}


# ---------------------------------------------------------------------------
# resolution helpers


def _get_fixture(cfg):
    name = cfg.get("fixture")
    if not name:
        return None
    cat = catalog()
    if name not in cat:
        raise ConfigError(f"unknown fixture {name!r}; available: {', '.join(sorted(cat))}", "$.fixture")
    return cat[name]


def _resolve_germ(cfg, key, fixture, default_key=None, required=True):
    spec = cfg.get(key)
    if spec is None:
        if fixture is not None and fixture.germs:
            if default_key and default_key in fixture.germs:
                return fixture.germs[default_key]
            return next(iter(fixture.germs.values()))
        if required:
            raise ConfigError(f"no germ: set '{key}' or pick a fixture", f"$.{key}")
        return None
    if isinstance(spec, str):
        if fixture is not None and spec in fixture.germs:
            return fixture.germs[spec]
        if "." in spec:
            fxname, gkey = spec.split(".", 1)
            cat = catalog()
            if fxname in cat and gkey in cat[fxname].germs:
                return cat[fxname].germs[gkey]
        raise ConfigError(f"unknown germ {spec!r}", f"$.{key}")
    return make_germ(spec)


def _resolve_map(cfg, fixture, required=True):
    spec = cfg.get("map")
    if spec is None:
        if fixture is not None and fixture.maps:
            return next(iter(fixture.maps.values()))
        if required:
            raise ConfigError("no map: set 'map' or pick a fixture with one", "$.map")
        return None
    if isinstance(spec, str):
        if fixture is not None and spec in fixture.maps:
            return fixture.maps[spec]
        pool = {**standard_maps_2d(), **standard_maps_3d()}
        if spec in pool:
            return pool[spec]
        if "." in spec:
            fxname, mkey = spec.split(".", 1)
            cat = catalog()
            if fxname in cat and mkey in cat[fxname].maps:
                return cat[fxname].maps[mkey]
        raise ConfigError(f"unknown map {spec!r}", "$.map")
    return linear_map(spec["matrix"], spec.get("name", "linear"))


def _coord_header(n):
    return [f"x{i}" for i in range(n)]


# ---------------------------------------------------------------------------
# subcommand handlers: each returns
#   {"exit": int, "report": dict, "csv": (header, rows), "plot": fn|None, "summary": [str]}


def _h_dirset(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    p = cfg["params"]
    D = direction_set_estimate(
        A,
        per_shell_count=int(p.get("per_shell_count", 200)),
        seed=int(cfg["seed"]),
        eta=float(p.get("eta", 0.05)),
    )
    mask = D.meta.get("estimate_mask")
    fine_labels = D.clusters if mask is None else D.clusters[mask]
    n_clusters = int(len(np.unique(fine_labels)))
    report = {
        "germ": A.name,
        "ambient_dim": A.ambient_dim,
        "dim_directions": D.dim_estimate,
        "confidence": D.dim_confidence,
        "cluster_count_fine": n_clusters,
        "n_points": int(len(D.points)),
        "empty_shells": D.meta.get("empty_shells", []),
    }
    header = ["radius", "cluster"] + _coord_header(A.ambient_dim)
    rows = [
        [float(r), int(c)] + [float(v) for v in u]
        for r, c, u in zip(D.source_radii, D.clusters, D.points)
    ]
    plot = lambda path: plot_directions(D.points, D.source_radii, path, f"directions of {A.name}")
    code = 0 if D.dim_confidence >= 0.8 else 3
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"dim D({A.name}) = {D.dim_estimate} (confidence {D.dim_confidence:.2f}, {n_clusters} fine clusters)"],
    }


def _h_cone(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    p = cfg["params"]
    D = direction_set_estimate(
        A, per_shell_count=int(p.get("per_shell_count", 200)), seed=int(cfg["seed"]), eta=float(p.get("eta", 0.05))
    )
    K = tangent_cone(D, name=f"cone-{A.name}")
    dirs = K.meta["cone_dirs"]
    # the cone's own samples must measure distance ~0 under its oracle
    test = K.sampler(0.05, 200, _mix(int(cfg["seed"]), 3))
    resid = float(np.max(K.distance_oracle_batch(test)))
    report = {
        "germ": A.name,
        "dim_directions": D.dim_estimate,
        "confidence": D.dim_confidence,
        "n_cone_dirs": int(len(dirs)),
        "n_sectors": int(len(K.meta["cone_pairs"])),
        "max_sample_residual": resid,
    }
    header = ["kind"] + _coord_header(A.ambient_dim)
    rows = [["dir"] + [float(v) for v in u] for u in dirs]
    plot = lambda path: plot_directions(dirs, np.ones(len(dirs)), path, f"cone directions of {A.name}")
    code = 0 if D.dim_confidence >= 0.8 else 3
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"cone of {A.name}: {len(dirs)} directions, {len(K.meta['cone_pairs'])} sectors, residual {resid:.2e}"],
    }


def _h_st_fit(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    keys = list(fixture.germs) if fixture else []
    B = _resolve_germ(cfg, "germ_b", fixture, default_key=keys[1] if len(keys) > 1 else None)
    p = cfg["params"]
    fit = gauge_fit(
        A,
        B,
        per_shell=int(p.get("per_shell", 60)),
        seed=int(cfg["seed"]),
        budget=int(p.get("budget", 1500)),
    )
    report = {
        "germ_a": A.name,
        "germ_b": B.name,
        "status": fit.status,
        "alpha": fit.alpha,
        "C": fit.C,
        "n_points": fit.n_points,
        "n_counterexamples": len(fit.counterexamples),
        "counterexamples": fit.counterexamples,
        "shell_radii": fit.shell_radii,
        "shell_gmax": fit.shell_gmax,
    }
    header = ["shell_radius", "gmax"]
    rows = [[float(r), float(g)] for r, g in zip(fit.shell_radii, fit.shell_gmax)]

    def plot(path):
        series = [fit.shell_gmax]
        labels = ["measured max gap"]
        if fit.status == "fitted":
            series.append(fit.C * np.asarray(fit.shell_radii) ** fit.alpha)
            labels.append(f"fit {fit.C:.3g}*t^{fit.alpha:.3g}")
        return plot_loglog(fit.shell_radii, series, labels, path, "shell radius", "relative gap", f"{A.name} vs {B.name}")

    if fit.status == "no-monomial-gauge" or (fit.status == "fitted" and fit.counterexamples):
        code = 2
    else:
        code = 0
    msg = {
        "fitted": f"fitted gauge {fit.C:.3g}*t^{fit.alpha:.3g} with {len(fit.counterexamples)} counterexamples",
        "zero-distance": "A already sits inside B at sampling precision",
        "no-monomial-gauge": f"relative gap does not decay (log-log slope {fit.alpha:.3g}); no monomial gauge",
    }[fit.status]
    return {"exit": code, "report": report, "csv": (header, rows), "plot": plot, "summary": [msg]}


def _h_st_equiv(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    keys = list(fixture.germs) if fixture else []
    B = _resolve_germ(cfg, "germ_b", fixture, default_key=keys[1] if len(keys) > 1 else None)
    p = cfg["params"]
    v = st_equivalence_search(A, B, seed=int(cfg["seed"]), per_shell=int(p.get("per_shell", 60)), budget=int(p.get("budget", 1500)))
    report = {
        "germ_a": A.name,
        "germ_b": B.name,
        "relation": v.relation,
        "witness_gauges": [g.describe() for g in v.witness_gauges],
        "counterexamples": v.counterexamples,
        "detail": v.meta,
        "shells": v.shells_checked,
    }
    header = ["direction", "radius", "n", "in", "out", "indet", "max_ratio"]
    rows = [
        [r.get("direction", ""), r["radius"], r["n"], r["in"], r["out"], r["indet"], r["max_ratio"]]
        for r in v.shells_checked
    ]

    def plot(path):
        fwd = [(r["radius"], r["max_ratio"]) for r in v.shells_checked if r.get("direction") == "fwd"]
        bwd = [(r["radius"], r["max_ratio"]) for r in v.shells_checked if r.get("direction") == "bwd"]
        if not fwd and not bwd:
            return plot_bars(["relation"], [1.0], path, v.relation)
        xs = [p_[0] for p_ in (fwd or bwd)]
        series, labels = [], []
        if fwd:
            series.append([p_[1] for p_ in fwd])
            labels.append("A in thick(B): dist/threshold")
        if bwd:
            series.append([p_[1] for p_ in bwd][: len(xs)])
            labels.append("B in thick(A): dist/threshold")
        return plot_loglog(xs, series, labels, path, "shell radius", "worst dist/threshold", f"{A.name} ~ {B.name}: {v.relation}")

    code = {"equivalent": 0, "not-equivalent": 2}.get(v.relation, 3)
    return {"exit": code, "report": report, "csv": (header, rows), "plot": plot, "summary": [f"{A.name} vs {B.name}: {v.relation}"]}


def _h_sandwich(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    h = _resolve_map(cfg, fixture)
    if not (getattr(h, "K1", None) and getattr(h, "K2", None)):
        raise ConfigError(f"map {getattr(h, 'name', '?')!r} has no two-sided constants; sandwich needs K1, K2", "$.map")
    theta = resolve_gauge(cfg.get("gauge", "t"))
    p = cfg["params"]
    n_target = int(p.get("samples", 4000))
    band = float(p.get("band", 1e-6))
    seed = int(cfg["seed"])
    out_g, in_g = sandwich_gauges(theta, h.K1, h.K2)

    # exact image germ (with oracle) when both sides allow it
    M = h.meta.get("matrix") if getattr(h, "meta", None) else None
    Q = A.meta.get("subspace_basis")
    img = None
    if M is not None and Q is not None:
        img = germ_from_subspace((np.asarray(M) @ np.asarray(Q)).T, h.ambient_dim_out, name=f"im-{A.name}")

    sched = np.sort(np.asarray(A.schedule, float))[:4]
    per_shell = max(1, n_target // max(len(sched), 1))
    rng = rng_for(seed, "sandwich")
    checked = decided = ok = violations = 0
    shell_rows = []
    for j, r in enumerate(sched):
        pts = np.atleast_2d(A.sampler(float(r), per_shell, _mix(seed, 71 + j)))
        base_n = np.linalg.norm(pts, axis=1)
        cap = 0.9 * np.asarray(gauge_eval(theta, base_n)) * base_n
        v = rng.normal(size=pts.shape)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        mag = rng.uniform(0.0, 1.0, len(pts)) * cap
        X = pts + v * mag[:, None]
        nx = np.linalg.norm(X, axis=1)
        thr_in = np.asarray(gauge_eval(theta, nx)) * nx
        certified_in = mag <= thr_in * (1.0 - band)  # |v| is an upper distance bound
        Y = h.apply(X)
        ny = np.linalg.norm(Y, axis=1)
        thr_out = np.asarray(gauge_eval(out_g, ny)) * ny
        if img is not None and img.distance_oracle_batch is not None:
            lo = hi = img.distance_oracle_batch(Y)
        else:
            # h(anchor) is a known image point, so |h(x) - h(a)| bounds the
            # distance from above; without an oracle there is no lower bound
            # and violations cannot be certified
            hi = np.linalg.norm(Y - h.apply(pts), axis=1)
            lo = np.zeros(len(Y))
        img_in = hi <= thr_out * (1.0 - band)
        img_out = lo > thr_out * (1.0 + band)
        dec = certified_in & (img_in | img_out)
        bad = certified_in & img_out
        checked += len(X)
        decided += int(dec.sum())
        ok += int((certified_in & img_in).sum())
        violations += int(bad.sum())
        shell_rows.append({"radius": float(r), "checked": int(len(X)), "decided": int(dec.sum()), "violations": int(bad.sum())})
    report = {
        "germ": A.name,
        "map": h.name,
        "K1": h.K1,
        "K2": h.K2,
        "theta": theta.describe(),
        "theta_out": out_g.describe(),
        "theta_in": in_g.describe(),
        "checked": checked,
        "decided": decided,
        "ok": ok,
        "violations": violations,
        "shells": shell_rows,
    }
    header = ["radius", "checked", "decided", "violations"]
    rows = [[s["radius"], s["checked"], s["decided"], s["violations"]] for s in shell_rows]
    plot = lambda path: plot_bars(
        [f"{s['radius']:.2e}" for s in shell_rows],
        [s["violations"] for s in shell_rows],
        path,
        "violations",
        f"{h.name} on thick({A.name}): {violations} violations / {decided} decided",
    )
    if violations > 0:
        code = 2
    elif decided < checked // 2:
        code = 3
    else:
        code = 0
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"sandwich {h.name} on {A.name}: {violations} violations over {decided} decided samples"],
    }


def _ssp_cfg(cfg) -> SSPConfig:
    p = cfg["params"]
    kw = {"seed": int(cfg["seed"])}
    for k in ("eps_grid", "delta_grid"):
        if k in p:
            kw[k] = tuple(float(v) for v in p[k])
    for k in ("n_rays", "n_extra_radii", "n_jitter", "budget"):
        if k in p:
            kw[k] = int(p[k])
    for k in ("direction_tol", "rho"):
        if k in p:
            kw[k] = float(p[k])
    return SSPConfig(**kw)


def _ssp_rows(rep):
    return [
        [rep.mode, c["eps"], c["delta"], int(c["passed"]), c["n_probes"], c["n_fail"], c["worst_ratio"]]
        for c in rep.cells
    ]


def _h_ssp(cfg, fixture):
    default = fixture.ssp_targets[0] if fixture and fixture.ssp_targets else None
    A = _resolve_germ(cfg, "germ", fixture, default_key=default)
    mode = str(cfg["params"].get("mode", "strong"))
    scfg = _ssp_cfg(cfg)
    header = ["mode", "eps", "delta", "passed", "n_probes", "n_fail", "worst_ratio"]
    if mode == "both":
        r1 = ssp_probe(A, cfg=scfg)
        r2 = wssp_probe(A, cfg=scfg)
        agree = r1.verdict == r2.verdict
        report = {
            "germ": A.name,
            "strong": {"verdict": r1.verdict, "per_eps": r1.per_eps, "flags": r1.flags},
            "weak": {"verdict": r2.verdict, "per_eps": r2.per_eps, "flags": r2.flags},
            "agree": agree,
            "config": scfg,
        }
        rows = _ssp_rows(r1) + _ssp_rows(r2)
        reps = [r1, r2]
        if r1.verdict == "abstain" or r2.verdict == "abstain":
            code = 3
        else:
            code = 0 if agree else 2
        summary = [f"{A.name}: strong={r1.verdict} weak={r2.verdict} ({'agree' if agree else 'DISAGREE'})"]
    else:
        rep = ssp_probe(A, cfg=scfg) if mode == "strong" else wssp_probe(A, cfg=scfg)
        report = {"germ": A.name, "mode": rep.mode, "verdict": rep.verdict, "per_eps": rep.per_eps, "flags": rep.flags, "config": scfg}
        rows = _ssp_rows(rep)
        reps = [rep]
        code = {"pass": 0, "fail": 2, "abstain": 3}[rep.verdict]
        summary = [f"{A.name}: {rep.mode} approach probe {rep.verdict}"]

    def plot(path):
        rep = reps[0]
        eps_vals = sorted({c["eps"] for c in rep.cells}, reverse=True)
        delta_vals = sorted({c["delta"] for c in rep.cells})
        grid = np.full((len(delta_vals), len(eps_vals)), np.nan)
        for c in rep.cells:
            grid[delta_vals.index(c["delta"]), eps_vals.index(c["eps"])] = np.log10(max(c["worst_ratio"], 1e-12))
        return plot_heat(eps_vals, delta_vals, grid, path, "eps", "delta", f"{A.name}: log10 worst gap ratio")

    return {"exit": code, "report": report, "csv": (header, rows), "plot": plot, "summary": summary}


def _h_ld_image(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    h = _resolve_map(cfg, fixture)
    p = dict(cfg["params"])
    p["seed"] = int(cfg["seed"])
    rep = ld_image_check(h, A, p)
    report = {
        "germ": A.name,
        "map": h.name,
        "verdict": rep.verdict,
        "hausdorff": rep.hausdorff,
        "dim_image": rep.dim_image,
        "dim_cone_image": rep.dim_cone_image,
        "conf_image": rep.conf_image,
        "conf_cone_image": rep.conf_cone_image,
        "intersection_dim": rep.intersection_dim,
        "tol": rep.meta.get("tol"),
    }
    header = ["quantity", "value"]
    rows = [
        ["hausdorff", rep.hausdorff],
        ["dim_image", rep.dim_image],
        ["dim_cone_image", rep.dim_cone_image],
        ["intersection_dim", rep.intersection_dim],
    ]
    plot = lambda path: plot_bars(
        ["dim h(A)", "dim h(cone A)"], [rep.dim_image, rep.dim_cone_image], path, "dimension",
        f"{h.name} on {A.name}: {rep.verdict} (chord gap {rep.hausdorff:.3f})",
    )
    code = {"match": 0, "mismatch": 2, "abstain": 3}[rep.verdict]
    return {"exit": code, "report": report, "csv": (header, rows), "plot": plot, "summary": [f"{h.name} on {A.name}: {rep.verdict}"]}


def _h_vol(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    theta = resolve_gauge(cfg.get("gauge", "t"))
    p = cfg["params"]
    sched = [float(e) for e in p.get("eps_schedule", DEFAULT_EPS_SCHEDULE)]
    n_samples = int(p.get("n_samples", 200000))
    ests = [
        vol_st_ball(A, theta, eps, n_samples=n_samples, seed=_mix(int(cfg["seed"]), j), method=str(p.get("method", "auto")))
        for j, eps in enumerate(sched)
    ]
    report = {"germ": A.name, "theta": theta.describe(), "estimates": ests}
    header = ["eps", "volume", "ci_halfwidth", "method", "indeterminate_frac"]
    rows = [[e.eps, e.value, e.ci_halfwidth, e.method, e.indeterminate_frac] for e in ests]
    plot = lambda path: plot_loglog(
        [e.eps for e in ests], [[e.value for e in ests]], ["volume"], path, "eps", "volume",
        f"thickening volume of {A.name}",
    )
    code = 3 if any(e.flags.get("high_indeterminate") for e in ests) else 0
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"vol thick({A.name}) at eps={sched[0]:g}: {ests[0].value:.4g} (method {ests[0].method})"],
    }


def _h_vol_ratio(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    keys = list(fixture.germs) if fixture else []
    B = _resolve_germ(cfg, "germ_b", fixture, default_key=keys[1] if len(keys) > 1 else None)
    theta = resolve_gauge(cfg.get("gauge", "t"))
    p = cfg["params"]
    rep = ratio_curve(
        A,
        B,
        theta,
        eps_schedule=[float(e) for e in p.get("eps_schedule", DEFAULT_EPS_SCHEDULE)],
        n_samples=int(p.get("n_samples", 200000)),
        seed=int(cfg["seed"]),
        method=str(p.get("method", "auto")),
    )
    report = {"germ_a": A.name, "germ_b": B.name, "theta": theta.describe(), "ratio": rep}
    header = ["eps", "vol_a", "ci_a", "vol_b", "ci_b", "ratio", "ci_ratio"]
    rows = [
        [e["eps"], e["vol_a"].value, e["vol_a"].ci_halfwidth, e["vol_b"].value, e["vol_b"].ci_halfwidth, e["ratio"], e["ci"]]
        for e in rep.entries
    ]
    plot = lambda path: plot_loglog(
        [e["eps"] for e in rep.entries], [[e["ratio"] for e in rep.entries]], ["volume ratio"], path,
        "eps", "ratio", f"{A.name}/{B.name}: {rep.verdict} (slope {rep.slope:.2f})",
    )
    code = {"decays-to-zero": 0, "no-decay": 2, "indeterminate": 3}[rep.verdict]
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"vol ratio {A.name}/{B.name}: {rep.verdict}, log-log slope {rep.slope:.3f}"],
    }


def _h_ctimes(cfg, fixture):
    A = _resolve_germ(cfg, "germ", fixture)
    theta = resolve_gauge(cfg.get("gauge", "t"))
    p = cfg["params"]
    rep = ctimes_check(
        A,
        theta,
        float(p.get("c", 2.0)),
        eps_schedule=[float(e) for e in p.get("eps_schedule", DEFAULT_EPS_SCHEDULE)],
        n_samples=int(p.get("n_samples", 200000)),
        seed=int(cfg["seed"]),
    )
    report = {"germ": A.name, "theta": theta.describe(), "ctimes": rep}
    header = ["eps", "n_base", "n_scaled", "ratio", "ci"]
    rows = [[e["eps"], e["n_base"], e["n_scaled"], e["ratio"], e["ci"]] for e in rep.entries]
    plot = lambda path: plot_loglog(
        [e["eps"] for e in rep.entries], [[e["ratio"] for e in rep.entries]], [f"c={rep.c:g}"], path,
        "eps", "scaled/base volume", f"{A.name}: mean ratio {rep.mean_ratio:.3f}",
    )
    code = 0 if rep.verdict == "ok" else 3
    return {
        "exit": code,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"ctimes on {A.name} (c={rep.c:g}): mean ratio {rep.mean_ratio:.3f} [{rep.verdict}]"],
    }


def _h_invariant(cfg, fixture):
    keys = list(fixture.germs) if fixture else []
    A = _resolve_germ(cfg, "germ", fixture)
    B = _resolve_germ(cfg, "germ_b", fixture, required=False) if cfg.get("germ_b") else None
    h = _resolve_map(cfg, fixture)
    p = dict(cfg["params"])
    p["seed"] = int(cfg["seed"])
    if fixture is not None and "image" in fixture.germs and keys and A is fixture.germs[keys[0]]:
        # the fixture ships an exact image representation; prefer it
        p.setdefault("image_A", fixture.germs["image"])
    rep = invariant_check(h, A, B, p)
    failed = [k for k, v in rep.hypothesis_flags.items() if not v]
    report = {
        "germ_a": A.name,
        "germ_b": (B or A).name,
        "map": h.name,
        "lhs_dim": rep.lhs_dim,
        "rhs_dim": rep.rhs_dim,
        "equal": rep.equal,
        "lhs_conf": rep.lhs_conf,
        "rhs_conf": rep.rhs_conf,
        "hypothesis_flags": rep.hypothesis_flags,
        "failed_hypotheses": failed,
    }
    header = ["side", "dim", "confidence"]
    rows = [["source", rep.lhs_dim, rep.lhs_conf], ["image", rep.rhs_dim, rep.rhs_conf]]
    plot = lambda path: plot_bars(
        ["dim D(A)&D(B)", "dim D(hA)&D(hB)"], [rep.lhs_dim, rep.rhs_dim], path, "dimension",
        f"{h.name}: {'equal' if rep.equal else 'NOT equal'}",
    )
    if rep.lhs_conf < 0.8 or rep.rhs_conf < 0.8:
        code = 3
    else:
        code = 0 if rep.equal else 2
    summary = [f"dim D&D = {rep.lhs_dim} vs image {rep.rhs_dim}: {'equal' if rep.equal else 'not equal'}"]
    if not rep.equal and failed:
        summary.append(f"violated hypotheses explain the jump: {', '.join(failed)}")
    return {"exit": code, "report": report, "csv": (header, rows), "plot": plot, "summary": summary}


def _h_extend(cfg, fixture):
    p = cfg["params"]
    seed = int(cfg["seed"])
    rng = rng_for(seed, "extend-cli")
    L = float(p.get("L", 1.0))
    if "anchors" in p:
        anchors = np.atleast_2d(np.asarray(p["anchors"], float))
        values = np.asarray(p["values"], float)
    else:
        n_anchors = int(p.get("n_anchors", 12))
        dim = int(p.get("dim", 2))
        anchors = rng.normal(size=(n_anchors, dim))
        anchors /= np.maximum(np.linalg.norm(anchors, axis=1, keepdims=True), 1e-12)
        anchors *= rng.random((n_anchors, 1))
        u = rng.normal(size=dim)
        u /= np.linalg.norm(u)
        values = 0.7 * L * (anchors @ u)  # Lipschitz with constant 0.7 L by construction
    mode = p.get("mode", "inf")
    upper = banach_extension(values, anchors, L, mode="inf")
    lower = banach_extension(values, anchors, L, mode="sup")
    chosen = banach_extension(values, anchors, L, mode=mode)

    restriction_err = float(np.max(np.abs(chosen(anchors) - values)))
    n_probes = int(p.get("probes", 2000))
    dim = anchors.shape[1]
    P = rng.normal(size=(n_probes, dim))
    P /= np.maximum(np.linalg.norm(P, axis=1, keepdims=True), 1e-12)
    P *= 2.0 * rng.random((n_probes, 1))
    a_vals, b_vals, c_vals = upper(P), lower(P), chosen(P)
    order_violations = int(np.sum(b_vals > a_vals + 1e-12))
    half = n_probes // 2
    dn = np.linalg.norm(P[:half] - P[half : 2 * half], axis=1)
    qn = np.abs(c_vals[:half] - c_vals[half : 2 * half])
    quotient = float(np.max(qn / np.maximum(dn, 1e-12)))
    report = {
        "L": L,
        "mode": mode,
        "n_anchors": int(len(anchors)),
        "restriction_error": restriction_err,
        "order_violations": order_violations,
        "max_quotient": quotient,
        "n_probes": n_probes,
    }
    header = _coord_header(dim) + ["upper", "lower", "chosen"]
    rows = [
        [*[float(v) for v in P[i]], float(a_vals[i]), float(b_vals[i]), float(c_vals[i])]
        for i in range(min(n_probes, 1000))
    ]

    def plot(path):
        order = np.argsort(a_vals - b_vals)
        return plot_curves(
            np.arange(len(order)),
            [a_vals[order], b_vals[order], c_vals[order]],
            ["upper envelope", "lower envelope", "chosen"],
            path,
            "probe (sorted by envelope gap)",
            "value",
            f"L={L:g} extension of {len(anchors)} anchors",
        )

    passed = restriction_err <= 1e-12 and order_violations == 0 and quotient <= L * (1.0 + 1e-6)
    return {
        "exit": 0 if passed else 2,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [
            f"extension: restriction error {restriction_err:.2e}, quotient {quotient:.6f} (L={L:g}), "
            f"{order_violations} envelope-order violations"
        ],
    }


def _px_float(x, t0: float) -> float:
    return float(sum(float(c) * t0 ** float(e) for e, c in x.terms))


def _h_puiseux(cfg, fixture):
    checks = []

    def rec(name, ok, detail):
        checks.append({"name": name, "ok": bool(ok), "detail": detail})

    e = px_t()
    two = px_const(2)
    s = px_add(px_add(PX_ONE, e), px_sub(PX_ONE, e))
    rec("add-cancel", px_compare(s, two) == "=", f"(1+t) + (1-t) = {px_print(s)}")
    sq = px_mul(e, e)
    rec("mul-square", px_compare(sq, px_t(exp=2)) == "=", f"t*t = {px_print(sq)}")
    prod = px_mul(px_inv(px_sub(PX_ONE, e)), px_sub(PX_ONE, e))
    rec("inv-roundtrip", prod == PX_ONE, f"(1-t)^-1 * (1-t) = {px_print(prod)} through truncation")
    qs = [px_const(q) for q in (1, 10**-6, 10**-2, 1000)]
    rec("infinitesimal", all(px_lt(e, q) for q in qs), "t < q for every tested rational q > 0")
    rec("non-archimedean", px_lt(px_mul(px_const(10**6), e), PX_ONE), "10^6 * t < 1")
    rec("max-norm", px_compare(px_norm([e, sq]), e) == "=", f"|(t, t^2)| = {px_print(px_norm([e, sq]))}")
    d = px_dist_set([[px_const(0), px_const(0)]], [[e, sq]])
    rec("dist-interval", px_compare(d.right_end, e) == "=", f"dist = [0, {px_print(d.right_end)}]")
    strip = cell(0, "x", 1, "t + x")
    v1 = px_vol_cell(strip)
    rec("strip-volume", px_compare(v1.right_end, e) == "=", f"vol = [0, {px_print(v1.right_end)}]")
    square = cell(0, "0", 1, "1")
    rec("square-volume", px_compare(px_vol_cell(square).right_end, PX_ONE) == "=", "vol = [0, 1]")
    tri = cell(0, "0", 1, "x")
    rec("triangle-volume", px_compare(px_vol_cell(tri).right_end, px_const("1/2")) == "=", "vol = [0, 1/2]")
    scal = px_vol_scaling_check(strip, 2)
    rec("strip-scaling", scal["ratio_exact"], "doubling the gap exactly doubles the volume")

    n_ok = sum(c["ok"] for c in checks)
    report = {"checks": checks, "passed": n_ok, "total": len(checks)}
    header = ["check", "ok", "detail"]
    rows = [[c["name"], int(c["ok"]), c["detail"]] for c in checks]

    def plot(path):
        t0 = 0.1
        xs = np.linspace(0.0, 1.0, 200)

        # evaluate the strip and triangle boundary polynomials numerically at t0
        def poly_at(pp, x):
            acc = 0.0
            for c in reversed(pp.coeffs):
                acc = acc * x + _px_float(c, t0)
            return acc

        series = [
            [poly_at(strip.psi, x) for x in xs],
            [poly_at(strip.phi, x) for x in xs],
            [poly_at(tri.phi, x) for x in xs],
        ]
        return plot_curves(xs, series, ["strip lower", "strip upper", "triangle upper"], path, "x", "y", f"cell boundaries at t = {t0}")

    return {
        "exit": 0 if n_ok == len(checks) else 2,
        "report": report,
        "csv": (header, rows),
        "plot": plot,
        "summary": [f"exact arithmetic checks: {n_ok}/{len(checks)} hold"],
    }


_HANDLERS = {
    "dirset": _h_dirset,
    "cone": _h_cone,
    "st-fit": _h_st_fit,
    "st-equiv": _h_st_equiv,
    "sandwich": _h_sandwich,
    "ssp": _h_ssp,
    "ld-image": _h_ld_image,
    "vol": _h_vol,
    "vol-ratio": _h_vol_ratio,
    "ctimes": _h_ctimes,
    "invariant": _h_invariant,
    "extend": _h_extend,
    "puiseux": _h_puiseux,
}


def run(config: dict) -> dict:
    """Run one experiment; returns {exit, paths, report}. Raises
    ConfigError for schema/resolution problems (exit 1 at the CLI)."""
    cfg = validate_config(config)
    fixture = _get_fixture(cfg)
    sub = cfg["subcommand"]
    t0 = perf_counter()
    result = _HANDLERS[sub](cfg, fixture)
    elapsed = perf_counter() - t0

    base = os.path.join(cfg["out"], sub)
    report = {
        "subcommand": sub,
        "config": cfg,
        "operations": _OPERATIONS[sub],
        "exit_code": result["exit"],
        **result["report"],
    }
    paths = {"report": write_report(report, base + "-report.json")}
    header, rows = result["csv"]
    paths["data"] = write_csv(base + "-data.csv", header, rows)
    if cfg["plot"] and result.get("plot") is not None:
        paths["plot"] = result["plot"](base + "-plot.png")
    return {"exit": result["exit"], "paths": paths, "report": report, "summary": result["summary"], "elapsed": elapsed}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="germ-lens",
        description="Estimators for direction sets, thickenings and volumes of set-germs at the origin.",
    )
    ap.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS, help="experiment to run (may come from --config)")
    ap.add_argument("--config", help="JSON config file; command-line flags override its entries")
    ap.add_argument("--seed", type=int, help="RNG seed (default 0)")
    ap.add_argument("--out", help="output directory (default .)")
    ap.add_argument("--threads", type=int, help="worker cap, recorded in the report; estimators are vectorized in-process")
    ap.add_argument("--fixture", help="catalog fixture supplying germs and maps")
    ap.add_argument("--germ", help="germ key within the fixture, or fixture.key")
    ap.add_argument("--germ-b", dest="germ_b", help="second germ for two-set subcommands")
    ap.add_argument("--map", dest="map_", help="map key within the fixture or the standard packs")
    ap.add_argument("--gauge", help="gauge shorthand like t, t^2, 0.5*t^0.75")
    ap.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        if args.subcommand:
            cfg["subcommand"] = args.subcommand
        for key, val in (
            ("seed", args.seed),
            ("out", args.out),
            ("threads", args.threads),
            ("fixture", args.fixture),
            ("germ", args.germ),
            ("germ_b", args.germ_b),
            ("map", args.map_),
            ("gauge", args.gauge),
        ):
            if val is not None:
                cfg[key] = val
        if args.no_plot:
            cfg["plot"] = False
        if "subcommand" not in cfg:
            print("error: no subcommand given (positional argument or config entry)", file=sys.stderr)
            return 1
        res = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except EmptyGermError as exc:
        print(f"empty germ: {exc}", file=sys.stderr)
        return 1
    for line in res["summary"]:
        print(line)
    for kind, path in res["paths"].items():
        print(f"{kind}: {path}")
    print(f"elapsed: {res['elapsed']:.2f}s; exit {res['exit']}")
    return res["exit"]


if __name__ == "__main__":
    sys.exit(main())
