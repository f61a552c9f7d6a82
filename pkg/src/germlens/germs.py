"""Set-germs at the origin: membership, shell sampling, distance estimation.

A germ is handed around as a GermSet: an ambient dimension, a membership
predicate, a sampler that produces points with norms inside a requested
shell [r/2, r], an optional exact distance oracle, and an optional
germ-specific nearest-point refiner. Everything downstream (directions,
sea-tangle tests, SSP probes, volumes) consumes only this interface.

Norms are Euclidean throughout this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._rng import rng_for

MEMBERSHIP_TOL = 1e-10
DEFAULT_BUDGET = 2000


class EmptyGermError(RuntimeError):
    """Raised when a sampler cannot produce any point on a scheduled shell."""


def geometric_schedule(r0: float = 0.1, ratio: float = 0.5, count: int = 12) -> np.ndarray:
    """Default shell radii r0 * ratio^j, j = 0..count-1."""
    if not (0 < ratio < 1) or r0 <= 0 or count < 1:
        raise ValueError("bad schedule parameters")
    return r0 * ratio ** np.arange(count)


def log_schedule(r_hi: float, r_lo: float, count: int = 12) -> np.ndarray:
    """Log-spaced shell radii from r_hi down to r_lo."""
    return np.geomspace(r_hi, r_lo, count)


@dataclass
class GermSet:
    """A set-germ at 0 in R^n.

    sampler(radius, count, seed) must return points x with membership
    passing and r/2 <= |x| <= r. distance_oracle, when present, is exact
    (solver-backed oracles are accurate far below MEMBERSHIP_TOL).
    nearest_point(x, budget, seed) -> (point, dist) provides a tight upper
    bound with a witness for germs without a closed-form oracle.
    """

    ambient_dim: int
    kind: str  # semialgebraic | parametric-curve | point-sequence | cone | mapped
    membership: Callable[[np.ndarray, float], bool]
    sampler: Callable[[float, int, int], np.ndarray]
    distance_oracle: Optional[Callable[[np.ndarray], float]] = None
    distance_oracle_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nearest_point: Optional[Callable[[np.ndarray, int, int], tuple]] = None
    name: str = ""
    schedule: np.ndarray = field(default_factory=geometric_schedule)
    meta: dict = field(default_factory=dict)

    def sample_shells(self, per_shell: int, seed: int, schedule=None):
        """Sample every shell of the schedule; returns (points, radii)."""
        sched = self.schedule if schedule is None else np.asarray(schedule, float)
        pts, rad = [], []
        for j, r in enumerate(sched):
            p = self.sampler(float(r), per_shell, _mix(seed, j))
            if len(p):
                pts.append(np.atleast_2d(p))
                rad.append(np.full(len(p), r))
        if not pts:
            raise EmptyGermError(f"{self.name or 'germ'}: no points on any shell")
        return np.vstack(pts), np.concatenate(rad)


def _mix(seed: int, j: int) -> int:
    return (int(seed) * 1000003 + 7919 * (j + 1)) & (2**63 - 1)


def _norms(points: np.ndarray) -> np.ndarray:
    # max-abs prescale: squaring raw coordinates underflows once
    # |x| < ~1.5e-154, which matters for schedules that run to 1e-200
    pts = np.atleast_2d(points)
    scale = np.max(np.abs(pts), axis=1)
    safe = np.where(scale > 0.0, scale, 1.0)
    return scale * np.linalg.norm(pts / safe[:, None], axis=1)


# ---------------------------------------------------------------------------
# distance estimation


def distance_estimate(x, A: GermSet, budget: int = DEFAULT_BUDGET, seed: int = 0):
    """Bracket dist(x, A): returns (lower, upper).

    Exact oracle collapses the interval. Otherwise the upper bound comes
    from the best candidate found within the budget (germ-specific
    refinement when available, sampler search otherwise) and the lower
    bound stays 0. Both bounds are monotone in the budget for a fixed
    seed: candidate streams are nested.
    """
    x = np.asarray(x, dtype=float)
    if A.distance_oracle is not None:
        d = float(A.distance_oracle(x))
        return (d, d)
    _, up = nearest_with_distance(x, A, budget, seed)
    return (0.0, up)


def nearest_with_distance(x, A: GermSet, budget: int = DEFAULT_BUDGET, seed: int = 0):
    """(witness point or None, upper bound on dist(x, A))."""
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        # 0 is adherent to every germ here, so dist(0, A) = 0
        return (np.zeros(A.ambient_dim), 0.0)
    if A.nearest_point is not None:
        return A.nearest_point(x, budget, seed)
    if A.distance_oracle is not None:
        return (None, float(A.distance_oracle(x)))
    # fall back to nested sampler chunks on shells around |x|
    sched = np.asarray(A.schedule, float)
    near = sched[(sched >= nx / 8.0) & (sched <= 8.0 * nx)]
    if near.size == 0:
        near = np.array([sched[np.argmin(np.abs(np.log(sched) - np.log(nx)))]])
    chunk = 32
    n_chunks = max(1, budget // (chunk * len(near)))
    best_d, best_p = np.inf, None
    for i in range(n_chunks):
        for j, r in enumerate(near):
            try:
                pts = A.sampler(float(r), chunk, _mix(seed, 1000 * i + j))
            except EmptyGermError:
                continue
            if len(pts) == 0:
                continue
            d = np.linalg.norm(np.atleast_2d(pts) - x, axis=1)
            k = int(np.argmin(d))
            if d[k] < best_d:
                best_d, best_p = float(d[k]), np.atleast_2d(pts)[k]
    if best_p is None:
        return (None, np.inf)
    return (best_p, best_d)


def _golden_min(f, a: float, b: float, iters: int = 60):
    """Golden-section minimum of a unimodal-enough f on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _curve_nearest(curve, t_lo: float, t_hi: float, x: np.ndarray, budget: int):
    """Nearest point on curve(t), t in [t_lo, t_hi], by nested dyadic grid
    plus golden-section polish. Grids are nested so the result improves
    monotonically with budget."""
    level = int(np.clip(np.log2(max(budget, 16) / 16.0), 0, 6))
    n = 16 * 2**level + 1
    ts = np.geomspace(t_lo, t_hi, n)
    pts = np.atleast_2d(curve(ts))
    d = _norms(pts - x)
    k = int(np.argmin(d))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, n - 1)]

    def fd(t):
        return float(_norms(np.atleast_2d(curve(np.array([t])))[0] - x)[0])

    t_best, d_best = _golden_min(fd, lo, hi)
    if d_best < d[k]:
        return np.atleast_2d(curve(np.array([t_best])))[0], d_best
    return pts[k], float(d[k])


# ---------------------------------------------------------------------------
# constructors


def germ_from_subspace(basis, ambient_dim: int, name: str = "", schedule=None) -> GermSet:
    """Linear subspace span(basis) through 0, with exact distances."""
    B = np.atleast_2d(np.asarray(basis, dtype=float)).T  # (n, k)
    if B.shape[0] != ambient_dim:
        raise ValueError("basis vectors must have length ambient_dim")
    Q, _ = np.linalg.qr(B)
    k = Q.shape[1]

    def oracle(x):
        x = np.asarray(x, float)
        return float(_norms(x - Q @ (Q.T @ x))[0])

    def oracle_batch(pts):
        pts = np.atleast_2d(pts)
        proj = (pts @ Q) @ Q.T
        return _norms(pts - proj)

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        return oracle(x) <= tol * max(float(_norms(x)[0]), 1e-300)

    def sampler(r, count, seed):
        rng = rng_for(seed, "subspace", name)
        coef = rng.normal(size=(count, k))
        coef /= np.linalg.norm(coef, axis=1, keepdims=True)
        t = rng.uniform(r / 2.0, r, size=count)
        return (coef * t[:, None]) @ Q.T

    return GermSet(
        ambient_dim=ambient_dim,
        kind="semialgebraic",
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=oracle_batch,
        name=name,
        schedule=geometric_schedule() if schedule is None else np.asarray(schedule, float),
        meta={"subspace_basis": Q, "definable": True, "local_dim": k},
    )


def germ_from_ray(direction, name: str = "", schedule=None) -> GermSet:
    """Half-line {t*d : t >= 0} with exact distances."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    n = d.size

    def oracle(x):
        x = np.asarray(x, float)
        t = float(x @ d)
        if t <= 0:
            return float(_norms(x)[0])
        return float(_norms(x - t * d)[0])

    def oracle_batch(pts):
        pts = np.atleast_2d(pts)
        t = np.clip(pts @ d, 0.0, None)
        return _norms(pts - t[:, None] * d)

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        return oracle(x) <= tol * max(float(_norms(x)[0]), 1e-300)

    def sampler(r, count, seed):
        rng = rng_for(seed, "ray", name)
        t = rng.uniform(r / 2.0, r, size=count)
        return t[:, None] * d

    return GermSet(
        ambient_dim=n,
        kind="semialgebraic",
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=oracle_batch,
        name=name,
        schedule=geometric_schedule() if schedule is None else np.asarray(schedule, float),
        meta={"ray_direction": d, "definable": True, "local_dim": 1},
    )


def full_space_germ(ambient_dim: int, name: str = "full-space") -> GermSet:
    def sampler(r, count, seed):
        rng = rng_for(seed, "full", name)
        v = rng.normal(size=(count, ambient_dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        t = rng.uniform(r / 2.0, r, size=count)
        return v * t[:, None]

    return GermSet(
        ambient_dim=ambient_dim,
        kind="semialgebraic",
        membership=lambda x, tol=MEMBERSHIP_TOL: True,
        sampler=sampler,
        distance_oracle=lambda x: 0.0,
        distance_oracle_batch=lambda pts: np.zeros(len(np.atleast_2d(pts))),
        name=name,
        meta={"definable": True, "local_dim": ambient_dim},
    )


def germ_from_parametric(
    curve,
    ambient_dim: int,
    name: str = "",
    t_hi: float = 1.0,
    both_signs: bool = False,
    schedule=None,
    meta: dict | None = None,
) -> GermSet:
    """Curve germ t -> curve(t), t in (0, t_hi], with |curve(t)| -> 0.

    The norm along the curve must be increasing in t near 0 (checked on a
    dyadic grid at construction); the sampler then lands exact target
    norms by bisection. both_signs adds the mirror branch -curve(t),
    which is how graphs over a two-sided axis are represented.
    """
    sched = geometric_schedule() if schedule is None else np.asarray(schedule, float)

    def cnorm(ts):
        return _norms(curve(np.asarray(ts, float)))

    # norm table for brackets; grows downward on demand so probes far
    # below the schedule still resolve
    t_cache = [t_hi]
    while cnorm([t_cache[-1]])[0] > sched.min() / 4.0:
        t_cache.append(t_cache[-1] / 2.0)
        if len(t_cache) > 4000:
            raise ValueError("curve norm does not reach the finest shell")
    tab = {"t": np.array(t_cache[::-1])}
    tab["n"] = cnorm(tab["t"])
    if np.any(np.diff(tab["n"]) <= 0):
        raise ValueError("curve norm must increase with t on the working range")

    def _extend_down(s: float):
        guard = 0
        while tab["n"][0] > s / 4.0 and tab["t"][0] > 5e-300:
            t_new = tab["t"][0] / 2.0
            tab["t"] = np.concatenate([[t_new], tab["t"]])
            tab["n"] = np.concatenate([cnorm([t_new]), tab["n"]])
            guard += 1
            if guard > 2000:
                break

    def t_for_norm(s: float) -> float:
        if s < tab["n"][0]:
            _extend_down(s)
        j = int(np.searchsorted(tab["n"], s))
        if j == 0:
            return float(tab["t"][0])
        lo, hi = tab["t"][j - 1], tab["t"][min(j, len(tab["t"]) - 1)]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if cnorm([mid])[0] < s:
                lo = mid
            else:
                hi = mid
        return float(0.5 * (lo + hi))

    def sampler(r, count, seed):
        rng = rng_for(seed, "curve", name)
        targets = rng.uniform(r / 2.0, r, size=count)
        ts = np.array([t_for_norm(s) for s in targets])
        pts = np.atleast_2d(curve(ts))
        if both_signs:
            flip = rng.random(count) < 0.5
            pts[flip] *= -1.0
        return pts

    def nearest(x, budget=DEFAULT_BUDGET, seed=0):
        x = np.asarray(x, float)
        nx = float(_norms(x)[0])
        if nx < tab["n"][0]:
            _extend_down(nx)
        t_mid = t_for_norm(min(max(nx, tab["n"][0]), tab["n"][-1]))
        windows = [(t_mid / 8.0, min(t_mid * 8.0, t_hi))]
        best_p, best_d = None, np.inf
        for lo, hi in windows:
            lo = max(lo, tab["t"][0] / 4.0)
            p, d = _curve_nearest(curve, lo, hi, x, budget)
            if both_signs:
                p2, d2 = _curve_nearest(lambda ts: -np.atleast_2d(curve(ts)), lo, hi, x, budget)
                if d2 < d:
                    p, d = p2, d2
            if d < best_d:
                best_p, best_d = p, d
        return best_p, float(best_d)

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        nx = float(_norms(x)[0])
        if nx == 0:
            return True
        _, d = nearest(x, budget=512)
        return d <= tol * nx

    return GermSet(
        ambient_dim=ambient_dim,
        kind="parametric-curve",
        membership=member,
        sampler=sampler,
        nearest_point=nearest,
        name=name,
        schedule=sched,
        meta={"local_dim": 1, **(meta or {})},
    )


def germ_from_sequence(
    point_fn,
    ambient_dim: int,
    name: str = "",
    m_start: int = 1,
    m_max: int = 10**10,
    schedule=None,
    meta: dict | None = None,
) -> GermSet:
    """Discrete germ {point_fn(m)} with norms decreasing in the index.

    point_fn takes an integer array and returns (k, n) points. Samplers
    return every available point on a shell when there are fewer than
    requested; discreteness is the point of these fixtures.
    """
    sched = geometric_schedule() if schedule is None else np.asarray(schedule, float)

    def seqnorm(ms):
        return _norms(point_fn(np.asarray(ms)))

    def first_index_with_norm_leq(s: float) -> int:
        # exponential then binary search; norms decrease with m
        lo, hi = m_start, m_start + 1
        while seqnorm([hi])[0] > s:
            lo, hi = hi, hi * 2
            if hi > m_max:
                raise EmptyGermError(f"{name}: no index with norm <= {s}")
        while lo < hi:
            mid = (lo + hi) // 2
            if seqnorm([mid])[0] <= s:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def indices_in_shell(r: float):
        top = first_index_with_norm_leq(r)
        try:
            bot = first_index_with_norm_leq(r / 2.0)
        except EmptyGermError:
            bot = min(top + 10**6, m_max)
        if bot - top > 500000:
            # huge index window: thin it deterministically
            ms = np.unique(np.geomspace(max(top, 1), bot + 1, 500000).astype(np.int64))
        else:
            ms = np.arange(top, bot + 1)  # bot itself may sit exactly on r/2
        if ms.size == 0:
            return ms
        nn = seqnorm(ms)
        return ms[(nn >= r / 2.0) & (nn <= r)]

    def sampler(r, count, seed):
        ms = indices_in_shell(r)
        if ms.size == 0:
            raise EmptyGermError(f"{name}: shell [{r / 2:.3g}, {r:.3g}] holds no sequence point")
        if ms.size > count:
            rng = rng_for(seed, "seq", name)
            ms = np.sort(rng.choice(ms, size=count, replace=False))
        return np.atleast_2d(point_fn(ms))

    def nearest(x, budget=DEFAULT_BUDGET, seed=0):
        x = np.asarray(x, float)
        nx = float(_norms(x)[0])
        try:
            m_star = first_index_with_norm_leq(nx)
        except EmptyGermError:
            m_star = m_max
        lo = max(m_start, m_star // 8)
        hi = min(m_max, max(m_star * 8, m_star + 8))
        dense = np.arange(max(lo, m_star - 256), min(hi, m_star + 256) + 1)
        spread = np.unique(np.geomspace(max(lo, 1), hi, 128).astype(np.int64))
        ms = np.unique(np.concatenate([dense, spread, [m_start]]))
        pts = np.atleast_2d(point_fn(ms))
        d = _norms(pts - x)
        k = int(np.argmin(d))
        return pts[k], float(d[k])

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, float)
        nx = float(_norms(x)[0])
        if nx == 0:
            return True
        _, d = nearest(x, budget=256)
        return d <= tol * nx

    return GermSet(
        ambient_dim=ambient_dim,
        kind="point-sequence",
        membership=member,
        sampler=sampler,
        nearest_point=nearest,
        name=name,
        schedule=sched,
        meta={"local_dim": 0, **(meta or {})},
    )


class Polynomial:
    """Sparse multivariate polynomial: list of (coef, exponent tuple)."""

    def __init__(self, terms, nvars: int):
        self.terms = [(float(c), tuple(int(e) for e in es)) for c, es in terms]
        self.nvars = nvars
        for _, es in self.terms:
            if len(es) != nvars:
                raise ValueError("exponent tuple arity mismatch")

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(len(pts))
        for c, es in self.terms:
            mono = np.ones(len(pts))
            for j, e in enumerate(es):
                if e:
                    mono = mono * pts[:, j] ** e
            out += c * mono
        return out

    def scale_at(self, norms):
        """Sum of |coef| * |x|^deg per term: the natural size of p near x."""
        norms = np.asarray(norms, dtype=float)
        out = np.zeros_like(norms)
        for c, es in self.terms:
            out += abs(c) * norms ** sum(es)
        return out


def semialgebraic_membership(polys, signs):
    """Membership from sign conditions, with degree-aware relative tolerance.

    Each condition compares p(x) to tol * (sum_i |c_i| |x|^{deg_i}), so an
    equation stays meaningful on shells of any radius.
    """

    def member(x, tol=MEMBERSHIP_TOL):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        nx = _norms(x)
        ok = np.ones(len(x), dtype=bool)
        for p, s in zip(polys, signs):
            v = p(x)
            sc = p.scale_at(nx) + 1e-300
            if s == "=0":
                ok &= np.abs(v) <= tol * sc
            elif s == "<=0":
                ok &= v <= tol * sc
            elif s == ">=0":
                ok &= v >= -tol * sc
            else:
                raise ValueError(f"unknown sign condition {s!r}")
        return bool(ok.all()) if len(ok) == 1 else ok

    return member


def generic_semialgebraic_sampler(polys, signs, ambient_dim: int, name: str = ""):
    """Rejection sampling on shells, with 1-D bisection along random
    chords to land on equation zero sets."""
    member = semialgebraic_membership(polys, signs)
    eqs = [p for p, s in zip(polys, signs) if s == "=0"]

    def sampler(r, count, seed):
        rng = rng_for(seed, "semialg", name)
        out = []
        attempts = 0
        max_attempts = 400 * count
        while len(out) < count and attempts < max_attempts:
            attempts += 1
            v = rng.normal(size=ambient_dim)
            v *= rng.uniform(r / 2.0, r) / np.linalg.norm(v)
            if not eqs:
                if member(v) and r / 2.0 <= np.linalg.norm(v) <= r:
                    out.append(v)
                continue
            d = rng.normal(size=ambient_dim)
            d /= np.linalg.norm(d)
            p = eqs[0]
            ss = np.linspace(-r / 2.0, r / 2.0, 17)
            vals = p(v[None, :] + ss[:, None] * d[None, :])
            sgn = np.sign(vals)
            idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
            if idx.size == 0:
                continue
            a, b = ss[idx[0]], ss[idx[0] + 1]
            fa = vals[idx[0]]
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = p((v + mid * d)[None, :])[0]
                if fa * fm <= 0:
                    b = mid
                else:
                    a, fa = mid, fm
            x = v + 0.5 * (a + b) * d
            if member(x) and r / 2.0 <= np.linalg.norm(x) <= r:
                out.append(x)
        if not out:
            raise EmptyGermError(f"{name}: found no points on shell [{r / 2:.3g}, {r:.3g}]")
        return np.array(out)

    return sampler


def semialgebraic_germ(
    polys,
    signs,
    ambient_dim: int,
    name: str = "",
    sampler=None,
    distance_oracle=None,
    distance_oracle_batch=None,
    nearest_point=None,
    schedule=None,
    meta: dict | None = None,
) -> GermSet:
    member = semialgebraic_membership(polys, signs)
    if sampler is None:
        sampler = generic_semialgebraic_sampler(polys, signs, ambient_dim, name)
    return GermSet(
        ambient_dim=ambient_dim,
        kind="semialgebraic",
        membership=member,
        sampler=sampler,
        distance_oracle=distance_oracle,
        distance_oracle_batch=distance_oracle_batch,
        nearest_point=nearest_point,
        name=name,
        schedule=geometric_schedule() if schedule is None else np.asarray(schedule, float),
        meta={"definable": True, **(meta or {})},
    )


def make_germ(spec: dict) -> GermSet:
    """Build a GermSet from a configuration dictionary.

    Kinds: semialgebraic (polynomial sign conditions), parametric-curve
    (component expressions in t), point-sequence (component expressions
    in m), cone and mapped are produced by the direction/map machinery
    rather than parsed from configs.
    """
    from .exprs import compile_expr

    kind = spec.get("kind")
    name = spec.get("name", kind or "germ")
    n = int(spec.get("ambient_dim", 0))
    if kind == "semialgebraic":
        polys = [Polynomial([(t[-1], t[:-1]) for t in p["terms"]], n) for p in spec["polynomials"]]
        signs = spec.get("signs", ["=0"] * len(polys))
        return semialgebraic_germ(polys, signs, n, name=name)
    if kind == "parametric-curve":
        comps = [compile_expr(s, var="t") for s in spec["components"]]

        def curve(ts):
            ts = np.asarray(ts, float)
            return np.stack([c(ts) for c in comps], axis=-1)

        return germ_from_parametric(
            curve,
            n,
            name=name,
            t_hi=float(spec.get("t_hi", 1.0)),
            both_signs=bool(spec.get("both_signs", False)),
        )
    if kind == "point-sequence":
        comps = [compile_expr(s, var="m") for s in spec["components"]]

        def point_fn(ms):
            ms = np.asarray(ms, dtype=float)
            return np.stack([c(ms) for c in comps], axis=-1)

        return germ_from_sequence(point_fn, n, name=name)
    raise ValueError(f"cannot build germ of kind {kind!r} from a config")


def apply_map_germ(
    h,
    base: GermSet,
    name: str = "",
    distance_oracle=None,
    distance_oracle_batch=None,
    membership=None,
    nearest_point=None,
    schedule=None,
    meta: dict | None = None,
) -> GermSet:
    """Image germ h(base). The sampler brackets base radii adaptively so
    image norms land in the requested shell; this works for maps whose
    norm distortion is monotone near 0, including the non-bi-Lipschitz
    coordinate-crushing fixtures."""
    fwd = h.forward if hasattr(h, "forward") else h
    inv = getattr(h, "inverse", None)
    out_dim = getattr(h, "ambient_dim_out", base.ambient_dim)

    def apply_pts(pts):
        pts = np.atleast_2d(pts)
        return np.array([np.asarray(fwd(p), dtype=float) for p in pts])

    def sampler(r, count, seed):
        out = []
        lo_exp, hi_exp = np.log10(r) - 0.5, np.log10(r) + 0.5
        for trial in range(24):
            radii = np.geomspace(10.0**lo_exp, 10.0**hi_exp, 8)
            radii = radii[(radii > 0)]
            got_low = got_high = False
            for j, rb in enumerate(radii):
                try:
                    pts = base.sampler(float(rb), max(count // 4, 8), _mix(seed, 37 * trial + j))
                except EmptyGermError:
                    continue
                img = apply_pts(pts)
                nn = _norms(img)
                got_low |= bool(np.any(nn < r / 2.0))
                got_high |= bool(np.any(nn > r))
                keep = (nn >= r / 2.0) & (nn <= r)
                out.extend(img[keep])
            if len(out) >= count:
                break
            # widen the base bracket toward whichever side is missing
            if not got_low:
                lo_exp -= 1.0
            if not got_high:
                hi_exp += 1.0
            if got_low and got_high:
                lo_exp -= 0.25
                hi_exp += 0.25
        if not out:
            raise EmptyGermError(f"{name}: image sampler found no points in shell [{r/2:.3g}, {r:.3g}]")
        out = np.array(out[: max(count, 1)])
        return out

    if membership is None:
        if inv is not None:
            def membership(y, tol=MEMBERSHIP_TOL):  # noqa: F811
                return base.membership(np.asarray(inv(np.asarray(y, float)), float), tol)
        else:
            def membership(y, tol=MEMBERSHIP_TOL):  # noqa: F811
                _, d = nearest_with_distance(np.asarray(y, float), mapped, budget=512)
                return d <= tol * max(np.linalg.norm(y), 1e-300)

    map_definable = bool(getattr(h, "meta", {}).get("definable_map", False)) if hasattr(h, "meta") else False
    mapped = GermSet(
        ambient_dim=out_dim,
        kind="mapped",
        membership=membership,
        sampler=sampler,
        distance_oracle=distance_oracle,
        distance_oracle_batch=distance_oracle_batch,
        nearest_point=nearest_point,
        name=name or f"image-{base.name}",
        schedule=base.schedule if schedule is None else np.asarray(schedule, float),
        meta={
            "base": base.name,
            "definable": bool(base.meta.get("definable", False)) and map_definable,
            **(meta or {}),
        },
    )
    return mapped


def union_germ(parts, name: str = "", schedule=None) -> GermSet:
    """Finite union of germs in the same ambient space. Samplers split the
    requested count randomly across parts; distances take the minimum."""
    parts = list(parts)
    n = parts[0].ambient_dim
    if any(p.ambient_dim != n for p in parts):
        raise ValueError("union parts must share the ambient dimension")

    def member(x, tol=MEMBERSHIP_TOL):
        return any(p.membership(x, tol) for p in parts)

    def sampler(r, count, seed):
        rng = rng_for(seed, "union", name)
        assign = rng.integers(0, len(parts), size=count)
        out = []
        for i, p in enumerate(parts):
            k = int((assign == i).sum())
            if k == 0:
                continue
            try:
                out.append(np.atleast_2d(p.sampler(r, k, _mix(seed, 17 * i + 1))))
            except EmptyGermError:
                continue
        if not out:
            raise EmptyGermError(f"{name}: no part produced points on shell up to {r:.3g}")
        return np.vstack(out)

    oracle = None
    oracle_batch = None
    if all(p.distance_oracle is not None for p in parts):
        oracle = lambda x: min(p.distance_oracle(x) for p in parts)
    if all(p.distance_oracle_batch is not None for p in parts):
        def oracle_batch(pts):
            return np.min([p.distance_oracle_batch(pts) for p in parts], axis=0)

    nearest = None
    if all(p.nearest_point is not None for p in parts):
        def nearest(x, budget=DEFAULT_BUDGET, seed=0):
            best = (None, np.inf)
            for p in parts:
                cand = p.nearest_point(x, budget, seed)
                if cand[1] < best[1]:
                    best = cand
            return best

    return GermSet(
        ambient_dim=n,
        kind=parts[0].kind,
        membership=member,
        sampler=sampler,
        distance_oracle=oracle,
        distance_oracle_batch=oracle_batch,
        nearest_point=nearest,
        name=name or "union",
        schedule=parts[0].schedule if schedule is None else np.asarray(schedule, float),
        meta={
            "definable": all(bool(p.meta.get("definable", False)) for p in parts),
            "local_dim": max(int(p.meta.get("local_dim", 0)) for p in parts),
        },
    )


def scale_germ(A: GermSet, lam: float, name: str = "") -> GermSet:
    """The dilated germ lam * A; direction sets are dilation invariant."""
    lam = float(lam)

    def sampler(r, count, seed):
        return lam * A.sampler(r / lam, count, seed)

    oracle = None
    if A.distance_oracle is not None:
        oracle = lambda x: lam * A.distance_oracle(np.asarray(x, float) / lam)
    nearest = None
    if A.nearest_point is not None:
        def nearest(x, budget=DEFAULT_BUDGET, seed=0):
            p, d = A.nearest_point(np.asarray(x, float) / lam, budget, seed)
            return (None if p is None else lam * p), lam * d

    return GermSet(
        ambient_dim=A.ambient_dim,
        kind=A.kind,
        membership=lambda x, tol=MEMBERSHIP_TOL: A.membership(np.asarray(x, float) / lam, tol),
        sampler=sampler,
        distance_oracle=oracle,
        nearest_point=nearest,
        name=name or f"{A.name}-x{lam:g}",
        schedule=A.schedule,
        meta=dict(A.meta),
    )
