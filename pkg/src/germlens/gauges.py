"""Gauges: odd, strictly increasing, continuous width functions through 0.

A gauge assigns a relative neighbourhood width theta(t) to each scale t.
Monomial gauges C*t^alpha cover the polynomially bounded cases; tabulated
gauges represent measured widths; scale/max combinators keep the family
closed under the transforms the inclusion machinery produces.
"""

from __future__ import annotations

import numpy as np


class GaugeDomainError(ValueError):
    pass


class Gauge:
    """Base class. Subclasses implement _eval_pos on t >= 0."""

    t_max: float = 16.0

    def _eval_pos(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return gauge_eval(self, t)

    def describe(self) -> dict:
        return {"form": type(self).__name__, "t_max": self.t_max}


class MonomialGauge(Gauge):
    """theta(t) = C * t^alpha on t >= 0, extended oddly."""

    def __init__(self, C: float, alpha: float, t_max: float = 16.0):
        if C <= 0 or alpha <= 0:
            raise ValueError("monomial gauge needs C > 0 and alpha > 0")
        self.C = float(C)
        self.alpha = float(alpha)
        self.t_max = float(t_max)

    def _eval_pos(self, t):
        return self.C * np.power(t, self.alpha)

    def __repr__(self):
        return f"MonomialGauge(C={self.C:.6g}, alpha={self.alpha:.6g})"

    def describe(self):
        return {"form": "monomial", "C": self.C, "alpha": self.alpha, "t_max": self.t_max}


class TabulatedGauge(Gauge):
    """Piecewise-linear interpolation of a strictly increasing table.

    The table is anchored at (0, 0). Queries beyond the last knot are
    rejected via t_max rather than extrapolated.
    """

    def __init__(self, ts, values, t_max=None):
        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != values.shape:
            raise ValueError("table shape mismatch")
        if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("knots must be positive and strictly increasing")
        if np.any(values <= 0) or np.any(np.diff(values) <= 0):
            raise ValueError("values must be positive and strictly increasing")
        self.ts = np.concatenate([[0.0], ts])
        self.values = np.concatenate([[0.0], values])
        self.t_max = float(t_max if t_max is not None else ts[-1])

    def _eval_pos(self, t):
        return np.interp(t, self.ts, self.values)

    def describe(self):
        return {
            "form": "tabulated",
            "knots": self.ts[1:].tolist(),
            "values": self.values[1:].tolist(),
            "t_max": self.t_max,
        }


class ScaledGauge(Gauge):
    """theta(t) = out_scale * base(t / in_scale)."""

    def __init__(self, base: Gauge, out_scale: float, in_scale: float = 1.0):
        if out_scale <= 0 or in_scale <= 0:
            raise ValueError("scales must be positive")
        self.base = base
        self.out_scale = float(out_scale)
        self.in_scale = float(in_scale)
        self.t_max = base.t_max * self.in_scale

    def _eval_pos(self, t):
        return self.out_scale * self.base._eval_pos(np.asarray(t) / self.in_scale)

    def describe(self):
        return {
            "form": "scaled",
            "out_scale": self.out_scale,
            "in_scale": self.in_scale,
            "base": self.base.describe(),
        }


class MaxGauge(Gauge):
    """Pointwise max of two gauges; still odd and strictly increasing."""

    def __init__(self, a: Gauge, b: Gauge):
        self.a = a
        self.b = b
        self.t_max = min(a.t_max, b.t_max)

    def _eval_pos(self, t):
        return np.maximum(self.a._eval_pos(t), self.b._eval_pos(t))

    def describe(self):
        return {"form": "max", "a": self.a.describe(), "b": self.b.describe()}


def scale_gauge(theta: Gauge, c: float) -> Gauge:
    """c * theta, staying monomial when theta is."""
    if isinstance(theta, MonomialGauge):
        return MonomialGauge(c * theta.C, theta.alpha, theta.t_max)
    return ScaledGauge(theta, out_scale=c)


def gauge_eval(theta: Gauge, t):
    """theta(t) with odd extension theta(-t) = -theta(t).

    Raises GaugeDomainError outside [-t_max, t_max].
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > theta.t_max * (1 + 1e-12)):
        raise GaugeDomainError(f"|t| exceeds gauge domain t_max={theta.t_max}")
    out = np.sign(t) * theta._eval_pos(np.abs(t))
    return float(out) if out.ndim == 0 else out


class CompareVerdict:
    """Result of a grid comparison between two gauges."""

    def __init__(self, relation: str, witness: dict):
        self.relation = relation  # one of "<=", ">=", "=", "incomparable"
        self.witness = witness

    def __repr__(self):
        return f"CompareVerdict({self.relation!r}, witness={self.witness})"


def gauge_compare(theta1: Gauge, theta2: Gauge, grid) -> CompareVerdict:
    """Order verdict on a positive grid: "<=", ">=", "=" or incomparable.

    Witness points record where each strict inequality was observed.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("comparison grid must be positive")
    v1 = np.asarray(gauge_eval(theta1, grid))
    v2 = np.asarray(gauge_eval(theta2, grid))
    gt = grid[v1 > v2]
    lt = grid[v1 < v2]
    if gt.size == 0 and lt.size == 0:
        return CompareVerdict("=", {})
    if gt.size == 0:
        return CompareVerdict("<=", {"strict_at": float(lt[0])})
    if lt.size == 0:
        return CompareVerdict(">=", {"strict_at": float(gt[0])})
    return CompareVerdict(
        "incomparable", {"theta1_above_at": float(gt[0]), "theta1_below_at": float(lt[0])}
    )


def check_gauge_valid(theta: Gauge, n_grid: int = 256) -> None:
    """Assert theta(0) = 0 and strict increase on a dense grid of [0, t_max]."""
    if abs(gauge_eval(theta, 0.0)) > 0.0:
        raise ValueError("gauge must vanish at 0")
    ts = np.linspace(0.0, theta.t_max, n_grid)
    vals = np.asarray(gauge_eval(theta, ts))
    if np.any(np.diff(vals) <= 0):
        k = int(np.argmax(np.diff(vals) <= 0))
        raise ValueError(f"gauge not strictly increasing near t={ts[k]:.4g}")


def dominating_monomial(gauges, grid, safety: float = 2.0) -> MonomialGauge:
    """A monomial gauge >= safety * max(gauges) on the given grid.

    Used to combine fitted witnesses into a single comparison gauge.
    """
    grid = np.asarray(grid, dtype=float)
    env = np.max([np.asarray(gauge_eval(g, grid)) for g in gauges], axis=0)
    slope, intercept = np.polyfit(np.log(grid), np.log(env), 1)
    alpha = max(slope, 0.05)
    # certify on the grid, then apply the safety factor
    C = float(np.max(env / grid**alpha))
    return MonomialGauge(safety * C, alpha, t_max=max(g.t_max for g in gauges))
