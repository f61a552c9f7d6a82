"""Report writers: canonical JSON, RFC-4180 CSV, PNG figures.

JSON reports are deterministic byte-for-byte given the same payload:
keys are sorted and floats go through repr. The timestamp is the one
intentionally varying field and always occupies a single line of its
own at the top level, so diff tooling can drop it textually.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import os

import matplotlib

matplotlib.use("Agg")  # file output only; must be set before pyplot loads

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def jsonable(x):
    """Recursively convert numpy scalars/arrays and dataclasses."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return jsonable(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, float) and not np.isfinite(x):
        # JSON has no Infinity/NaN literals; stringify for portability
        return repr(x)
    return x


def dump_report(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True, allow_nan=False)


def write_report(report: dict, path: str, timestamp: bool = True) -> str:
    body = dict(report)
    body.pop("timestamp", None)
    if timestamp:
        body["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_report(body))
        fh.write("\n")
    return path


def strip_timestamp(text: str) -> str:
    """Drop the timestamp line so runs can be compared byte-for-byte."""
    return "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith('"timestamp"')
    )


def write_csv(path: str, header, rows) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow(["" if v is None else v for v in row])
    return path


# ---------------------------------------------------------------------------
# figures


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_directions(points: np.ndarray, radii, path: str, title: str = "") -> str:
    """Scatter of unit directions; 3-d clouds get two coordinate panes."""
    points = np.atleast_2d(points)
    radii = np.asarray(radii, float)
    color = np.log10(np.maximum(radii, 1e-300))
    if points.shape[1] >= 3:
        fig, axes = plt.subplots(1, 2, figsize=(9, 4.2))
        for ax, (i, j) in zip(axes, [(0, 1), (0, 2)]):
            sc = ax.scatter(points[:, i], points[:, j], c=color, s=6, cmap="viridis")
            ax.set_xlabel(f"u{i}")
            ax.set_ylabel(f"u{j}")
            ax.set_aspect("equal")
        fig.colorbar(sc, ax=axes[-1], label="log10 shell radius")
    else:
        fig, ax = plt.subplots(figsize=(5, 4.6))
        sc = ax.scatter(points[:, 0], points[:, 1], c=color, s=6, cmap="viridis")
        ax.set_xlabel("u0")
        ax.set_ylabel("u1")
        ax.set_aspect("equal")
        fig.colorbar(sc, ax=ax, label="log10 shell radius")
    fig.suptitle(title)
    return _save(fig, path)


def plot_loglog(xs, series, labels, path: str, xlabel: str, ylabel: str, title: str = "") -> str:
    """One or more positive series on log-log axes; zero entries dropped."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for ys, lab in zip(series, labels):
        xs_a = np.asarray(xs, float)
        ys_a = np.asarray(ys, float)
        m = (xs_a > 0) & (ys_a > 0) & np.isfinite(ys_a)
        ax.loglog(xs_a[m], ys_a[m], marker="o", ms=4, label=lab)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if any(labels):
        ax.legend(fontsize=8)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_heat(xs, ys, grid, path: str, xlabel: str, ylabel: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    im = ax.imshow(np.asarray(grid, float), aspect="auto", origin="lower", cmap="magma")
    ax.set_xticks(range(len(xs)), [f"{x:.1e}" for x in xs], rotation=45, fontsize=7)
    ax.set_yticks(range(len(ys)), [f"{y:.1e}" for y in ys], fontsize=7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    return _save(fig, path)


def plot_bars(names, values, path: str, ylabel: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.bar(range(len(names)), values, color="steelblue")
    ax.set_xticks(range(len(names)), names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def plot_curves(xs, series, labels, path: str, xlabel: str, ylabel: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for ys, lab in zip(series, labels):
        ax.plot(xs, ys, label=lab, lw=1.4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if any(labels):
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    ax.set_title(title)
    return _save(fig, path)
