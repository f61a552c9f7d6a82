"""Experiment configuration: JSON schema, validation, gauge resolution.

A config is one JSON object per run. Validation errors carry the JSON
path of the offending entry so batch pipelines can pinpoint bad files.
"""

from __future__ import annotations

import json
import re

import jsonschema

from .gauges import Gauge, MonomialGauge, TabulatedGauge, check_gauge_valid

SUBCOMMANDS = (
    "dirset",
    "cone",
    "st-fit",
    "st-equiv",
    "sandwich",
    "ssp",
    "ld-image",
    "vol",
    "vol-ratio",
    "ctimes",
    "invariant",
    "extend",
    "puiseux",
)

_GERM_INLINE = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["semialgebraic", "parametric-curve", "point-sequence"]},
        "name": {"type": "string"},
        "ambient_dim": {"type": "integer", "minimum": 1},
        "polynomials": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"terms": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}},
                "required": ["terms"],
            },
        },
        "signs": {"type": "array", "items": {"enum": ["=0", "<=0", ">=0"]}},
        "components": {"type": "array", "items": {"type": "string"}},
        "t_hi": {"type": "number", "exclusiveMinimum": 0},
        "both_signs": {"type": "boolean"},
    },
    "required": ["kind", "ambient_dim"],
}

_GERM_REF = {"oneOf": [{"type": "string", "minLength": 1}, _GERM_INLINE]}

_MAP_INLINE = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["linear"]},
        "name": {"type": "string"},
        "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "required": ["kind", "matrix"],
}

_MAP_REF = {"oneOf": [{"type": "string", "minLength": 1}, _MAP_INLINE]}

_GAUGE_INLINE = {
    "type": "object",
    "properties": {
        "form": {"enum": ["monomial", "tabulated"]},
        "C": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "t": {"type": "array", "items": {"type": "number"}},
        "values": {"type": "array", "items": {"type": "number"}},
        "t_max": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["form"],
}

_GAUGE_REF = {"oneOf": [{"type": "string", "minLength": 1}, _GAUGE_INLINE]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "subcommand": {"enum": list(SUBCOMMANDS)},
        "fixture": {"type": "string"},
        "germ": _GERM_REF,
        "germ_b": _GERM_REF,
        "map": _MAP_REF,
        "gauge": _GAUGE_REF,
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
        "plot": {"type": "boolean"},
    },
    "required": ["subcommand"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Schema violation; .path holds the JSON pointer of the bad entry."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def validate_config(cfg: dict) -> dict:
    """Validate against the schema and fill defaults. Returns a new dict."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(
            f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path
        )
        raise ConfigError(e.message, path)
    out = dict(cfg)
    out.setdefault("seed", 0)
    out.setdefault("out", ".")
    out.setdefault("threads", 1)
    out.setdefault("plot", True)
    out.setdefault("params", {})
    return out


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}", "$") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", "$")
    return validate_config(cfg)


# ---------------------------------------------------------------------------
# gauge resolution

# shorthand strings: "t", "t^2", "0.5*t^0.75", "2*t"
_MONO_RE = re.compile(
    r"^\s*(?:(?P<C>\d+(?:\.\d+)?(?:[eE]-?\d+)?)\s*\*\s*)?t(?:\s*\^\s*\(?(?P<a>\d+(?:\.\d+)?(?:/\d+)?)\)?)?\s*$"
)


def resolve_gauge(spec, t_max: float = 16.0) -> Gauge:
    """Build a Gauge from an inline dict or a monomial shorthand string."""
    if isinstance(spec, Gauge):
        return spec
    if isinstance(spec, str):
        m = _MONO_RE.match(spec)
        if not m:
            raise ConfigError(f"cannot parse gauge shorthand {spec!r}", "$.gauge")
        C = float(m.group("C") or 1.0)
        a_raw = m.group("a") or "1"
        alpha = (float(a_raw.split("/")[0]) / float(a_raw.split("/")[1])) if "/" in a_raw else float(a_raw)
        g = MonomialGauge(C, alpha, t_max=t_max)
        check_gauge_valid(g)
        return g
    if isinstance(spec, dict):
        form = spec.get("form")
        if form == "monomial":
            g = MonomialGauge(float(spec.get("C", 1.0)), float(spec.get("alpha", 1.0)), t_max=float(spec.get("t_max", t_max)))
        elif form == "tabulated":
            if "t" not in spec or "values" not in spec:
                raise ConfigError("tabulated gauge needs 't' and 'values' arrays", "$.gauge")
            g = TabulatedGauge(spec["t"], spec["values"])
        else:
            raise ConfigError(f"unknown gauge form {form!r}", "$.gauge.form")
        check_gauge_valid(g)
        return g
    raise ConfigError(f"cannot resolve gauge from {type(spec).__name__}", "$.gauge")
