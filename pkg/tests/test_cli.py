"""End-to-end checks of the batch runner: artifacts, exit codes,
determinism, and the per-subcommand CSV schemas the docs promise."""

import csv
import json
import os

import pytest

from germlens.cli import main, run
from germlens.config import ConfigError, SUBCOMMANDS, resolve_gauge, validate_config
from germlens.gauges import MonomialGauge
from germlens.reporting import strip_timestamp


def _read_header(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh))


def _read_report(out, sub):
    with open(os.path.join(out, f"{sub}-report.json"), encoding="utf-8") as fh:
        return json.load(fh)


# one cheap config per subcommand; the headers here are the documented
# interface and must not drift silently
SWEEP = {
    "dirset": (
        {"fixture": "lines2d", "params": {"per_shell_count": 60}},
        {0},
        ["radius", "cluster", "x0", "x1"],
    ),
    "cone": (
        {"fixture": "lines2d", "params": {"per_shell_count": 60}},
        {0},
        ["kind", "x0", "x1"],
    ),
    "st-fit": (
        {"fixture": "cusp", "params": {"per_shell": 40, "budget": 600}},
        {0},
        ["shell_radius", "gmax"],
    ),
    "st-equiv": (
        {"fixture": "lines2d", "params": {"per_shell": 24, "budget": 400}},
        {2},  # x-axis vs y-axis: gap never decays
        ["direction", "radius", "n", "in", "out", "indet", "max_ratio"],
    ),
    "sandwich": (
        {"fixture": "lines3d", "map": "rot3z-20", "params": {"samples": 800}},
        {0},
        ["radius", "checked", "decided", "violations"],
    ),
    "ssp": (
        {
            "fixture": "lines2d",
            "params": {
                "mode": "strong",
                "eps_grid": [1e-1, 1e-2],
                "delta_grid": [1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
                "n_rays": 8,
            },
        },
        {0},
        ["mode", "eps", "delta", "passed", "n_probes", "n_fail", "worst_ratio"],
    ),
    "ld-image": (
        {"fixture": "pinch"},
        {2},  # crushing map: image directions outgrow the cone's image
        ["quantity", "value"],
    ),
    "vol": (
        {"fixture": "lines3d", "gauge": "t", "params": {"n_samples": 4000, "eps_schedule": [0.1, 0.05]}},
        {0, 3},
        ["eps", "volume", "ci_halfwidth", "method", "indeterminate_frac"],
    ),
    "vol-ratio": (
        {
            "fixture": "lines3d",
            "germ": "x-axis",
            "germ_b": "plane",
            "gauge": "t",
            "params": {"n_samples": 6000, "eps_schedule": [0.1, 0.056, 0.032]},
        },
        {0, 3},
        ["eps", "vol_a", "ci_a", "vol_b", "ci_b", "ratio", "ci_ratio"],
    ),
    "ctimes": (
        {"fixture": "lines3d", "gauge": "t", "params": {"c": 2.0, "n_samples": 4000, "eps_schedule": [0.1, 0.05]}},
        {0, 3},
        ["eps", "n_base", "n_scaled", "ratio", "ci"],
    ),
    "invariant": (
        {"fixture": "lines2d", "map": "rot2-30", "params": {"per_shell_count": 80}},
        {0},
        ["side", "dim", "confidence"],
    ),
    "extend": (
        {"params": {"n_anchors": 8, "probes": 400, "L": 1.5}},
        {0},
        ["x0", "x1", "upper", "lower", "chosen"],
    ),
    "puiseux": (
        {},
        {0},
        ["check", "ok", "detail"],
    ),
}


def test_sweep_covers_every_subcommand():
    assert set(SWEEP) == set(SUBCOMMANDS)


@pytest.mark.parametrize("sub", sorted(SWEEP))
def test_subcommand_artifacts_and_csv_schema(sub, tmp_path):
    extra, allowed, header = SWEEP[sub]
    cfg = {"subcommand": sub, "out": str(tmp_path), "plot": False, "seed": 0, **extra}
    res = run(cfg)
    assert res["exit"] in allowed, res["summary"]
    assert os.path.isfile(res["paths"]["report"])
    assert os.path.isfile(res["paths"]["data"])
    assert "plot" not in res["paths"]
    assert _read_header(res["paths"]["data"]) == header
    rep = _read_report(str(tmp_path), sub)
    assert rep["subcommand"] == sub
    assert rep["exit_code"] == res["exit"]
    assert rep["config"]["seed"] == 0
    assert rep["operations"], "report must say what ran"
    assert res["summary"] and all(isinstance(s, str) for s in res["summary"])


def test_report_path_renders_figure_by_default(tmp_path):
    res = run({"subcommand": "puiseux", "out": str(tmp_path)})
    png = res["paths"]["plot"]
    assert png.endswith(".png") and os.path.isfile(png)
    assert os.path.getsize(png) > 1000
    assert os.path.dirname(png) == os.path.dirname(res["paths"]["data"])


@pytest.mark.parametrize("sub", ["puiseux", "dirset"])
def test_rerun_is_byte_identical_minus_timestamp(sub, tmp_path):
    # same config twice (into the same out dir, since the report embeds
    # the config): everything but the timestamp line must match
    extra = SWEEP[sub][0]
    cfg = {"subcommand": sub, "out": str(tmp_path), "seed": 3, "plot": True, **extra}
    snaps = []
    for _ in range(2):
        run(dict(cfg))
        snaps.append(
            {
                "report": strip_timestamp((tmp_path / f"{sub}-report.json").read_text()),
                "csv": (tmp_path / f"{sub}-data.csv").read_bytes(),
                "png": (tmp_path / f"{sub}-plot.png").read_bytes(),
            }
        )
    assert snaps[0]["report"] == snaps[1]["report"]
    assert snaps[0]["report"].count("timestamp") == 0
    assert snaps[0]["csv"] == snaps[1]["csv"]
    assert snaps[0]["png"] == snaps[1]["png"]


def test_seed_changes_sampled_output(tmp_path):
    texts = []
    for seed in (0, 1):
        out = tmp_path / str(seed)
        out.mkdir()
        run(
            {
                "subcommand": "dirset",
                "fixture": "lines2d",
                "params": {"per_shell_count": 60},
                "out": str(out),
                "seed": seed,
                "plot": False,
            }
        )
        texts.append((out / "dirset-data.csv").read_text())
    assert texts[0] != texts[1]


def test_cli_flags_override_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "job.json"
    cfg_path.write_text(json.dumps({"subcommand": "puiseux", "seed": 5, "out": str(tmp_path / "x")}))
    out = tmp_path / "y"
    code = main(["--config", str(cfg_path), "--seed", "7", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "exit 0" in captured.out
    rep = _read_report(str(out), "puiseux")
    assert rep["config"]["seed"] == 7
    assert not (tmp_path / "x").exists()


def test_no_plot_flag_skips_figure(tmp_path):
    out = tmp_path / "np"
    code = main(["puiseux", "--out", str(out), "--no-plot"])
    assert code == 0
    assert (out / "puiseux-data.csv").is_file()
    assert (out / "puiseux-report.json").is_file()
    assert not (out / "puiseux-plot.png").exists()


def test_unknown_fixture_is_config_error(tmp_path, capsys):
    code = main(["dirset", "--fixture", "bogus", "--out", str(tmp_path)])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_missing_subcommand_is_config_error(capsys):
    assert main([]) == 1
    assert "no subcommand" in capsys.readouterr().err


def test_bad_gauge_shorthand_is_config_error(tmp_path, capsys):
    code = main(["vol", "--fixture", "lines3d", "--gauge", "zzz", "--out", str(tmp_path)])
    assert code == 1
    assert "gauge" in capsys.readouterr().err


def test_run_raises_config_error_for_schema_violations(tmp_path):
    with pytest.raises(ConfigError):
        run({"subcommand": "vol", "bogus": 1, "out": str(tmp_path)})
    with pytest.raises(ConfigError):
        run({"subcommand": "st-fit", "germ": "nope", "out": str(tmp_path)})
    with pytest.raises(ConfigError):
        validate_config({"subcommand": "not-a-thing"})


def test_gauge_shorthand_forms():
    g = resolve_gauge("0.5*t^0.75")
    assert isinstance(g, MonomialGauge)
    assert g.C == 0.5 and g.alpha == 0.75
    g2 = resolve_gauge("t^2")
    assert g2.C == 1.0 and g2.alpha == 2.0
    g3 = resolve_gauge({"form": "monomial", "C": 2.0, "alpha": 0.5})
    assert g3.C == 2.0 and g3.alpha == 0.5


def test_inline_germ_and_map_config(tmp_path):
    # a germ given literally in the config, mapped by a literal matrix
    cfg = {
        "subcommand": "invariant",
        "germ": {
            "kind": "semialgebraic",
            "ambient_dim": 2,
            "name": "inline-axis",
            "polynomials": [{"terms": [[0, 1, 1.0]]}],
            "signs": ["=0"],
        },
        "map": {"kind": "linear", "matrix": [[0.0, -1.0], [1.0, 0.0]], "name": "quarter-turn"},
        "params": {"per_shell_count": 60},
        "out": str(tmp_path),
        "plot": False,
    }
    res = run(cfg)
    assert res["exit"] == 0
    rep = _read_report(str(tmp_path), "invariant")
    assert rep["equal"] is True
    assert rep["map"] == "quarter-turn"
