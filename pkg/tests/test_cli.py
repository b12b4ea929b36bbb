"""Experiment runner: config handling, exit codes, artifacts."""

import json
import os
import subprocess
import sys
from xml.sax.saxutils import unescape

import pytest

from sheetlimit.cli import (
    ConfigError,
    Estimate,
    MCReport,
    apply_override,
    canonical_json,
    emit_plot,
    main,
    merge_defaults,
    parse_override,
    run,
    validate_config,
)

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def base_config(**kw):
    cfg = {
        "version": 1,
        "kind": "simulate",
        "field": {
            "innovations": {
                "law": "gaussian",
                "variance_profile": {"kind": "constant", "value": 1.0},
            },
            "kernel": {"coeffs": [[1.0]]},
        },
        "mc": {"n": 8, "N": 100, "seed": 5},
    }
    cfg.update(kw)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# ---------------------------------------------------------------------------
# config plumbing


def test_parse_override_json_and_raw_values():
    assert parse_override("mc.n=32") == ("mc.n", 32)
    assert parse_override("formats=[\"json\"]") == ("formats", ["json"])
    assert parse_override("field.innovations.law=uniform") == (
        "field.innovations.law",
        "uniform",
    )
    assert parse_override("mc.sigma=null") == ("mc.sigma", None)
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")
    with pytest.raises(ConfigError):
        parse_override("=5")


def test_apply_override_builds_dotted_path():
    cfg = {"mc": {"n": 8}}
    apply_override(cfg, "mc.n", 16)
    apply_override(cfg, "params.rect.h", 0.5)
    assert cfg == {"mc": {"n": 16}, "params": {"rect": {"h": 0.5}}}


def test_merge_defaults_keeps_unset_mc_fields():
    merged = merge_defaults({"kind": "fdd", "mc": {"n": 32}})
    assert merged["mc"]["n"] == 32
    assert merged["mc"]["N"] == 400
    assert merged["mc"]["sigma"] is None
    assert merged["kind"] == "fdd"
    assert merged["formats"] == ["json", "csv", "svg"]


def test_validate_config_rejects_unknown_kind_and_keys():
    good = merge_defaults(base_config())
    validate_config(good)
    bad_kind = merge_defaults(base_config(kind="frobnicate"))
    with pytest.raises(ConfigError):
        validate_config(bad_kind)
    extra = merge_defaults(base_config(mystery=1))
    with pytest.raises(ConfigError):
        validate_config(extra)


# ---------------------------------------------------------------------------
# exit codes


def test_exit_io_on_missing_config(tmp_path):
    assert run(str(tmp_path / "nope.json")) == 4


def test_exit_config_on_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(str(path)) == 2


def test_exit_config_on_schema_violation(tmp_path):
    path = write_config(tmp_path, base_config(kind="frobnicate"))
    assert run(path, out=str(tmp_path / "o")) == 2


def test_exit_config_on_semantic_field_error(tmp_path):
    cfg = base_config()
    cfg["field"]["kernel"] = {"coeffs": [[1.0]], "m": 2}  # declared m mismatch
    path = write_config(tmp_path, cfg)
    assert run(path, out=str(tmp_path / "o")) == 2


def test_exit_runtime_on_estimator_failure(tmp_path):
    cfg = base_config(kind="conditions")
    # schema-valid weight point, but it sits in the rectangle's future
    # quadrant, which the estimator rejects at run time
    cfg["params"] = {"points": [[0.9, 0.9]], "u": [1.0]}
    path = write_config(tmp_path, cfg)
    assert run(path, out=str(tmp_path / "o")) == 3


def test_exit_io_on_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    path = write_config(tmp_path, base_config())
    assert run(path, out=str(blocker / "sub")) == 4


# ---------------------------------------------------------------------------
# artifacts


def test_simulate_artifacts_and_manifest(tmp_path):
    out = tmp_path / "art"
    path = write_config(tmp_path, base_config())
    assert run(path, out=str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert manifest["passed"] is True
    assert "out" not in manifest["config"]
    names = [e["file"] for e in manifest["outputs"]]
    assert names == sorted(names)
    assert {"simulate.json", "simulate.csv", "simulate.svg"} <= set(names)
    import hashlib

    for entry in manifest["outputs"]:
        data = (out / entry["file"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]


def test_sample_path_svg_cells_and_metadata(tmp_path):
    out = tmp_path / "art"
    path = write_config(tmp_path, base_config())
    run(path, out=str(out))
    svg = (out / "simulate.svg").read_text()
    # one background rect plus one cell per lattice site of the 8x8 grid
    assert svg.count("<rect ") == 1 + 8 * 8
    payload = svg.split("<metadata>")[1].split("</metadata>")[0]
    values = json.loads(unescape(payload))["values"]
    assert len(values) == 9 and len(values[0]) == 9  # grid has n+1 knots


def test_seed_override_changes_manifest_identity(tmp_path):
    path = write_config(tmp_path, base_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(path, out=str(out1))
    run(path, out=str(out2), seed=99)
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m2["config"]["mc"]["seed"] == 99
    assert m1["config_sha256"] != m2["config_sha256"]


def test_override_flag_reaches_effective_config(tmp_path):
    path = write_config(tmp_path, base_config())
    out = tmp_path / "a"
    assert run(path, overrides=["mc.N=150"], out=str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["mc"]["N"] == 150


def test_rerun_is_byte_identical_across_out_dirs(tmp_path):
    path = write_config(tmp_path, base_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(path, out=str(out1))
    run(path, out=str(out2))
    files = sorted(p.name for p in out1.iterdir())
    assert files == sorted(p.name for p in out2.iterdir())
    for name in files:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_pure_python_backend_reproduces_artifacts(tmp_path):
    path = write_config(tmp_path, base_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(path, out=str(out1))
    env = dict(os.environ, SHEETLIMIT_PURE_PYTHON="1")
    code = (
        "from sheetlimit.cli import run; import sys; "
        "sys.exit(run(%r, out=%r))" % (path, str(out2))
    )
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "backend python" in proc.stdout
    for p in sorted(out1.iterdir()):
        assert p.read_bytes() == (out2 / p.name).read_bytes()


def test_full_suite_example_config_passes(tmp_path):
    out = tmp_path / "art"
    code = main(
        ["--config", os.path.join(REPO, "configs", "iid.json"), "--out", str(out)]
    )
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["passed"] is True
    names = {e["file"] for e in manifest["outputs"]}
    for kind in ("simulate", "decompose", "fdd", "tightness", "summary"):
        assert kind + ".json" in names
    summary = json.loads((out / "summary.json").read_text())
    assert all(e["passed"] for e in summary["estimates"])


# ---------------------------------------------------------------------------
# plot edge cases


def test_decay_curve_requires_grid_and_full_series():
    rows = [Estimate(name="tail[alpha=1.0]", value=0.5, se=0.1)]
    no_grid = MCReport(kind="level-tail", config={}, estimates=rows)
    with pytest.raises(ValueError):
        emit_plot(no_grid, "decay-curve")
    short = MCReport(
        kind="level-tail", config={"alpha_grid": [1.0, 2.0]}, estimates=rows
    )
    with pytest.raises(ValueError):
        emit_plot(short, "decay-curve")
    with pytest.raises(ValueError):
        emit_plot(short, "no-such-plot")


def test_canonical_json_is_sorted_and_compact():
    assert canonical_json({"b": 1, "a": [1.5, None, True]}) == '{"a":[1.5,null,true],"b":1}'
