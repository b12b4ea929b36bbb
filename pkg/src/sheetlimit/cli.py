"""Experiment runner: JSON config in, reproducible reports out.

One process runs one experiment kind (or the full suite), writes
reports as JSON/CSV, optional SVG plots with the plotted data embedded
in metadata, and a manifest listing every artifact with content hashes
and the hash of the effective configuration.  Nothing depends on the
wall clock or the environment beyond the config, so reruns are
byte-identical.

Exit codes: 0 success (verdict outcomes live in the reports), 2 config
or schema violation, 3 runtime estimator failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from importlib import resources
from xml.sax.saxutils import escape

import numpy as np
import jsonschema

from . import __version__
from .diagnostics import (
    DEFAULT_ALPHA_GRID,
    Estimate,
    MCConfig,
    MCReport,
    cf_weighted_increment_test,
    conditional_variance_check,
    fdd_convergence_test,
    increment_square_tail_curve,
    level_tail_mean,
    m_dependence_check,
    tightness_probe,
)
from .dspace import (
    GridFunction,
    continuity_modulus,
    grid_timechanges,
    partition_modulus_search,
    random_timechanges,
    skorohod_distance_upper,
    billingsley_distance_upper,
    skorohod_objective,
    billingsley_objective,
)
from .fieldgen import FieldSpec, generate_field
from .kernels import backend_name, hash_u64
from .martdecomp import (
    decompose,
    maximal_inequality_check,
    martingale_property_check,
    power_sum_bound_check,
    verify_recovery,
)
from .sheet import FddSpec, sample_sheet
from .sumproc import partial_sum_process, partial_sums

SCHEMA_VERSION = 1

KINDS = (
    "simulate",
    "decompose",
    "inequalities",
    "metrics",
    "fdd",
    "tightness",
    "conditions",
    "full-suite",
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

DEFAULT_CONFIG = {
    "mc": {"n": 16, "N": 400, "seed": 1, "sigma": None, "confidence": 3.0, "jobs": 1},
    "out": "sheetlimit-out",
    "formats": ["json", "csv", "svg"],
    "params": {},
}

DEFAULT_POINTS = ((1.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25))
DEFAULT_PROBES = (
    (1.0, 0.0, 0.0, 0.0),
    (0.5, 0.5, 0.5, 0.5),
    (1.0, -1.0, 1.0, -1.0),
)
DEFAULT_LAMBDA_GRID = (1.0, 2.0, 4.0)
DEFAULT_RECT = {"s_hat": 0.5, "t_hat": 1.0, "t": 0.5, "h": 0.25}
DEFAULT_CF_POINTS = ((0.25, 1.0), (1.0, 0.25))


class ConfigError(Exception):
    """Configuration rejected (schema or semantic validation)."""


def load_schema() -> dict:
    text = resources.files("sheetlimit").joinpath("config_schema.json").read_text()
    return json.loads(text)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def parse_override(text: str):
    if "=" not in text:
        raise ConfigError("override %r is not of the form key=value" % text)
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError("override %r has an empty key" % text)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_override(config: dict, key: str, value):
    parts = key.split(".")
    node = config
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = value


def merge_defaults(config: dict) -> dict:
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for key, value in config.items():
        if key == "mc" and isinstance(value, dict):
            merged["mc"].update(value)
        elif key == "params" and isinstance(value, dict):
            merged["params"].update(value)
        else:
            merged[key] = value
    return merged


def validate_config(config: dict) -> None:
    schema = load_schema()
    try:
        jsonschema.validate(instance=config, schema=schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError("config schema violation at %r: %s" % (path, exc.message))


def build_mc_config(config: dict) -> MCConfig:
    try:
        spec = FieldSpec.from_config(config["field"])
        mc = config["mc"]
        return MCConfig(
            spec=spec,
            n=mc["n"],
            N=mc["N"],
            seed=mc["seed"],
            sigma=mc["sigma"],
            confidence=mc["confidence"],
            jobs=mc["jobs"],
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("invalid configuration: %s" % exc)


# ---------------------------------------------------------------------------
# Experiment kinds


def _grid_payload(values: np.ndarray):
    return [[float(v) for v in row] for row in values]


def run_simulate(cfg: MCConfig, params: dict) -> list:
    sigma = cfg.resolved_sigma()
    field = generate_field(cfg.spec, cfg.n, cfg.n, cfg.seed)
    X = partial_sum_process(field, sigma, cfg.n)
    W = sample_sheet(cfg.n, cfg.seed)
    S = partial_sums(field)
    rows = [
        Estimate(name="sigma", value=sigma, se=0.0),
        Estimate(name="field_mean", value=float(field.values.mean()), se=0.0),
        Estimate(name="field_max_abs", value=float(np.abs(field.values).max()), se=0.0),
        Estimate(name="S_nn", value=float(S.values[-1, -1]), se=0.0),
        Estimate(name="X_11", value=float(X.eval(1.0, 1.0)), se=0.0),
    ]
    config = dict(cfg.to_config())
    config["series"] = {
        "path": _grid_payload(X.values),
        "sheet": _grid_payload(W.values),
    }
    return [MCReport(kind="simulate", config=config, estimates=rows)]


def run_decompose(cfg: MCConfig, params: dict) -> list:
    field = generate_field(cfg.spec, cfg.n, cfg.n, cfg.seed)
    d = decompose(field)
    tol = params.get("tol", 1e-10)
    rec = verify_recovery(d, field, tol)
    rows = [
        Estimate(
            name="recovery_max_error",
            value=rec.max_error,
            se=0.0,
            expected=0.0,
            tol=rec.tol,
            passed=rec.passed,
        )
    ]
    m = cfg.spec.m
    trials = params.get("trials", min(cfg.N, 500))
    probe = martingale_property_check(
        d, (min(1, m), min(1, m)), trials=trials, seed=hash_u64(cfg.seed, 1)
    )
    for p in probe.probes:
        rows.append(
            Estimate(
                name="martingale_%s" % p.name,
                value=p.estimate,
                se=p.se,
                expected=p.expected,
                tol=cfg.confidence * p.se,
                passed=p.passed,
            )
        )
    return [MCReport(kind="decompose", config=cfg.to_config(), estimates=rows)]


def run_inequalities(cfg: MCConfig, params: dict) -> list:
    m = cfg.spec.m
    p_grid = params.get("p_grid", [2.0, 4.0])
    trials = params.get("trials", 10000)
    rows = []
    rng = np.random.default_rng(hash_u64(cfg.seed, 777))
    for p in p_grid:
        violations = 0
        for _ in range(trials):
            z = rng.normal(size=(2 * m + 1, 2 * m + 1)) + 1j * rng.normal(
                size=(2 * m + 1, 2 * m + 1)
            )
            lhs, rhs = power_sum_bound_check(z, p)
            if lhs > rhs * (1.0 + 1e-12):
                violations += 1
        rows.append(
            Estimate(
                name="power_sum_violations[p=%s]" % repr(float(p)),
                value=float(violations),
                se=0.0,
                expected=0.0,
                tol=0.0,
                passed=violations == 0,
            )
        )
        lhs, rhs = power_sum_bound_check(np.ones((2 * m + 1, 2 * m + 1)), p)
        rows.append(
            Estimate(
                name="power_sum_equality[p=%s]" % repr(float(p)),
                value=abs(lhs - rhs),
                se=0.0,
                expected=0.0,
                tol=1e-12 * max(1.0, abs(rhs)),
                passed=abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs)),
            )
        )
        rep = maximal_inequality_check(cfg.spec, p, cfg.n, cfg.N, cfg.seed)
        rows.append(
            Estimate(
                name="maximal[p=%s].margin" % repr(float(p)),
                value=rep.margin,
                se=rep.margin_se,
                expected=0.0,
                tol=cfg.confidence * rep.margin_se,
                passed=rep.passed,
            )
        )
        rows.append(
            Estimate(name="maximal[p=%s].lhs" % repr(float(p)), value=rep.lhs, se=rep.lhs_se)
        )
        rows.append(
            Estimate(name="maximal[p=%s].rhs" % repr(float(p)), value=rep.rhs, se=rep.rhs_se)
        )
    config = dict(cfg.to_config())
    config["p_grid"] = [float(p) for p in p_grid]
    config["trials"] = trials
    return [MCReport(kind="inequalities", config=config, estimates=rows)]


def _random_step_pair(cfg: MCConfig, idx: int):
    sigma = cfg.resolved_sigma()
    f1 = generate_field(cfg.spec, cfg.n, cfg.n, hash_u64(cfg.seed, 2 * idx))
    f2 = generate_field(cfg.spec, cfg.n, cfg.n, hash_u64(cfg.seed, 2 * idx + 1))
    return (
        partial_sum_process(f1, sigma, cfg.n),
        partial_sum_process(f2, sigma, cfg.n),
    )


def run_metrics(cfg: MCConfig, params: dict) -> list:
    deltas = params.get("delta_grid", [0.1, 0.2, 0.3])
    pairs = params.get("pairs", 20)
    k = params.get("candidate_k", 3)
    extra = params.get("candidate_count", 20)
    n_mod = min(cfg.n, 16)
    rows = []
    candidates = grid_timechanges(k) + random_timechanges(
        extra, hash_u64(cfg.seed, 31), max_log_slope=0.2
    )
    wp_violations = 0
    checked = 0
    for idx in range(pairs):
        x, y = _random_step_pair(cfg, idx)
        xs = GridFunction(np.asarray(x.values)[: n_mod + 1, : n_mod + 1])
        for delta in deltas:
            wprime = partition_modulus_search(xs, delta, method="auto").value
            w2 = continuity_modulus(xs, min(2 * delta, 0.999))
            checked += 1
            if wprime > w2 + 1e-12:
                wp_violations += 1
        d_upper = skorohod_distance_upper(x, y, candidates)
        d0_upper = billingsley_distance_upper(x, y, candidates)
        sup = float(np.max(np.abs(np.asarray(x.values) - np.asarray(y.values))))
        ident = skorohod_distance_upper(x, y, [])
        if idx < 3:
            rows.append(Estimate(name="d_upper[%d]" % idx, value=d_upper, se=0.0))
            rows.append(Estimate(name="d0_upper[%d]" % idx, value=d0_upper, se=0.0))
            rows.append(
                Estimate(
                    name="identity_supnorm[%d]" % idx,
                    value=abs(ident - sup),
                    se=0.0,
                    expected=0.0,
                    tol=1e-12,
                    passed=abs(ident - sup) <= 1e-12,
                )
            )
    rows.insert(
        0,
        Estimate(
            name="wprime_le_w2delta_violations",
            value=float(wp_violations),
            se=0.0,
            expected=0.0,
            tol=0.0,
            passed=wp_violations == 0,
        ),
    )
    config = dict(cfg.to_config())
    config.update(
        {
            "delta_grid": [float(d) for d in deltas],
            "pairs": pairs,
            "candidate_k": k,
            "candidate_count": extra,
            "moduli_checked": checked,
        }
    )
    return [MCReport(kind="metrics", config=config, estimates=rows)]


def run_fdd(cfg: MCConfig, params: dict) -> list:
    points = params.get("points", [list(p) for p in DEFAULT_POINTS])
    probes = params.get("probes")
    if probes is None:
        probes = [list(u[: len(points)]) for u in DEFAULT_PROBES]
    fdd = FddSpec(points)
    return [fdd_convergence_test(cfg, fdd, probes)]


def _calibrate_eps(cfg: MCConfig, lams, origins) -> float:
    half = max(8, cfg.n // 2)
    cal_cfg = MCConfig(
        spec=cfg.spec,
        n=half,
        N=cfg.N,
        seed=hash_u64(cfg.seed, 99),
        sigma=cfg.sigma,
        confidence=cfg.confidence,
        jobs=cfg.jobs,
    )
    rep = tightness_probe(cal_cfg, lams, eps=1.0, origins=origins)
    worst = 0.0
    for e in rep.estimates:
        if e.name.startswith("tail["):
            lam = float(e.name.rsplit("lam=", 1)[1].rstrip("]"))
            worst = max(worst, (e.value + cfg.confidence * e.se) * lam * lam)
    return max(worst, 1e-6)


def run_tightness(cfg: MCConfig, params: dict) -> list:
    lams = params.get("lambda_grid", list(DEFAULT_LAMBDA_GRID))
    origins = ((0, 0),)
    eps = params.get("eps")
    if eps is None:
        eps = _calibrate_eps(cfg, lams, origins)
    rep = tightness_probe(cfg, lams, eps=eps, lambda0=params.get("lambda0"), origins=origins)
    return [rep]


def run_conditions(cfg: MCConfig, params: dict) -> list:
    t = params.get("t", [1.0, 1.0])
    alpha_grid = params.get("alpha_grid", list(DEFAULT_ALPHA_GRID))
    rect = params.get("rect", dict(DEFAULT_RECT))
    u = params.get("u")
    points = params.get("points", [list(p) for p in DEFAULT_CF_POINTS])
    if u is None:
        u = [0.0] * len(points)
    reports = [
        level_tail_mean(cfg, t, alpha_grid, abs_variant=params.get("abs_variant", False)),
        increment_square_tail_curve(
            cfg, rect["s_hat"], rect["t_hat"], rect["t"], rect["h"], alpha_grid
        ),
        cf_weighted_increment_test(
            cfg, points, u, rect["s_hat"], rect["t_hat"], rect["t"], rect["h"]
        ).report,
        conditional_variance_check(
            cfg,
            origin=params.get("origin"),
            window=params.get("window"),
            claimed_m=params.get("claimed_m"),
        ),
        m_dependence_check(
            cfg, lags=params.get("lags"), claimed_m=params.get("claimed_m")
        ),
    ]
    return reports


RUNNERS = {
    "simulate": run_simulate,
    "decompose": run_decompose,
    "inequalities": run_inequalities,
    "metrics": run_metrics,
    "fdd": run_fdd,
    "tightness": run_tightness,
    "conditions": run_conditions,
}


def run_experiment(config: dict) -> list:
    """Dispatch the validated config to its experiment kind(s)."""
    cfg = build_mc_config(config)
    params = config.get("params", {})
    kind = config["kind"]
    if kind == "full-suite":
        reports = []
        for sub in KINDS[:-1]:
            reports.extend(RUNNERS[sub](cfg, params))
        summary = MCReport(
            kind="summary",
            config=cfg.to_config(),
            estimates=[
                Estimate(
                    name="passed[%s]" % rep.kind,
                    value=1.0 if rep.passed else 0.0,
                    se=0.0,
                    expected=1.0,
                    tol=0.0,
                    passed=rep.passed,
                )
                for rep in reports
            ],
        )
        return reports + [summary]
    return RUNNERS[kind](cfg, params)


# ---------------------------------------------------------------------------
# SVG plots

_SVG_W = 640
_SVG_H = 480
_MARGIN = 60


def _svg_header(title: str) -> list:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (_SVG_W, _SVG_H, _SVG_W, _SVG_H),
        '<rect width="%d" height="%d" fill="white"/>' % (_SVG_W, _SVG_H),
        '<text x="%d" y="24" font-family="monospace" font-size="14">%s</text>'
        % (_MARGIN, escape(title)),
    ]


def _svg_metadata(payload: dict) -> str:
    return "<metadata>%s</metadata>" % escape(canonical_json(payload))


def _heat_color(v: float) -> str:
    v = min(1.0, max(0.0, v))
    r = int(round(255 * v))
    b = int(round(255 * (1.0 - v)))
    g = int(round(255 * (1.0 - abs(2.0 * v - 1.0))))
    return "#%02x%02x%02x" % (r, g, b)


def _curve_series(report: MCReport):
    config = report.config
    if "alpha_grid" in config:
        xs = list(config["alpha_grid"])
        xname = "alpha"
    elif "lambda_grid" in config:
        xs = list(config["lambda_grid"])
        xname = "lambda"
    else:
        raise ValueError("report carries no alpha or lambda grid for a decay curve")
    if not xs:
        raise ValueError("empty grid: nothing to plot")
    series = {}
    for e in report.estimates:
        if not e.name.startswith("tail["):
            continue
        label = e.name.split(";")[0][5:] if ";" in e.name else "tail"
        series.setdefault(label, []).append(e.value)
    if not series or any(len(v) != len(xs) for v in series.values()):
        raise ValueError("report estimates do not form a full decay series")
    return xname, xs, series


def _emit_decay_curve(report: MCReport) -> str:
    xname, xs, series = _curve_series(report)
    lines = _svg_header("%s decay curve" % report.kind)
    x0, y0 = _MARGIN, _SVG_H - _MARGIN
    x1, y1 = _SVG_W - _MARGIN, _MARGIN
    lines.append(
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x1, y0)
    )
    lines.append(
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x0, y1)
    )
    ymax = max(max(v) for v in series.values())
    ymax = ymax if ymax > 0 else 1.0
    xmax = max(xs)
    xmin = min(xs)
    span = xmax - xmin if xmax > xmin else 1.0
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    for si, (label, ys) in enumerate(sorted(series.items())):
        pts = []
        for x, y in zip(xs, ys):
            px = x0 + (x - xmin) / span * (x1 - x0)
            py = y0 - y / ymax * (y0 - y1)
            pts.append("%s,%s" % (repr(round(px, 3)), repr(round(py, 3))))
        lines.append(
            '<polyline fill="none" stroke="%s" stroke-width="1.5" points="%s"/>'
            % (colors[si % len(colors)], " ".join(pts))
        )
        lines.append(
            '<text x="%d" y="%d" font-family="monospace" font-size="11" fill="%s">%s</text>'
            % (x1 - 150, y1 + 14 * (si + 1), colors[si % len(colors)], escape(label))
        )
    lines.append(
        '<text x="%d" y="%d" font-family="monospace" font-size="12">%s</text>'
        % ((_SVG_W - _MARGIN * 2) // 2, _SVG_H - 20, escape(xname))
    )
    lines.append(_svg_metadata({"x": xs, "xname": xname, "series": series}))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _emit_cov_heatmap(report: MCReport) -> str:
    pts = report.config.get("points")
    if not pts:
        raise ValueError("report carries no points for a covariance heatmap")
    k = len(pts)
    est = np.zeros((k, k))
    exp = np.zeros((k, k))
    seen = 0
    for e in report.estimates:
        if e.name.startswith("cov["):
            a, b = (int(v) for v in e.name[4:-1].split(","))
            est[a, b] = est[b, a] = e.value
            exp[a, b] = exp[b, a] = e.expected
            seen += 1
    if seen != k * (k + 1) // 2:
        raise ValueError("report is missing covariance entries")
    lines = _svg_header("covariance: estimate (left) vs analytic (right)")
    side = min((_SVG_W // 2 - 2 * _MARGIN) // k, (_SVG_H - 2 * _MARGIN) // k)
    vmax = max(float(exp.max()), float(est.max()), 1e-12)
    for gi, (mat, xoff) in enumerate(((est, _MARGIN), (exp, _SVG_W // 2 + 20))):
        for a in range(k):
            for b in range(k):
                color = _heat_color(float(mat[a, b]) / vmax)
                lines.append(
                    '<rect x="%d" y="%d" width="%d" height="%d" fill="%s" stroke="#ccc"/>'
                    % (xoff + b * side, _MARGIN + a * side, side, side, color)
                )
                lines.append(
                    '<text x="%d" y="%d" font-family="monospace" font-size="10">%s</text>'
                    % (
                        xoff + b * side + 2,
                        _MARGIN + a * side + side // 2,
                        repr(round(float(mat[a, b]), 4)),
                    )
                )
    lines.append(
        _svg_metadata(
            {"points": pts, "estimate": est.tolist(), "analytic": exp.tolist()}
        )
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _emit_sample_path(report: MCReport) -> str:
    series = report.config.get("series", {})
    path = series.get("path")
    if path is None:
        raise ValueError("report carries no sample-path series")
    V = np.asarray(path, dtype=np.float64)
    n = V.shape[0] - 1
    cells = V[:n, :n]
    lines = _svg_header("sample path (cells are grid values)")
    side = min((_SVG_W - 2 * _MARGIN) // n, (_SVG_H - 2 * _MARGIN) // n)
    lo, hi = float(cells.min()), float(cells.max())
    span = hi - lo if hi > lo else 1.0
    for i in range(n):
        for j in range(n):
            shade = int(round(255 * (float(cells[i, j]) - lo) / span))
            lines.append(
                '<rect x="%d" y="%d" width="%d" height="%d" fill="#%02x%02x%02x"/>'
                % (
                    _MARGIN + j * side,
                    _MARGIN + (n - 1 - i) * side,
                    side,
                    side,
                    shade,
                    shade,
                    shade,
                )
            )
    lines.append(
        '<text x="%d" y="%d" font-family="monospace" font-size="11">min=%s max=%s</text>'
        % (_MARGIN, _SVG_H - 24, repr(round(lo, 6)), repr(round(hi, 6)))
    )
    lines.append(_svg_metadata({"values": V.tolist()}))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_plot(report: MCReport, kind: str) -> str:
    """Render a report as a standalone SVG with embedded data values."""
    if kind == "decay-curve":
        return _emit_decay_curve(report)
    if kind == "cov-heatmap":
        return _emit_cov_heatmap(report)
    if kind == "sample-path":
        return _emit_sample_path(report)
    raise ValueError("unknown plot kind %r" % kind)


_PLOT_FOR_KIND = {
    "simulate": "sample-path",
    "fdd": "cov-heatmap",
    "tightness": "decay-curve",
    "level-tail": "decay-curve",
    "increment-tail": "decay-curve",
}


# ---------------------------------------------------------------------------
# Artifact writing


def _report_basename(kind: str, seen: dict) -> str:
    count = seen.get(kind, 0)
    seen[kind] = count + 1
    return kind if count == 0 else "%s-%d" % (kind, count + 1)


def write_artifacts(reports: list, config: dict, out_dir) -> dict:
    """Write reports and the manifest; returns the manifest payload."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = config.get("formats", ["json", "csv"])
    entries = []
    seen = {}

    def record(name: str, text: str):
        data = text.encode()
        (out / name).write_bytes(data)
        entries.append(
            {
                "file": name,
                "sha256": hashlib.sha256(data).hexdigest(),
                "bytes": len(data),
            }
        )

    for rep in reports:
        base = _report_basename(rep.kind, seen)
        if "json" in formats:
            record(base + ".json", rep.to_json() + "\n")
        if "csv" in formats:
            record(base + ".csv", rep.to_csv())
        plot_kind = _PLOT_FOR_KIND.get(rep.kind)
        if "svg" in formats and plot_kind is not None:
            record(base + ".svg", emit_plot(rep, plot_kind))
    entries.sort(key=lambda e: e["file"])
    identity = {k: v for k, v in config.items() if k != "out"}
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": identity,
        "config_sha256": config_hash(identity),
        "outputs": entries,
        "passed": all(rep.passed for rep in reports),
    }
    manifest_text = canonical_json(manifest) + "\n"
    (out / "manifest.json").write_bytes(manifest_text.encode())
    return manifest


# ---------------------------------------------------------------------------
# Entry point


def run(config_path, overrides=(), out=None, seed=None, jobs=None) -> int:
    """Load, validate, execute, and persist one experiment run."""
    try:
        with open(config_path, "r") as fh:
            raw = fh.read()
    except OSError as exc:
        print("error: cannot read config: %s" % exc, file=sys.stderr)
        return EXIT_IO
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        print("error: config is not valid JSON: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(config, dict):
        print("error: config root must be an object", file=sys.stderr)
        return EXIT_CONFIG
    config = merge_defaults(config)
    try:
        for item in overrides:
            key, value = parse_override(item)
            apply_override(config, key, value)
        if seed is not None:
            apply_override(config, "mc.seed", seed)
        if jobs is not None:
            apply_override(config, "mc.jobs", jobs)
        if out is not None:
            apply_override(config, "out", out)
        validate_config(config)
        reports = run_experiment(config)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, ArithmeticError) as exc:
        print("error: estimator failure: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME
    try:
        manifest = write_artifacts(reports, config, config["out"])
    except OSError as exc:
        print("error: cannot write artifacts: %s" % exc, file=sys.stderr)
        return EXIT_IO
    verdicts = "pass" if manifest["passed"] else "FAIL"
    print(
        "wrote %d artifacts to %s (config %s, backend %s, verdicts %s)"
        % (
            len(manifest["outputs"]) + 1,
            config["out"],
            manifest["config_sha256"][:12],
            backend_name(),
            verdicts,
        )
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sheetlimit",
        description="Run a simulation/verification experiment from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the experiment JSON")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="K=V",
        help="override a config key (dotted path, JSON value), repeatable",
    )
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="override mc.seed")
    parser.add_argument("--jobs", type=int, help="override mc.jobs (threads)")
    args = parser.parse_args(argv)
    return run(
        args.config,
        overrides=args.override,
        out=args.out,
        seed=args.seed,
        jobs=args.jobs,
    )


if __name__ == "__main__":
    sys.exit(main())
