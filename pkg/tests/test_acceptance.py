"""Acceptance gate: ten criteria, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
verdict lines.  Every criterion states its own tolerance and runtime
budget; a FAIL line is followed by the assertion that reports it.
"""

import json
import time

import numpy as np
import pytest

from sheetlimit.cli import run as cli_run
from sheetlimit.diagnostics import (
    MCConfig,
    conditional_variance_check,
    fdd_convergence_test,
    fdd_trend_check,
    m_dependence_check,
    tightness_probe,
)
from sheetlimit.dspace import (
    GridFunction,
    billingsley_objective,
    continuity_modulus,
    grid_timechanges,
    partition_modulus_search,
    random_timechanges,
    skorohod_distance_upper,
    skorohod_objective,
    timechange_norm,
)
from sheetlimit.fieldgen import (
    FieldSpec,
    InnovationSpec,
    MAKernel,
    VarianceProfile,
    generate_field,
    long_run_variance,
)
from sheetlimit.kernels import hash_u64
from sheetlimit.martdecomp import (
    decompose,
    maximal_inequality_check,
    power_sum_bound_check,
    verify_recovery,
)
from sheetlimit.sheet import FddSpec, sample_fdd
from sheetlimit.sumproc import partial_sums

MA1 = np.array([[1.0, 0.5], [0.5, 0.25]])


def make_spec(law="gaussian", coeffs=((1.0,),), profile=None):
    if profile is None:
        profile = VarianceProfile.constant(1.0)
    return FieldSpec(
        innovations=InnovationSpec(law, profile), kernel=MAKernel(np.asarray(coeffs))
    )


def _verdict(num, label, ok, elapsed, budget):
    line = "ACCEPTANCE %02d %-24s %s (%.1fs, budget %ds)" % (
        num,
        label,
        "PASS" if ok else "FAIL",
        elapsed,
        budget,
    )
    print("\n" + line)
    assert ok, line
    assert elapsed < budget, line


def test_criterion_01_recovery_identity():
    t0 = time.time()
    rng = np.random.default_rng(101)
    laws = ("gaussian", "rademacher", "uniform")
    profiles = (
        lambda r: VarianceProfile.constant(0.5 + r.random()),
        lambda r: VarianceProfile.affine(
            1.0 + r.random(), 0.8 * r.random() - 0.4, 0.8 * r.random() - 0.4
        ),
        lambda r: VarianceProfile.sinusoidal(
            1.0 + r.random(), 0.4 * r.random(), 0.5 + r.random(), 0.5 + r.random()
        ),
    )
    ok = True
    for i in range(50):
        m = int(rng.integers(0, 3))
        coeffs = rng.uniform(-1.0, 1.0, size=(m + 1, m + 1))
        spec = FieldSpec(
            innovations=InnovationSpec(laws[i % 3], profiles[i % 3](rng)),
            kernel=MAKernel(coeffs),
        )
        f = generate_field(spec, 128, 128, hash_u64(202, i))
        ok = ok and verify_recovery(decompose(f), f, tol=1e-10).passed
    _verdict(1, "recovery-identity", ok, time.time() - t0, 10)


def test_criterion_02_power_sum_bound():
    t0 = time.time()
    rng = np.random.default_rng(2002)
    violations = 0
    equality_ok = True
    spot_ok = True
    for m in (0, 1, 2):
        side = 2 * m + 1
        for p in (1.5, 2.0, 3.0, 4.0):
            Z = rng.standard_normal((100_000, side, side)) + 1j * rng.standard_normal(
                (100_000, side, side)
            )
            lhs = np.abs(Z.sum(axis=(1, 2))) ** p
            rhs = side ** (2.0 * (p - 1.0)) * (np.abs(Z) ** p).sum(axis=(1, 2))
            violations += int((lhs > rhs).sum())
            for idx in (0, 31_337, 99_999):
                api_lhs, api_rhs = power_sum_bound_check(Z[idx], p)
                spot_ok = spot_ok and np.isclose(api_lhs, lhs[idx], rtol=1e-12)
                spot_ok = spot_ok and np.isclose(api_rhs, rhs[idx], rtol=1e-12)
            for _ in range(100):
                c = complex(rng.standard_normal(), rng.standard_normal())
                const_lhs, const_rhs = power_sum_bound_check(
                    np.full((side, side), c), p
                )
                tol = 1e-12 * max(1.0, abs(const_rhs))
                equality_ok = equality_ok and abs(const_lhs - const_rhs) <= tol
    ok = violations == 0 and equality_ok and spot_ok
    _verdict(2, "power-sum-bound", ok, time.time() - t0, 30)


def test_criterion_03_maximal_inequality():
    t0 = time.time()
    ok = True
    for ilaw, law in enumerate(("gaussian", "rademacher")):
        for m, coeffs in ((0, [[1.0]]), (1, MA1)):
            for p in (2.0, 4.0):
                spec = make_spec(law, coeffs)
                rep = maximal_inequality_check(
                    spec, p=p, n=64, N=2000, seed=hash_u64(303, ilaw, m, int(p))
                )
                ok = ok and rep.passed
                if p == 2.0 and m == 1:
                    ok = ok and rep.prefactor == 144.0
    _verdict(3, "maximal-inequality", ok, time.time() - t0, 120)


def _bilinear_grid(rng, n):
    coarse = rng.standard_normal((3, 3))
    g = np.linspace(0.0, 1.0, n + 1)
    u = np.minimum(g * 2.0, 2.0)
    i0 = np.minimum(u.astype(int), 1)
    fr = u - i0
    V = (
        coarse[np.ix_(i0, i0)] * np.outer(1.0 - fr, 1.0 - fr)
        + coarse[np.ix_(i0 + 1, i0)] * np.outer(fr, 1.0 - fr)
        + coarse[np.ix_(i0, i0 + 1)] * np.outer(1.0 - fr, fr)
        + coarse[np.ix_(i0 + 1, i0 + 1)] * np.outer(fr, fr)
    )
    return GridFunction(V)


def test_criterion_04_moduli_relations():
    t0 = time.time()
    rng = np.random.default_rng(404)
    deltas = (0.1, 0.2, 0.3)
    violations = 0
    for _ in range(200):
        x = GridFunction(rng.standard_normal((9, 9)))
        for d in deltas:
            wp = partition_modulus_search(x, d).value
            if wp > continuity_modulus(x, 2.0 * d) + 1e-12:
                violations += 1
    continuous_ok = True
    g = np.linspace(0.0, 1.0, 9)
    for i in range(50):
        if i % 5 == 0:
            a, b = rng.standard_normal(2)
            x = GridFunction(np.add.outer(a * g, b * g))
        else:
            x = _bilinear_grid(rng, 8)
        for d in deltas:
            w = continuity_modulus(x, d)
            wp = partition_modulus_search(x, d).value
            continuous_ok = continuous_ok and w <= 2.0 * wp + 1e-12
    ok = violations == 0 and continuous_ok
    _verdict(4, "moduli-relations", ok, time.time() - t0, 60)


def test_criterion_05_metric_objectives():
    t0 = time.time()
    rng = np.random.default_rng(505)
    # exhaustive k=4 grid relabelings; all non-identity ones have
    # |log slope| >= log(4/3) > 1/4, so gentle random deformations are
    # added to make the d0 <= 1/4 premise bite at nonzero norm too
    candidates = grid_timechanges(4) + random_timechanges(
        40, seed=515, max_log_slope=0.2
    )
    ok = True
    binding = 0
    binding_deformed = 0
    for _ in range(100):
        x = GridFunction(0.04 * rng.standard_normal((9, 9)))
        y = GridFunction(0.04 * rng.standard_normal((9, 9)))
        sup = float(np.max(np.abs(x.values - y.values)))
        ok = ok and skorohod_distance_upper(x, y, candidates=[]) == sup
        for tc in candidates:
            d0 = billingsley_objective(x, y, tc)
            if d0 <= 0.25:
                binding += 1
                if timechange_norm(tc) > 0.0:
                    binding_deformed += 1
                ok = ok and skorohod_objective(x, y, tc) <= 2.0 * d0 + 1e-12
    ok = ok and binding > 0 and binding_deformed > 0
    _verdict(5, "metric-objectives", ok, time.time() - t0, 60)


def test_criterion_06_sheet_reference():
    t0 = time.time()
    points = [(1.0, 1.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25)]
    spec = FddSpec(points)
    Z = sample_fdd(spec, 100_000, seed=606)
    cov = spec.covariance()
    ok = True
    for a in range(4):
        for b in range(a, 4):
            prod = Z[:, a] * Z[:, b]
            est = prod.mean()
            se = prod.std(ddof=1) / np.sqrt(len(prod))
            ok = ok and abs(est - cov[a, b]) <= 3.0 * se
    var = (Z[:, 0] ** 2).mean()
    var_se = (Z[:, 0] ** 2).std(ddof=1) / np.sqrt(len(Z))
    ok = ok and abs(var - 1.0) <= 3.0 * var_se
    _verdict(6, "sheet-reference", ok, time.time() - t0, 30)


def test_criterion_07_fclt_end_to_end():
    t0 = time.time()
    points = [(1.0, 1.0), (0.75, 0.75), (0.5, 1.0), (1.0, 0.5)]
    probes = [(1.0, 0.0, 0.0, 0.0), (0.5, 0.5, 0.5, 0.5), (1.0, -1.0, 1.0, -1.0)]
    ok = True
    for coeffs in ([[1.0]], MA1):
        spec = make_spec("gaussian", coeffs)
        if np.asarray(coeffs).size > 1:
            ok = ok and long_run_variance(spec) == pytest.approx(5.0625)
        cfg = MCConfig(spec=spec, n=64, N=5000, seed=11)
        rep = fdd_convergence_test(cfg, FddSpec(points), probes=probes)
        ok = ok and rep.passed
        trend = fdd_trend_check(cfg, FddSpec(points))
        ok = ok and trend.get("trend").passed
    _verdict(7, "fclt-end-to-end", ok, time.time() - t0, 300)


def test_criterion_08_tightness_probe():
    t0 = time.time()
    spec = make_spec("gaussian", MA1)
    lams = [1.0, 2.0, 4.0]
    cal = tightness_probe(MCConfig(spec=spec, n=32, N=400, seed=808), lams, eps=1.0)
    eps = max(
        lam ** 2
        * (
            cal.get("tail[origin=0,0;lam=%s]" % repr(lam)).value
            + 3.0 * cal.get("tail[origin=0,0;lam=%s]" % repr(lam)).se
        )
        for lam in lams
    )
    rep = tightness_probe(MCConfig(spec=spec, n=64, N=400, seed=808), lams, eps=eps)
    ok = rep.passed
    _verdict(8, "tightness-probe", ok, time.time() - t0, 120)


def test_criterion_09_determinism(tmp_path):
    t0 = time.time()
    config = {
        "version": 1,
        "kind": "full-suite",
        "field": {
            "innovations": {
                "law": "gaussian",
                "variance_profile": {"kind": "constant", "value": 1.0},
            },
            "kernel": {"coeffs": [[1.0]]},
        },
        "mc": {"n": 16, "N": 100, "seed": 7},
        "formats": ["json", "csv", "svg"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    code1 = cli_run(str(path), out=str(out1))
    code2 = cli_run(str(path), out=str(out2))
    ok = code1 == 0 and code2 == 0
    names1 = sorted(p.name for p in out1.iterdir())
    ok = ok and names1 == sorted(p.name for p in out2.iterdir())
    for name in names1:
        ok = ok and (out1 / name).read_bytes() == (out2 / name).read_bytes()
    _verdict(9, "determinism", ok, time.time() - t0, 60)


def test_criterion_10_negative_control():
    t0 = time.time()
    # true dependence range 2, declared range 1
    long_range = make_spec(
        "gaussian", [[1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 1.0]]
    )
    mdep = m_dependence_check(
        MCConfig(spec=long_range, n=24, N=400, seed=1010), claimed_m=1
    )
    cv = conditional_variance_check(
        MCConfig(spec=long_range, n=8, N=2000, seed=1010), claimed_m=1, window=1
    )
    ok = (not mdep.passed) and (not cv.passed)
    ok = ok and cv.get("cov_centered_square").passed is False
    # the same kernel at its true declared range passes both checks
    honest_mdep = m_dependence_check(MCConfig(spec=long_range, n=24, N=400, seed=1010))
    honest_cv = conditional_variance_check(
        MCConfig(spec=long_range, n=8, N=2000, seed=1010), window=1
    )
    ok = ok and honest_mdep.passed and honest_cv.passed
    _verdict(10, "negative-control", ok, time.time() - t0, 60)
