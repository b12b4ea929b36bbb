"""Monte Carlo verification of the limit-theorem statements.

Estimators here verify, at desk scale, that the normalized partial-sum
process behaves like the Brownian sheet: finite-dimensional convergence
(covariances and Cramer-Wold projections), uniform integrability of
running-max squares, tightness tail bounds, the characteristic-function
weighted increment moments, and the conditional-variance hypothesis.

Conventions, applied uniformly:
  * every estimator is an unbiased sample mean whose standard error is
    computed from the same sample;
  * verdicts always compare an estimate against an explicit tolerance
    (confidence multiplier x SE, plus any documented deterministic
    allowance), never raw numbers;
  * asymptotic statements are checked as a two-point trend (n and 2n,
    common random numbers) plus a tolerance at the larger n;
  * replication r draws its seed as hash_u64(base_seed, r), so results
    are independent of scheduling and identical across reruns.
"""

from __future__ import annotations

import cmath
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .dspace import GridFunction
from .fieldgen import FieldSpec, generate_field, long_run_variance, site_variances
from . import kernels
from .kernels import hash_u64
from .sheet import FddSpec
from .sumproc import Rect, increment, partial_sum_process, partial_sums

__all__ = [
    "MCConfig",
    "Estimate",
    "MCReport",
    "CfWeightedResult",
    "fdd_convergence_test",
    "fdd_trend_check",
    "ui_tail",
    "window_tail_indicator",
    "tightness_probe",
    "level_tail_mean",
    "increment_square_tail",
    "increment_square_tail_curve",
    "cf_weighted_increment_test",
    "conditional_variance_check",
    "m_dependence_check",
]

KS_ALPHA = 0.01
DEFAULT_ALPHA_GRID = (1.0, 2.0, 4.0, 8.0, 16.0)
DEFAULT_H_GRID = (0.25, 0.125, 0.0625)


@dataclass(frozen=True)
class MCConfig:
    """Shared Monte Carlo configuration.

    ``sigma`` defaults to sqrt(long_run_variance(spec)) when omitted;
    ``confidence`` is the SE multiplier used by every verdict; ``jobs``
    only schedules replications across threads and never changes the
    result (reduction order is fixed by replication index).
    """

    spec: FieldSpec
    n: int
    N: int
    seed: int
    sigma: float = None
    confidence: float = 3.0
    jobs: int = 1

    def __post_init__(self):
        if self.N < 100:
            raise ValueError("N must be >= 100")
        if self.n < 8:
            raise ValueError("n must be >= 8")
        if self.confidence <= 0.0:
            raise ValueError("confidence must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.sigma is not None and not self.sigma > 0.0:
            raise ValueError("sigma must be positive when given")

    def resolved_sigma(self) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        return float(np.sqrt(long_run_variance(self.spec)))

    def rep_seed(self, r: int) -> int:
        return hash_u64(self.seed, r)

    def to_config(self) -> dict:
        return {
            "spec": self.spec.to_config(),
            "n": self.n,
            "N": self.N,
            "seed": self.seed,
            "sigma": self.sigma,
            "confidence": self.confidence,
            "jobs": self.jobs,
        }


@dataclass
class Estimate:
    """One named estimate row: value, SE, and an explicit verdict.

    ``passed`` is None for report-only rows (curves, diagnostics that
    carry no asserted tolerance).
    """

    name: str
    value: float
    se: float
    expected: float = None
    tol: float = None
    passed: bool = None
    pvalue: float = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "se": self.se,
            "expected": self.expected,
            "tol": self.tol,
            "passed": self.passed,
            "pvalue": self.pvalue,
        }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class MCReport:
    """Named estimates plus the full configuration that produced them."""

    kind: str
    config: dict
    estimates: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.estimates if e.passed is not None)

    def get(self, name: str) -> Estimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "estimates": [e.to_dict() for e in self.estimates],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, separators=(",", ":"))

    def to_csv(self) -> str:
        lines = ["name,value,se,expected,tol,passed,pvalue"]
        for e in self.estimates:
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (e.name, e.value, e.se, e.expected, e.tol, e.passed, e.pvalue)
                )
            )
        return "\n".join(lines) + "\n"


def _mean_se(samples):
    samples = np.asarray(samples, dtype=np.float64)
    mean = float(samples.mean())
    if len(samples) > 1:
        se = float(samples.std(ddof=1) / np.sqrt(len(samples)))
    else:
        se = 0.0
    return mean, se


def _parallel_map(fn, count: int, jobs: int):
    if jobs <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, range(count)))


def _verdict_row(name, samples, expected, confidence, slack=0.0):
    value, se = _mean_se(samples)
    tol = confidence * se + slack
    return Estimate(
        name=name,
        value=value,
        se=se,
        expected=float(expected),
        tol=tol,
        passed=bool(abs(value - expected) <= tol),
    )


# ---------------------------------------------------------------------------
# FDD convergence


def _point_samples(cfg: MCConfig, pts: np.ndarray) -> np.ndarray:
    """N x k matrix of X_n evaluated at the given points."""
    sigma = cfg.resolved_sigma()

    def one(r):
        f = generate_field(cfg.spec, cfg.n, cfg.n, cfg.rep_seed(r))
        X = partial_sum_process(f, sigma, cfg.n)
        return X.eval(pts[:, 0], pts[:, 1])

    return np.asarray(_parallel_map(one, cfg.N, cfg.jobs))


def _cov_rows(V: np.ndarray, fdd: FddSpec, confidence: float):
    cov = fdd.covariance()
    rows = []
    k = V.shape[1]
    for a in range(k):
        for b in range(a, k):
            rows.append(
                _verdict_row(
                    "cov[%d,%d]" % (a, b), V[:, a] * V[:, b], cov[a, b], confidence
                )
            )
    return rows


def fdd_convergence_test(cfg: MCConfig, fdd: FddSpec, probes=()) -> MCReport:
    """FDD check against the sheet: covariances and Cramer-Wold KS tests.

    Covariance entries are uncentered product means compared with
    min*min within confidence x SE.  Each probe u gives the scalar
    sum_j u_j X_n(t_j), compared to N(0, u' Sigma u) by a KS test at
    level KS_ALPHA Bonferroni-corrected across probes.  Probes whose
    analytic variance is zero (points on the axes) are checked for
    exact degeneracy instead.
    """
    pts = np.asarray(fdd.points, dtype=np.float64)
    probes = [np.asarray(u, dtype=np.float64) for u in probes]
    for u in probes:
        if u.shape != (len(pts),):
            raise ValueError("each probe must have one weight per point")
    V = _point_samples(cfg, pts)
    rows = _cov_rows(V, fdd, cfg.confidence)
    cov = fdd.covariance()
    alpha = KS_ALPHA / max(1, len(probes))
    for idx, u in enumerate(probes):
        var_u = float(u @ cov @ u)
        s = V @ u
        if var_u < 1e-14:
            rows.append(
                Estimate(
                    name="ks[%d]" % idx,
                    value=float(np.max(np.abs(s))),
                    se=0.0,
                    expected=0.0,
                    tol=0.0,
                    passed=bool(np.all(s == 0.0)),
                )
            )
            continue
        stat, pvalue = stats.kstest(s / np.sqrt(var_u), "norm")
        rows.append(
            Estimate(
                name="ks[%d]" % idx,
                value=float(stat),
                se=0.0,
                expected=None,
                tol=None,
                passed=bool(pvalue >= alpha),
                pvalue=float(pvalue),
            )
        )
    config = dict(cfg.to_config())
    config["points"] = [list(p) for p in fdd.points]
    config["probes"] = [list(map(float, u)) for u in probes]
    return MCReport(kind="fdd", config=config, estimates=rows)


def _max_cov_error(cfg: MCConfig, fdd: FddSpec):
    """Max absolute covariance deviation and the SE at the arg-max entry."""
    pts = np.asarray(fdd.points, dtype=np.float64)
    V = _point_samples(cfg, pts)
    rows = _cov_rows(V, fdd, cfg.confidence)
    worst = max(rows, key=lambda e: abs(e.value - e.expected))
    return abs(worst.value - worst.expected), worst.se


def fdd_trend_check(cfg: MCConfig, fdd: FddSpec) -> MCReport:
    """Covariance error at n versus 2n (common random numbers).

    The counter RNG addresses innovations by lattice site, so the 2n
    run reuses every site of the n run; the trend verdict allows
    confidence x (SE_n + SE_2n) slack.
    """
    err_n, se_n = _max_cov_error(cfg, fdd)
    cfg2 = replace(cfg, n=2 * cfg.n)
    err_2n, se_2n = _max_cov_error(cfg2, fdd)
    slack = cfg.confidence * (se_n + se_2n)
    rows = [
        Estimate(name="cov_err[n=%d]" % cfg.n, value=err_n, se=se_n),
        Estimate(name="cov_err[n=%d]" % cfg2.n, value=err_2n, se=se_2n),
        Estimate(
            name="trend",
            value=err_2n - err_n,
            se=se_n + se_2n,
            expected=0.0,
            tol=slack,
            passed=bool(err_2n <= err_n + slack),
        ),
    ]
    config = dict(cfg.to_config())
    config["points"] = [list(p) for p in fdd.points]
    return MCReport(kind="fdd-trend", config=config, estimates=rows)


# ---------------------------------------------------------------------------
# Uniform integrability and tightness


def _window_origins(n: int):
    return ((0, 0), (0, n // 2), (n // 2, 0), (n // 2, n // 2))


def ui_tail(cfg: MCConfig, family: str, y: float) -> float:
    """sup over the family of E[xi 1{xi >= y}] for the squared quantity.

    family "field_squares": xi = x_{i,j}^2 per site of the n x n field.
    family "running_max_squares": xi = (max window |S_{k+.} - S_k|)^2/n^2
    over window origins (0 and n/2 per axis, window size n).
    """
    if y < 0.0:
        raise ValueError("y must be >= 0")
    n = cfg.n
    if family == "field_squares":

        def one(r):
            f = generate_field(cfg.spec, n, n, cfg.rep_seed(r))
            xi = f.values ** 2
            return xi * (xi >= y)

        acc = _parallel_map(one, cfg.N, cfg.jobs)
        per_site = np.mean(acc, axis=0)
        return float(per_site.max())
    if family == "running_max_squares":
        origins = _window_origins(n)
        dims = n + n // 2

        def one(r):
            f = generate_field(cfg.spec, dims, dims, cfg.rep_seed(r))
            S = partial_sums(f)
            out = np.empty(len(origins))
            for idx, (k1, k2) in enumerate(origins):
                xi = (kernels.window_max_abs(S.padded, k1, k2, n) / n) ** 2
                out[idx] = xi * (xi >= y)
            return out

        acc = np.asarray(_parallel_map(one, cfg.N, cfg.jobs))
        return float(acc.mean(axis=0).max())
    raise ValueError("family must be field_squares or running_max_squares")


def window_tail_indicator(S, k1: int, k2: int, n: int, lam: float) -> float:
    """1 if max_{i,j<=n} |S_{k+i,k+j} - S_{k1,k2}| >= lam * n, else 0."""
    return float(kernels.window_max_abs(S.padded, k1, k2, n) >= lam * n)


def tightness_probe(
    cfg: MCConfig, lambda_grid, eps: float, lambda0: float = None, origins=None
) -> MCReport:
    """Tail probabilities P(max |Delta S| >= lambda n) vs eps/lambda^2.

    For each window origin and each lambda the estimate is the sample
    probability; the verdict (for lambda >= lambda0) is estimate <=
    eps/lambda^2 + confidence x SE.  A per-origin isotonic sanity row
    confirms the estimates do not increase in lambda beyond noise.
    """
    lams = sorted(float(v) for v in lambda_grid)
    if not lams or lams[0] <= 0.0:
        raise ValueError("lambda grid must be positive")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if lambda0 is None:
        lambda0 = lams[0]
    if origins is None:
        origins = ((0, 0),)
    n = cfg.n
    d1 = max(o[0] for o in origins) + n
    d2 = max(o[1] for o in origins) + n

    def one(r):
        f = generate_field(cfg.spec, d1, d2, cfg.rep_seed(r))
        S = partial_sums(f)
        out = np.empty((len(origins), len(lams)))
        for io, (k1, k2) in enumerate(origins):
            mx = kernels.window_max_abs(S.padded, k1, k2, n)
            for il, lam in enumerate(lams):
                out[io, il] = 1.0 if mx >= lam * n else 0.0
        return out

    acc = np.asarray(_parallel_map(one, cfg.N, cfg.jobs))
    rows = []
    for io, origin in enumerate(origins):
        ests = []
        for il, lam in enumerate(lams):
            est, se = _mean_se(acc[:, io, il])
            bound = eps / lam ** 2
            asserted = lam >= lambda0
            rows.append(
                Estimate(
                    name="tail[origin=%d,%d;lam=%s]" % (origin[0], origin[1], repr(lam)),
                    value=est,
                    se=se,
                    expected=bound,
                    tol=cfg.confidence * se,
                    passed=bool(est <= bound + cfg.confidence * se) if asserted else None,
                )
            )
            ests.append((est, se))
        worst = 0.0
        ok = True
        for (e0, s0), (e1, s1) in zip(ests, ests[1:]):
            worst = max(worst, e1 - e0)
            if e1 > e0 + cfg.confidence * (s0 + s1):
                ok = False
        rows.append(
            Estimate(
                name="monotone[origin=%d,%d]" % origin,
                value=worst,
                se=0.0,
                expected=0.0,
                tol=None,
                passed=bool(ok),
            )
        )
    config = dict(cfg.to_config())
    config["lambda_grid"] = lams
    config["eps"] = eps
    config["lambda0"] = lambda0
    config["origins"] = [list(o) for o in origins]
    return MCReport(kind="tightness", config=config, estimates=rows)


# ---------------------------------------------------------------------------
# Level and increment tail conditions


def _decay_row(name, first, last, confidence):
    (e0, s0), (e1, s1) = first, last
    slack = confidence * (s0 + s1)
    return Estimate(
        name=name,
        value=e1 - e0,
        se=s0 + s1,
        expected=0.0,
        tol=slack,
        passed=bool(e1 <= e0 + slack),
    )


def level_tail_mean(
    cfg: MCConfig, t, alpha_grid=DEFAULT_ALPHA_GRID, abs_variant: bool = False
) -> MCReport:
    """Tail means E[X_n(t) 1{X_n(t) >= alpha}] over an alpha grid.

    As written the quantity is a positive-part tail; ``abs_variant``
    switches to E[|X_n(t)| 1{|X_n(t)| >= alpha}].  Rows are reported
    with SEs; the single verdict is the decay row comparing the largest
    alpha against the smallest.
    """
    alphas = sorted(float(a) for a in alpha_grid)
    if not alphas or alphas[0] < 0.0:
        raise ValueError("alpha grid must be non-negative")
    sigma = cfg.resolved_sigma()
    t1, t2 = float(t[0]), float(t[1])

    def one(r):
        f = generate_field(cfg.spec, cfg.n, cfg.n, cfg.rep_seed(r))
        X = partial_sum_process(f, sigma, cfg.n)
        return X.eval(t1, t2)

    x = np.asarray(_parallel_map(one, cfg.N, cfg.jobs))
    base = np.abs(x) if abs_variant else x
    rows = []
    curve = []
    for a in alphas:
        samples = base * (base >= a)
        est, se = _mean_se(samples)
        rows.append(Estimate(name="tail[alpha=%s]" % repr(a), value=est, se=se))
        curve.append((est, se))
    rows.append(_decay_row("decay", curve[0], curve[-1], cfg.confidence))
    config = dict(cfg.to_config())
    config["t"] = [t1, t2]
    config["alpha_grid"] = alphas
    config["abs_variant"] = abs_variant
    return MCReport(kind="level-tail", config=config, estimates=rows)


def _increment_square_samples(cfg, s_hat, t_hat, t, h):
    if not (0.0 <= s_hat < t_hat <= 1.0):
        raise ValueError("need 0 <= s_hat < t_hat <= 1")
    if not (0.0 <= t and t + h <= 1.0 and h > 0.0):
        raise ValueError("need 0 <= t < t + h <= 1")
    sigma = cfg.resolved_sigma()
    rect = Rect(s_hat, t_hat, t, t + h)

    def one(r):
        f = generate_field(cfg.spec, cfg.n, cfg.n, cfg.rep_seed(r))
        X = partial_sum_process(f, sigma, cfg.n)
        return increment(X, rect)

    return np.asarray(_parallel_map(one, cfg.N, cfg.jobs))


def increment_square_tail(
    cfg: MCConfig, s_hat: float, t_hat: float, t: float, h: float, alpha: float
) -> float:
    """(1/h) E[X_n^2(Delta) 1{X_n^2(Delta) >= alpha h}] over the rect.

    The rectangle is (s_hat, t_hat] x (t, t+h], evaluated through the
    step function (degenerate rectangles snap to zero cells and give 0).
    """
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    d = _increment_square_samples(cfg, s_hat, t_hat, t, h)
    sq = d ** 2
    return float(np.mean(sq * (sq >= alpha * h)) / h)


def increment_square_tail_curve(
    cfg: MCConfig,
    s_hat: float,
    t_hat: float,
    t: float,
    h: float,
    alpha_grid=DEFAULT_ALPHA_GRID,
) -> MCReport:
    """Decay curve of increment_square_tail over an alpha grid."""
    alphas = sorted(float(a) for a in alpha_grid)
    if not alphas or alphas[0] < 0.0:
        raise ValueError("alpha grid must be non-negative")
    d = _increment_square_samples(cfg, s_hat, t_hat, t, h)
    sq = d ** 2
    rows = []
    curve = []
    for a in alphas:
        samples = sq * (sq >= a * h) / h
        est, se = _mean_se(samples)
        rows.append(Estimate(name="tail[alpha=%s]" % repr(a), value=est, se=se))
        curve.append((est, se))
    rows.append(_decay_row("decay", curve[0], curve[-1], cfg.confidence))
    config = dict(cfg.to_config())
    config.update({"s_hat": s_hat, "t_hat": t_hat, "t": t, "h": h, "alpha_grid": alphas})
    return MCReport(kind="increment-tail", config=config, estimates=rows)


# ---------------------------------------------------------------------------
# Characteristic-function weighted increments


@dataclass
class CfWeightedResult:
    """Weighted increment moments (1/h) E[e^{i u.X} X(Delta)] and
    (1/h) E[e^{i u.X} (X^2(Delta) - h (t_hat - s_hat))].

    ``est2`` is real in expectation when u = 0; the general estimate is
    complex, so both moments are stored as complex with scalar SEs
    (sqrt of summed component variances over N).
    """

    est1: complex
    est1_se: float
    est2: complex
    est2_se: float
    report: "MCReport"


def _complex_mean_se(samples):
    samples = np.asarray(samples, dtype=np.complex128)
    mean = complex(samples.mean())
    if len(samples) > 1:
        var = samples.real.var(ddof=1) + samples.imag.var(ddof=1)
        se = float(np.sqrt(var / len(samples)))
    else:
        se = 0.0
    return mean, se


def cf_weighted_increment_test(
    cfg: MCConfig, points, u, s_hat: float, t_hat: float, t: float, h: float
) -> CfWeightedResult:
    """Condition-style weighted increment moments over one rectangle.

    ``points`` must lie in the crossed region relative to the rectangle
    (s_hat, t_hat] x (t, t+h]: each point (p1, p2) needs p1 <= s_hat or
    p2 <= t, so the weight is built from data that the limit decouples
    from the increment.  Both moments carry SEs; at u = 0 the first
    moment is exactly mean-zero and is asserted at confidence x SE.
    """
    pts = np.asarray([(float(p[0]), float(p[1])) for p in points], dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if pts.ndim != 2 or u.shape != (len(pts),):
        raise ValueError("need one weight per point")
    for p1, p2 in pts:
        if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
            raise ValueError("points must lie in [0,1]^2")
        if not (p1 <= s_hat or p2 <= t):
            raise ValueError(
                "point (%g, %g) is outside the crossed region for the rectangle" % (p1, p2)
            )
    if not (0.0 <= s_hat < t_hat <= 1.0 and 0.0 <= t and h > 0.0 and t + h <= 1.0):
        raise ValueError("invalid rectangle parameters")
    sigma = cfg.resolved_sigma()
    rect = Rect(s_hat, t_hat, t, t + h)
    area = (t_hat - s_hat) * h

    def one(r):
        f = generate_field(cfg.spec, cfg.n, cfg.n, cfg.rep_seed(r))
        X = partial_sum_process(f, sigma, cfg.n)
        vals = X.eval(pts[:, 0], pts[:, 1])
        w = cmath.exp(1j * float(vals @ u))
        D = increment(X, rect)
        return (w * D / h, w * (D * D - area) / h)

    out = _parallel_map(one, cfg.N, cfg.jobs)
    s1 = np.asarray([o[0] for o in out])
    s2 = np.asarray([o[1] for o in out])
    est1, se1 = _complex_mean_se(s1)
    est2, se2 = _complex_mean_se(s2)
    rows = [
        Estimate(name="est1_re", value=est1.real, se=se1),
        Estimate(name="est1_im", value=est1.imag, se=se1),
        Estimate(name="est2_re", value=est2.real, se=se2),
        Estimate(name="est2_im", value=est2.imag, se=se2),
        Estimate(
            name="abs_bound",
            value=abs(est1),
            se=se1,
            expected=float(np.mean(np.abs(s1.real + 1j * s1.imag))),
            tol=0.0,
            passed=bool(abs(est1) <= np.mean(np.abs(s1)) + 1e-12),
        ),
    ]
    if np.all(u == 0.0):
        rows.append(
            Estimate(
                name="mean_increment",
                value=est1.real,
                se=se1,
                expected=0.0,
                tol=cfg.confidence * se1,
                passed=bool(abs(est1.real) <= cfg.confidence * se1),
            )
        )
    config = dict(cfg.to_config())
    config.update(
        {
            "points": [list(p) for p in pts.tolist()],
            "u": [float(v) for v in u],
            "s_hat": s_hat,
            "t_hat": t_hat,
            "t": t,
            "h": h,
        }
    )
    report = MCReport(kind="cf-weighted", config=config, estimates=rows)
    return CfWeightedResult(est1=est1, est1_se=se1, est2=est2, est2_se=se2, report=report)


# ---------------------------------------------------------------------------
# Conditional variance and m-dependence


def _window_coefficients(spec: FieldSpec, origin, w: int):
    """Exact innovation coefficients of the rectangle sum.

    The rectangle sum over (k1, k1+w] x (k2, k2+w] equals sum_s c_s
    eps_s with c_s = sum of kernel coefficients mapping site s into the
    window; returns c as a (w+m) x (w+m) array over the padded sites.
    """
    m = spec.m
    a = spec.kernel.coeffs
    c = np.zeros((w + m, w + m))
    for k1 in range(m + 1):
        for k2 in range(m + 1):
            c[m - k1 : m - k1 + w, m - k2 : m - k2 + w] += a[k1, k2]
    return c


def _window_mean_exact(spec: FieldSpec, origin, w: int) -> float:
    """Exact E[(rectangle sum)^2] / w^2 at finite n for the window."""
    k1, k2 = origin
    n1, n2 = k1 + w, k2 + w
    m = spec.m
    c = _window_coefficients(spec, origin, w)
    v = site_variances(spec.innovations, n1, n2, m)
    v_sub = v[k1 : k1 + w + m, k2 : k2 + w + m]
    return float(np.sum(c * c * v_sub) / (w * w))


def conditional_variance_check(
    cfg: MCConfig, origin=None, window: int = None, claimed_m: int = None
) -> MCReport:
    """Conditional-variance hypothesis at a window: mean and orthogonality.

    Let Q = (rectangle sum over (k1, k1+w] x (k2, k2+w])^2 / w^2.  The
    check is (a) mean: E-hat[Q] equals the exact finite-n moment within
    confidence x SE, and against sigma^2 with the deterministic
    finite-n gap added to the tolerance; (b) orthogonality: covariance
    of Q with probes measurable for the claimed past F_{k1-m', k2-m'}
    (exactly centered eps^2 and sign(eps) at the corner site) within
    confidence x SE of zero.  Passing claimed_m below the kernel's true
    range makes the corner probe fall inside the window's dependence
    zone, so the check can falsify a wrong m claim.
    """
    spec = cfg.spec
    m = spec.m
    claimed = m if claimed_m is None else int(claimed_m)
    if claimed < 0:
        raise ValueError("claimed_m must be >= 0")
    w = cfg.n if window is None else int(window)
    if w < 1:
        raise ValueError("window must be >= 1")
    if origin is None:
        origin = (claimed + 1, claimed + 1)
    k1, k2 = int(origin[0]), int(origin[1])
    site = (k1 - claimed, k2 - claimed)
    if site[0] < 1 - m or site[1] < 1 - m:
        raise ValueError("probe site precedes the materialized padding")
    n1, n2 = k1 + w, k2 + w
    exact_mean = _window_mean_exact(spec, (k1, k2), w)
    sigma2 = long_run_variance(spec)
    v = site_variances(spec.innovations, n1, n2, m)
    site_v = float(v[site[0] - 1 + m, site[1] - 1 + m])

    def one(r):
        f = generate_field(spec, n1, n2, cfg.rep_seed(r))
        S = partial_sums(f).padded
        R = S[k1 + w, k2 + w] - S[k1, k2 + w] - S[k1 + w, k2] + S[k1, k2]
        Q = R * R / (w * w)
        e = f.innovations[site[0] - 1 + m, site[1] - 1 + m]
        return (Q, Q * (e * e - site_v), Q * np.sign(e))

    out = np.asarray(_parallel_map(one, cfg.N, cfg.jobs))
    rows = [
        _verdict_row("mean", out[:, 0], exact_mean, cfg.confidence),
        Estimate(
            name="sigma2_gap",
            value=abs(exact_mean - sigma2),
            se=0.0,
            expected=0.0,
        ),
        _verdict_row(
            "mean_vs_sigma2",
            out[:, 0],
            sigma2,
            cfg.confidence,
            slack=abs(exact_mean - sigma2),
        ),
        _verdict_row("cov_centered_square", out[:, 1], 0.0, cfg.confidence),
        _verdict_row("cov_sign", out[:, 2], 0.0, cfg.confidence),
    ]
    config = dict(cfg.to_config())
    config.update(
        {
            "origin": [k1, k2],
            "window": w,
            "claimed_m": claimed,
            "probe_site": list(site),
        }
    )
    return MCReport(kind="conditional-variance", config=config, estimates=rows)


def _lag_products_mean(values: np.ndarray, d1: int, d2: int) -> float:
    n1, n2 = values.shape
    if d2 >= 0:
        a = values[: n1 - d1, : n2 - d2]
        b = values[d1:, d2:]
    else:
        a = values[: n1 - d1, -d2:]
        b = values[d1:, : n2 + d2]
    return float((a * b).mean())


def m_dependence_check(cfg: MCConfig, lags=None, claimed_m: int = None) -> MCReport:
    """Covariance at lags beyond the claimed dependence range.

    For every lag (d1, d2) with Chebyshev norm above the claimed m the
    population covariance must vanish; each estimate is the mean over
    replications of the per-field mean product, its SE taken across
    replications (robust to within-field correlation).  The default lag
    set covers the rings m'+1 and m'+2 in the directions (d,0), (0,d),
    (d,d), (d,-d).
    """
    spec = cfg.spec
    claimed = spec.m if claimed_m is None else int(claimed_m)
    if lags is None:
        lags = []
        for d in (claimed + 1, claimed + 2):
            lags.extend([(d, 0), (0, d), (d, d), (d, -d)])
    lags = [(int(d1), int(d2)) for d1, d2 in lags]
    for d1, d2 in lags:
        if d1 < 0 or max(abs(d1), abs(d2)) >= cfg.n:
            raise ValueError("lag does not fit in the field")
        if max(abs(d1), abs(d2)) <= claimed:
            raise ValueError("lag (%d, %d) is within the claimed range" % (d1, d2))

    def one(r):
        f = generate_field(spec, cfg.n, cfg.n, cfg.rep_seed(r))
        return [_lag_products_mean(f.values, d1, d2) for d1, d2 in lags]

    out = np.asarray(_parallel_map(one, cfg.N, cfg.jobs))
    rows = [
        _verdict_row("lag[%d,%d]" % (d1, d2), out[:, i], 0.0, cfg.confidence)
        for i, (d1, d2) in enumerate(lags)
    ]
    config = dict(cfg.to_config())
    config.update({"lags": [list(l) for l in lags], "claimed_m": claimed})
    return MCReport(kind="m-dependence", config=config, estimates=rows)
