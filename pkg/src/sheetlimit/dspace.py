"""Step functions on [0,1]^2 with the Skorohod-space toolkit.

This module holds the function-space side of the package: grid step
functions (the lattice analogue of D([0,1]^2) elements), the continuity
modulus w and the partition modulus w', piecewise-linear time changes,
and certified upper bounds for the Skorohod and Billingsley metrics
computed by exact evaluation over finite candidate sets of time changes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import hash_u64

__all__ = [
    "GridFunction",
    "TimeChange",
    "PartitionSearch",
    "MetricSearch",
    "continuity_modulus",
    "partition_modulus",
    "partition_modulus_search",
    "timechange_norm",
    "grid_timechanges",
    "random_timechanges",
    "skorohod_objective",
    "billingsley_objective",
    "skorohod_distance_upper",
    "billingsley_distance_upper",
    "skorohod_distance_search",
    "billingsley_distance_search",
]


class GridFunction:
    """A real step function on [0,1]^2, constant on a regular grid.

    The function has resolution ``n``: it is constant on each half-open
    cell [i/n, (i+1)/n) x [j/n, (j+1)/n) for 0 <= i, j < n, and the
    closed boundary slices t1 = 1 and t2 = 1 carry their own values.
    Storage is an (n+1) x (n+1) array ``values`` where ``values[i, j]``
    is the function value on the piece whose representative point is
    (i/n, j/n).  Pieces 0..n-1 are the half-open cells and piece n is
    the boundary value at coordinate 1.
    """

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("values must be a square 2-d array")
        if arr.shape[0] < 2:
            raise ValueError("values must be at least 2x2 (resolution >= 1)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr
        self.n = arr.shape[0] - 1

    @classmethod
    def from_cells(cls, cells):
        """Build from an n x n cell array, replicating the last row/column.

        The result evaluates to ``cells[min(floor(n*t1), n-1), ...]``
        everywhere, i.e. t = 1 reads the last cell.
        """
        arr = np.asarray(cells, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("cells must be a square 2-d array")
        if arr.shape[0] < 1:
            raise ValueError("cells must be non-empty")
        return cls(np.pad(arr, ((0, 1), (0, 1)), mode="edge"))

    @property
    def cells(self):
        """The n x n array of half-open cell values."""
        return self.values[: self.n, : self.n]

    def piece_index(self, t):
        """Map coordinates in [0,1] to piece indices in 0..n."""
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
        return np.minimum(np.floor(t * self.n).astype(np.int64), self.n)

    def eval(self, t1, t2):
        """Evaluate the step function; ``t1`` and ``t2`` broadcast."""
        i1 = self.piece_index(t1)
        i2 = self.piece_index(t2)
        out = self.values[i1, i2]
        if np.ndim(out) == 0:
            return float(out)
        return out

    def __call__(self, t1, t2):
        return self.eval(t1, t2)


def continuity_modulus(x: GridFunction, delta: float) -> float:
    """Modulus of continuity w(x, delta).

    Supremum of |x(s) - x(t)| over pairs of grid pieces whose
    representative points (i/n, j/n) are within sup-distance strictly
    less than delta.  Exact for the stored step function.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    n = x.n
    window = int(math.floor(delta * n))
    if window >= delta * n:
        window -= 1
    return kernels.pair_range_max(np.asarray(x.values), window)


def _min_segment_len(delta: float, n: int) -> int:
    """Smallest piece count g with g/n > delta."""
    length = int(math.floor(delta * n)) + 1
    return length


def _compositions(n: int, min_part: int):
    """Yield all cut arrays 0 = c_0 < ... < c_r = n with parts >= min_part."""

    def rec(prefix, remaining):
        if remaining == 0:
            yield np.array(prefix, dtype=np.int64)
            return
        start = prefix[-1]
        for part in range(min_part, remaining + 1):
            if remaining - part != 0 and remaining - part < min_part:
                continue
            yield from rec(prefix + [start + part], remaining - part)

    yield from rec([0], n)


def _balanced_cuts(n: int, min_part: int) -> np.ndarray:
    parts = max(1, n // min_part)
    cuts = np.round(np.linspace(0.0, n, parts + 1)).astype(np.int64)
    cuts = np.unique(cuts)
    while len(cuts) > 2 and np.min(np.diff(cuts)) < min_part:
        gaps = np.diff(cuts)
        k = int(np.argmin(gaps))
        drop = k + 1 if k + 1 < len(cuts) - 1 else k
        cuts = np.delete(cuts, drop)
    return cuts


def _random_cuts(n: int, min_part: int, rng: np.random.Generator) -> np.ndarray:
    cuts = [0]
    remaining = n
    while remaining > 0:
        if remaining < 2 * min_part:
            part = remaining
        else:
            part = int(rng.integers(min_part, remaining - min_part + 1))
        cuts.append(cuts[-1] + part)
        remaining -= part
    return np.array(cuts, dtype=np.int64)


@dataclass
class PartitionSearch:
    """Result of a partition-modulus search.

    ``exact`` is True when the value came from exhaustive enumeration
    and is the true infimum at the stored resolution; otherwise the
    value is a certified upper bound from coordinate descent.
    """

    value: float
    cuts1: np.ndarray
    cuts2: np.ndarray
    exact: bool
    side_rule: str


def _axis_best(V: np.ndarray, cuts_fixed: np.ndarray, L_other: int):
    """Best cuts for the other axis given fixed cuts on axis 1 of V."""
    segmax, segmin = kernels.segment_minmax(V, np.asarray(cuts_fixed, dtype=np.int64))
    return kernels.cross_axis_dp(segmax, segmin, L_other)


def _wprime_exhaustive(V: np.ndarray, L1: int, L2: int):
    best = math.inf
    best_cuts = None
    for cuts1 in _compositions(V.shape[0] - 1, L1):
        value, cuts2 = _axis_best(V, cuts1, L2)
        if value < best:
            best = value
            best_cuts = (cuts1, cuts2)
    return best, best_cuts


def _wprime_descent(V: np.ndarray, L1: int, L2: int, restarts: int, seed: int):
    n = V.shape[0] - 1
    VT = np.ascontiguousarray(V.T)
    best = math.inf
    best_cuts = None
    for restart in range(max(1, restarts)):
        if restart == 0:
            cuts1 = _balanced_cuts(n, L1)
        else:
            rng = np.random.default_rng(hash_u64(seed, restart))
            cuts1 = _random_cuts(n, L1, rng)
        current = math.inf
        cuts2 = None
        for _ in range(64):
            value, cuts2 = _axis_best(V, cuts1, L2)
            value, cuts1 = _axis_best(VT, cuts2, L1)
            if value >= current - 1e-15:
                current = min(current, value)
                break
            current = value
        if current < best:
            best = current
            best_cuts = (cuts1, cuts2)
    return best, best_cuts


def _wprime_one_rule(V, L1, L2, method, restarts, seed):
    n = V.shape[0] - 1
    use_exhaustive = method == "exhaustive" or (method == "auto" and n <= 16)
    if use_exhaustive:
        value, cuts = _wprime_exhaustive(V, L1, L2)
        return value, cuts, True
    value, cuts = _wprime_descent(V, L1, L2, restarts, seed)
    return value, cuts, False


def partition_modulus_search(
    x: GridFunction,
    delta: float,
    method: str = "auto",
    restarts: int = 8,
    seed: int = 0,
    side_rule: str = "min",
) -> PartitionSearch:
    """Search for the partition modulus w'(x, delta).

    Minimizes, over grid-aligned product partitions whose sides exceed
    delta, the maximum within-block oscillation of x.  ``side_rule``
    selects the admissibility reading: "min" requires every side on
    both axes to exceed delta; "either-axis" requires all sides to
    exceed delta on at least one axis.  Exhaustive enumeration is used
    for resolution n <= 16 (or when ``method="exhaustive"``), and
    seeded coordinate descent with restarts otherwise; descent results
    are flagged as upper bounds via ``exact=False``.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if method not in ("auto", "exhaustive", "descent"):
        raise ValueError("method must be auto, exhaustive, or descent")
    if side_rule not in ("min", "either-axis"):
        raise ValueError("side_rule must be min or either-axis")
    n = x.n
    L = _min_segment_len(delta, n)
    if L > n:
        raise ValueError(
            "no admissible partition: the side constraint exceeds the domain"
        )
    V = np.asarray(x.values)
    if side_rule == "min":
        variants = [(L, L)]
    else:
        variants = [(L, 1), (1, L)]
    best = math.inf
    best_cuts = None
    exact_all = True
    for L1, L2 in variants:
        value, cuts, exact = _wprime_one_rule(V, L1, L2, method, restarts, seed)
        exact_all = exact_all and exact
        if value < best:
            best = value
            best_cuts = cuts
    return PartitionSearch(
        value=float(best),
        cuts1=np.asarray(best_cuts[0], dtype=np.int64),
        cuts2=np.asarray(best_cuts[1], dtype=np.int64),
        exact=exact_all,
        side_rule=side_rule,
    )


def partition_modulus(
    x: GridFunction,
    delta: float,
    method: str = "auto",
    restarts: int = 8,
    seed: int = 0,
    side_rule: str = "min",
) -> float:
    """Partition modulus w'(x, delta); see ``partition_modulus_search``."""
    return partition_modulus_search(
        x, delta, method=method, restarts=restarts, seed=seed, side_rule=side_rule
    ).value


class TimeChange:
    """A product time change (t1, t2) -> (lambda1(t1), lambda2(t2)).

    Each axis map is strictly increasing, piecewise linear, and fixes 0
    and 1.  Axis maps are stored as (k, 2) knot arrays whose columns
    are input and output coordinates.
    """

    def __init__(self, knots1, knots2):
        self.knots1 = self._check_axis(knots1)
        self.knots2 = self._check_axis(knots2)

    @staticmethod
    def _check_axis(knots) -> np.ndarray:
        arr = np.asarray(knots, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
            raise ValueError("axis knots must be a (k, 2) array with k >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("axis knots must be finite")
        if arr[0, 0] != 0.0 or arr[0, 1] != 0.0 or arr[-1, 0] != 1.0 or arr[-1, 1] != 1.0:
            raise ValueError("axis maps must fix 0 and 1")
        if np.any(np.diff(arr[:, 0]) <= 0.0) or np.any(np.diff(arr[:, 1]) <= 0.0):
            raise ValueError("axis knots must be strictly increasing")
        arr = arr.copy()
        arr.setflags(write=False)
        return arr

    @classmethod
    def identity(cls) -> "TimeChange":
        knots = [[0.0, 0.0], [1.0, 1.0]]
        return cls(knots, knots)

    def _axis_knots(self, axis: int) -> np.ndarray:
        if axis == 1:
            return self.knots1
        if axis == 2:
            return self.knots2
        raise ValueError("axis must be 1 or 2")

    def apply_axis(self, axis: int, t):
        knots = self._axis_knots(axis)
        return np.interp(t, knots[:, 0], knots[:, 1])

    def apply(self, t1, t2):
        return self.apply_axis(1, t1), self.apply_axis(2, t2)

    def inverse(self) -> "TimeChange":
        return TimeChange(self.knots1[:, ::-1], self.knots2[:, ::-1])

    def axis_slopes(self, axis: int) -> np.ndarray:
        knots = self._axis_knots(axis)
        dx = np.diff(knots[:, 0])
        dy = np.diff(knots[:, 1])
        return dy / dx

    def max_deviation(self) -> float:
        """sup_t max_i |lambda_i(t) - t|, attained at the knots."""
        out = 0.0
        for knots in (self.knots1, self.knots2):
            out = max(out, float(np.max(np.abs(knots[:, 1] - knots[:, 0]))))
        return out


def timechange_norm(tc: TimeChange) -> float:
    """max over axes of sup over s < t of |log((lam t - lam s)/(t - s))|.

    For piecewise-linear maps the sup over pairs is attained on a single
    segment, so this is the max absolute log slope.
    """
    out = 0.0
    for axis in (1, 2):
        slopes = tc.axis_slopes(axis)
        if np.any(slopes <= 0.0):
            raise ValueError("time change slopes must be positive")
        out = max(out, float(np.max(np.abs(np.log(slopes)))))
    return out


def _axis_grid_maps(k: int):
    """All strictly increasing maps between subsets of the interior k-grid."""
    interior = [i / k for i in range(1, k)]
    maps = []
    for r in range(0, k):
        for src in itertools.combinations(interior, r):
            for dst in itertools.combinations(interior, r):
                knots = [[0.0, 0.0]]
                knots.extend([s, d] for s, d in zip(src, dst))
                knots.append([1.0, 1.0])
                maps.append(np.array(knots, dtype=np.float64))
    return maps


def grid_timechanges(k: int) -> list:
    """Exhaustive product time changes from knot relabelings on the k-grid.

    Each axis map sends some r-subset of the interior grid points
    {1/k, ..., (k-1)/k} to another r-subset, piecewise linearly.  The
    result is closed under inverses and includes the identity.  The
    count grows fast in k, so k <= 6 is enforced.
    """
    if not (1 <= k <= 6):
        raise ValueError("k must lie in 1..6")
    axis_maps = _axis_grid_maps(k)
    return [TimeChange(a, b) for a in axis_maps for b in axis_maps]


def _random_axis_map(rng: np.random.Generator, max_interior: int, half_log: float):
    r = int(rng.integers(0, max_interior + 1))
    while True:
        xs = np.sort(rng.random(r))
        xs = np.concatenate(([0.0], xs, [1.0]))
        if np.min(np.diff(xs)) > 1e-6:
            break
    logs = rng.uniform(-half_log, half_log, size=len(xs) - 1)
    rises = np.exp(logs) * np.diff(xs)
    ys = np.concatenate(([0.0], np.cumsum(rises)))
    ys /= ys[-1]
    return np.column_stack((xs, ys))


def random_timechanges(
    count: int,
    seed: int,
    max_interior: int = 3,
    max_log_slope: float = 4.0,
) -> list:
    """Seeded random monotone perturbation candidates.

    Axis maps have up to ``max_interior`` interior knots and every
    segment slope s satisfies |log s| <= ``max_log_slope`` (slopes are
    drawn within half the budget and renormalized, which at most
    doubles the log deviation).
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if max_log_slope <= 0.0:
        raise ValueError("max_log_slope must be positive")
    half = max_log_slope / 2.0
    out = []
    for idx in range(count):
        rng = np.random.default_rng(hash_u64(seed, idx))
        k1 = _random_axis_map(rng, max_interior, half)
        k2 = _random_axis_map(rng, max_interior, half)
        out.append(TimeChange(k1, k2))
    return out


def _axis_eval_points(x: GridFunction, y: GridFunction, tc: TimeChange, axis: int):
    """Refined evaluation grid for one axis: breakpoints and midpoints."""
    nx, ny = x.n, y.n
    inv = tc.inverse()
    breaks = [np.arange(nx + 1, dtype=np.float64) / nx]
    breaks.append(np.asarray(inv.apply_axis(axis, np.arange(ny + 1, dtype=np.float64) / ny)))
    breaks.append(tc._axis_knots(axis)[:, 0])
    pts = np.unique(np.clip(np.concatenate(breaks), 0.0, 1.0))
    mids = 0.5 * (pts[:-1] + pts[1:])
    return np.unique(np.concatenate((pts, mids)))


def _sup_diff(x: GridFunction, y: GridFunction, tc: TimeChange) -> float:
    """sup_t |x(t) - y(lambda(t))|, exact on the refined grid."""
    p1 = _axis_eval_points(x, y, tc, 1)
    p2 = _axis_eval_points(x, y, tc, 2)
    xv = x.eval(p1[:, None], p2[None, :])
    yv = y.eval(
        np.clip(tc.apply_axis(1, p1), 0.0, 1.0)[:, None],
        np.clip(tc.apply_axis(2, p2), 0.0, 1.0)[None, :],
    )
    return float(np.max(np.abs(xv - yv)))


def skorohod_objective(x: GridFunction, y: GridFunction, tc: TimeChange) -> float:
    """max(sup_t ||lambda(t) - t||_inf, sup_t |x(t) - y(lambda(t))|)."""
    return max(tc.max_deviation(), _sup_diff(x, y, tc))


def billingsley_objective(x: GridFunction, y: GridFunction, tc: TimeChange) -> float:
    """max(timechange_norm(lambda), sup_t |x(t) - y(lambda(t))|)."""
    return max(timechange_norm(tc), _sup_diff(x, y, tc))


@dataclass
class MetricSearch:
    value: float
    timechange: TimeChange


def _metric_search(x, y, candidates, objective) -> MetricSearch:
    cands = [TimeChange.identity()]
    if candidates is not None:
        cands.extend(candidates)
    best = math.inf
    best_tc = cands[0]
    for tc in cands:
        val = objective(x, y, tc)
        if val < best:
            best = val
            best_tc = tc
    return MetricSearch(value=float(best), timechange=best_tc)


def skorohod_distance_search(x, y, candidates=None) -> MetricSearch:
    """Min Skorohod objective over candidates (identity always included)."""
    return _metric_search(x, y, candidates, skorohod_objective)


def billingsley_distance_search(x, y, candidates=None) -> MetricSearch:
    """Min Billingsley objective over candidates (identity always included)."""
    return _metric_search(x, y, candidates, billingsley_objective)


def skorohod_distance_upper(x, y, candidates=None) -> float:
    """Certified upper bound for the Skorohod metric d(x, y).

    Per-candidate objectives are exact for step functions, so the min
    over any finite candidate set bounds the true infimum from above.
    """
    return skorohod_distance_search(x, y, candidates).value


def billingsley_distance_upper(x, y, candidates=None) -> float:
    """Certified upper bound for the Billingsley metric d0(x, y)."""
    return billingsley_distance_search(x, y, candidates).value
