"""Double partial sums and the normalized partial-sum process.

Builds prefix-sum fields S_{i,j} = sum_{i' <= i, j' <= j} x_{i',j'},
windowed running maxima, rectangle increments, and the random element
X_n(t1, t2) = S_{floor(n t1), floor(n t2)} / (sigma n) in D([0,1]^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dspace import GridFunction

__all__ = [
    "PartialSumField",
    "Rect",
    "partial_sums",
    "partial_sum_process",
    "increment",
    "running_max",
]

_COMPENSATED_MIN_SIDE = 1024


class PartialSumField:
    """Double partial sums of an n1 x n2 field.

    ``padded`` is the (n1+1) x (n2+1) array with a zero row and column
    at index 0, so ``padded[i, j] = S_{i,j}`` for 0 <= i <= n1 and the
    difference identity S_{i,j} - S_{i-1,j} - S_{i,j-1} + S_{i-1,j-1}
    = x_{i,j} holds verbatim.  ``values`` is the n1 x n2 view starting
    at S_{1,1}.  ``offsets`` records a window origin (k1, k2) when the
    field represents sums of a windowed sub-field.
    """

    def __init__(self, padded, offsets=(0, 0)):
        arr = np.asarray(padded, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("padded must be a 2-d array")
        if np.any(arr[0, :] != 0.0) or np.any(arr[:, 0] != 0.0):
            raise ValueError("padded must have zero first row and column")
        self.padded = arr
        self.offsets = (int(offsets[0]), int(offsets[1]))
        self.n1 = arr.shape[0] - 1
        self.n2 = arr.shape[1] - 1

    @property
    def values(self):
        """The n1 x n2 array of sums S_{i,j} for i, j >= 1."""
        return self.padded[1:, 1:]

    def increments(self):
        """Recover x_{i,j} from the difference identity."""
        S = self.padded
        return S[1:, 1:] - S[:-1, 1:] - S[1:, :-1] + S[:-1, :-1]


def _field_values(field) -> np.ndarray:
    values = getattr(field, "values", field)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("field values must be a 2-d array")
    return arr


def partial_sums(field) -> PartialSumField:
    """Prefix sums of a field (FieldSample or plain 2-d array).

    Row-major accumulation; compensated (Kahan) summation is used once
    either side reaches 1024 to keep the 512^2-and-up duality checks
    within tight tolerance.
    """
    x = _field_values(field)
    compensated = max(x.shape) >= _COMPENSATED_MIN_SIDE
    return PartialSumField(kernels.prefix_sum_2d(x, compensated))


def partial_sum_process(field, sigma: float, n: int) -> GridFunction:
    """The random element X_n(t1, t2) = S_{floor(n t1), floor(n t2)}/(sigma n).

    The returned GridFunction's piece (i, j) carries S_{i,j}/(sigma n),
    so evaluation at t = 1 reads the full sum S_{n, .} (right-endpoint
    convention of the step-function class).
    """
    if not (sigma > 0.0):
        raise ValueError("sigma must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    x = _field_values(field)
    if x.shape[0] < n or x.shape[1] < n:
        raise ValueError("field must be at least n x n")
    S = kernels.prefix_sum_2d(x[:n, :n], max(n, n) >= _COMPENSATED_MIN_SIDE)
    return GridFunction(S / (sigma * n))


@dataclass(frozen=True)
class Rect:
    """The half-open rectangle (s1, t1] x (s2, t2] in [0,1]^2."""

    s1: float
    t1: float
    s2: float
    t2: float

    def __post_init__(self):
        for v in (self.s1, self.t1, self.s2, self.t2):
            if not (0.0 <= v <= 1.0):
                raise ValueError("rectangle endpoints must lie in [0, 1]")
        if not (self.s1 < self.t1 and self.s2 < self.t2):
            raise ValueError("rectangle sides must have strict ordering")


def increment(X: GridFunction, r: Rect) -> float:
    """Rectangle increment X(Delta_r) through step-function evaluation.

    Non-grid-aligned endpoints snap by the floor convention, so a
    rectangle whose corners land in one cell has increment 0.
    """
    return float(
        X.eval(r.t1, r.t2) - X.eval(r.s1, r.t2) - X.eval(r.t1, r.s2) + X.eval(r.s1, r.s2)
    )


def running_max(S: PartialSumField, k1: int, k2: int, n: int) -> float:
    """max over 1 <= i, j <= n of |S_{k1+i, k2+j} - S_{k1, k2}|."""
    if n < 1:
        raise ValueError("window size n must be >= 1")
    if k1 < 0 or k2 < 0 or k1 + n > S.n1 or k2 + n > S.n2:
        raise ValueError("window exceeds the stored field")
    return kernels.window_max_abs(S.padded, k1, k2, n)
