"""Exact reference simulator for the Brownian sheet on [0,1]^2.

Grid samples are built by cumulating iid Gaussian cell increments, so
the values at grid points are exact in law.  Finite-dimensional
distributions at arbitrary points are drawn from the analytic
covariance min(s1,t1)*min(s2,t2) via a symmetric eigenfactorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dspace import GridFunction
from .fieldgen import _gaussian_from_uniforms

__all__ = ["FddSpec", "sheet_cov", "sample_sheet", "sample_fdd"]

# Counter-RNG stream ids reserved by this module (innovations use 0/1).
_STREAM_SHEET = (4, 5)
_STREAM_FDD = (6, 7)

_EIG_CLIP = -1e-10


def sheet_cov(s, t) -> float:
    """Brownian sheet covariance min(s1, t1) * min(s2, t2)."""
    s1, s2 = float(s[0]), float(s[1])
    t1, t2 = float(t[0]), float(t[1])
    for v in (s1, s2, t1, t2):
        if not (0.0 <= v <= 1.0):
            raise ValueError("points must lie in [0, 1]^2")
    return min(s1, t1) * min(s2, t2)


def sample_sheet(n: int, seed: int) -> GridFunction:
    """One Brownian sheet path on the n-grid as a GridFunction.

    Piece (i, j) carries W(i/n, j/n); cell increments are iid Gaussian
    with variance 1/n^2, so W(i/n, j/n) has variance (i/n)(j/n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z = _gaussian_from_uniforms(seed, _STREAM_SHEET, 1, 1, n, n)
    V = np.zeros((n + 1, n + 1), dtype=np.float64)
    V[1:, 1:] = np.cumsum(np.cumsum(z / n, axis=0), axis=1)
    return GridFunction(V)


@dataclass(frozen=True)
class FddSpec:
    """Evaluation points for finite-dimensional distributions."""

    points: tuple = field(default=())

    def __init__(self, points):
        pts = tuple((float(p[0]), float(p[1])) for p in points)
        if len(pts) < 1:
            raise ValueError("at least one point is required")
        for p in pts:
            if not (0.0 <= p[0] <= 1.0 and 0.0 <= p[1] <= 1.0):
                raise ValueError("points must lie in [0, 1]^2")
        if len(set(pts)) != len(pts):
            raise ValueError("points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return len(self.points)

    def covariance(self) -> np.ndarray:
        pts = self.points
        k = len(pts)
        cov = np.empty((k, k), dtype=np.float64)
        for a in range(k):
            for b in range(k):
                cov[a, b] = sheet_cov(pts[a], pts[b])
        return cov


def _factor_psd(cov: np.ndarray) -> np.ndarray:
    """Symmetric factor L with L @ L.T = cov, clipping tiny negatives."""
    eigvals, eigvecs = np.linalg.eigh(cov)
    if np.min(eigvals) < _EIG_CLIP:
        raise ValueError(
            "covariance factorization failed: eigenvalue %g below clip tolerance"
            % float(np.min(eigvals))
        )
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_fdd(spec: FddSpec, N: int, seed: int) -> np.ndarray:
    """N exact mean-zero Gaussian draws with the sheet covariance.

    Returns an N x k matrix whose rows are (W(t_1), ..., W(t_k)).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    L = _factor_psd(spec.covariance())
    z = _gaussian_from_uniforms(seed, _STREAM_FDD, 1, 1, N, spec.k)
    return z @ L.T
