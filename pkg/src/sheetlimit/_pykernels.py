"""Pure numpy implementations of the hot kernels.

This module is the import-time fallback when the compiled core
(sheetlimit._ckernels) is unavailable; the two backends implement the same
contracts and are tested for bitwise agreement.  Keep the arithmetic order
here in sync with the Cython twin: the parity tests compare exact bits.
"""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_SALT_STREAM = np.uint64(0x9E3779B97F4A7C15)
_SALT_ROW = np.uint64(0xBF58476D1CE4E5B9)
_SALT_COL = np.uint64(0x94D049BB133111EB)
_FMIX_A = np.uint64(0xFF51AFD7ED558CCD)
_FMIX_B = np.uint64(0xC4CEB9FE1A85EC53)
_SHIFT33 = np.uint64(33)
_U53 = 2.0 ** -53


def _fmix64(z):
    # murmur3 finalizer; uint64 arithmetic wraps mod 2**64
    z = (z ^ (z >> _SHIFT33)) * _FMIX_A
    z = (z ^ (z >> _SHIFT33)) * _FMIX_B
    return z ^ (z >> _SHIFT33)


def _fmix64_int(z):
    # python-int twin of _fmix64 for the scalar seed chain
    m = 0xFFFFFFFFFFFFFFFF
    z &= m
    z = ((z ^ (z >> 33)) * 0xFF51AFD7ED558CCD) & m
    z = ((z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53) & m
    return z ^ (z >> 33)


def uniform_lattice(seed, stream, i0, j0, ni, nj):
    """Counter-based uniforms in (0, 1], one per lattice site.

    The value at site (i, j) = (i0 + r, j0 + c) is a pure function of
    (seed, stream, i, j); negative site indices are hashed by their
    two's-complement bit pattern.
    """
    m = 0xFFFFFFFFFFFFFFFF
    z0 = np.uint64(_fmix64_int(((seed & m) + 0x9E3779B97F4A7C15 * ((stream + 1) & m)) & m))
    iu = np.arange(i0, i0 + ni, dtype=np.int64).view(np.uint64)
    ju = np.arange(j0, j0 + nj, dtype=np.int64).view(np.uint64)
    zi = _fmix64(z0 + _SALT_ROW * iu)
    zij = _fmix64(zi[:, None] + _SALT_COL * ju[None, :])
    return ((zij >> np.uint64(11)).astype(np.float64) + 1.0) * _U53


def prefix_sum_2d(x, compensated=False):
    """Double prefix sums with a zero row/column at index 0.

    Returns S with shape (a+1, b+1), S[i, j] = sum of x[:i, :j].  The
    compensated path runs Kahan accumulation along axis 1 then axis 0 in
    the same order as the plain path (row pass, then column pass).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    a, b = x.shape
    out = np.zeros((a + 1, b + 1))
    if not compensated:
        out[1:, 1:] = x.cumsum(axis=1).cumsum(axis=0)
        return out
    rows = np.empty_like(x)
    s = np.zeros(a)
    c = np.zeros(a)
    for j in range(b):
        y = x[:, j] - c
        t = s + y
        c = (t - s) - y
        s = t
        rows[:, j] = s
    s = np.zeros(b)
    c = np.zeros(b)
    for i in range(a):
        y = rows[i] - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i + 1, 1:] = s
    return out


def ma_shift_accumulate(eps, coeffs):
    """Causal moving-average filter over a padded innovation array.

    eps has shape (n1+m, n2+m); coeffs has shape (m+1, m+1).  Output
    out[u, v] = sum_k coeffs[k1, k2] * eps[u + m - k1, v + m - k2],
    accumulated in row-major coefficient order (fixed order: the compiled
    twin must add in the same sequence).
    """
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    m = coeffs.shape[0] - 1
    n1 = eps.shape[0] - m
    n2 = eps.shape[1] - m
    out = np.zeros((n1, n2))
    for k1 in range(m + 1):
        for k2 in range(m + 1):
            out += coeffs[k1, k2] * eps[m - k1 : m - k1 + n1, m - k2 : m - k2 + n2]
    return out


def window_max_abs(S, k1, k2, n):
    """max over 1 <= i, j <= n of |S[k1+i, k2+j] - S[k1, k2]|."""
    S = np.asarray(S, dtype=np.float64)
    return float(np.abs(S[k1 + 1 : k1 + n + 1, k2 + 1 : k2 + n + 1] - S[k1, k2]).max())


def pair_range_max(V, K):
    """max |V[a] - V[b]| over index pairs with Chebyshev distance <= K."""
    V = np.asarray(V, dtype=np.float64)
    if K <= 0:
        return 0.0
    from scipy.ndimage import maximum_filter

    w = 2 * K + 1
    # clipped-window max: 'nearest' padding only replicates in-window edge values
    return float((maximum_filter(V, size=w, mode="nearest") - V).max())


def segment_minmax(V, cuts):
    """Per-segment columnwise max/min of the piece-value matrix V.

    V has shape (P, P) with P = n + 1 (n regular pieces plus the boundary
    piece).  cuts is the full position list [0, c_1, ..., n]; segment s
    covers rows cuts[s]..cuts[s+1]-1, and the final segment also covers
    row n (the boundary piece belongs to the last cell).
    """
    V = np.ascontiguousarray(V, dtype=np.float64)
    cuts = np.asarray(cuts, dtype=np.int64)
    n = V.shape[0] - 1
    starts = cuts[:-1]
    segmax = np.maximum.reduceat(V[:n], starts, axis=0)
    segmin = np.minimum.reduceat(V[:n], starts, axis=0)
    segmax[-1] = np.maximum(segmax[-1], V[n])
    segmin[-1] = np.minimum(segmin[-1], V[n])
    return segmax, segmin


def cross_axis_dp(segmax, segmin, L):
    """Optimal cross-axis partition for a fixed segmentation of one axis.

    Given per-segment columnwise envelopes (shape (nseg, P), P = n + 1),
    finds cut positions 0 = c_0 < ... < c_r = n with every gap >= L
    minimizing the maximum cell oscillation, where the cell over column
    interval (c, d) has oscillation
        max_s [ max(segmax[s, c:d']) - min(segmin[s, c:d']) ]
    with d' = d for d < n and d' = n + 1 for d = n (boundary fold).
    Returns (value, cuts).
    """
    segmax = np.asarray(segmax, dtype=np.float64)
    segmin = np.asarray(segmin, dtype=np.float64)
    n = segmax.shape[1] - 1
    G = np.empty((n + 1, n + 1))
    G.fill(np.inf)
    for c in range(n):
        accmax = np.maximum.accumulate(segmax[:, c:], axis=1)
        accmin = np.minimum.accumulate(segmin[:, c:], axis=1)
        osc = (accmax - accmin).max(axis=0)
        # interval (c, d) covers columns c..d-1; at d = n also column n
        G[c, c + 1 : n] = osc[: n - 1 - c]
        G[c, n] = osc[n - c]
    f = np.full(n + 1, np.inf)
    f[0] = -np.inf
    back = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        best = np.inf
        arg = -1
        for c in range(0, d - L + 1):
            v = f[c]
            g = G[c, d]
            if g > v:
                v = g
            if v < best:
                best = v
                arg = c
        f[d] = best
        back[d] = arg
    if not np.isfinite(f[n]):
        return float(f[n]), np.asarray([0, n], dtype=np.int64)
    cuts = [n]
    d = n
    while d > 0:
        d = int(back[d])
        cuts.append(d)
    return float(f[n]), np.asarray(cuts[::-1], dtype=np.int64)
