# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of sheetlimit._pykernels.

Same contracts, same arithmetic order, same bits: the parity tests compare
the two backends exactly.  Any change here must be mirrored in the numpy
fallback and vice versa.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, INFINITY

ctypedef unsigned long long u64

cdef u64 _SALT_STREAM = 0x9E3779B97F4A7C15
cdef u64 _SALT_ROW = 0xBF58476D1CE4E5B9
cdef u64 _SALT_COL = 0x94D049BB133111EB
cdef u64 _FMIX_A = 0xFF51AFD7ED558CCD
cdef u64 _FMIX_B = 0xC4CEB9FE1A85EC53
cdef double _U53 = 2.0 ** -53


cdef inline u64 _fmix64(u64 z) nogil:
    z = (z ^ (z >> 33)) * _FMIX_A
    z = (z ^ (z >> 33)) * _FMIX_B
    return z ^ (z >> 33)


def uniform_lattice(seed, stream, i0, j0, ni, nj):
    """Counter-based uniforms in (0, 1], one per lattice site."""
    cdef u64 z0 = _fmix64(<u64> (seed & 0xFFFFFFFFFFFFFFFF)
                          + _SALT_STREAM * (<u64> ((stream + 1) & 0xFFFFFFFFFFFFFFFF)))
    cdef Py_ssize_t ni_ = ni, nj_ = nj, r, c
    cdef long long i0_ = i0, j0_ = j0
    cdef u64 zi, zij
    out = np.empty((ni_, nj_))
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(ni_):
            zi = _fmix64(z0 + _SALT_ROW * (<u64> (i0_ + r)))
            for c in range(nj_):
                zij = _fmix64(zi + _SALT_COL * (<u64> (j0_ + c)))
                o[r, c] = ((<double> (zij >> 11)) + 1.0) * _U53
    return out


def prefix_sum_2d(x, compensated=False):
    """Double prefix sums with a zero row/column at index 0."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] xv = x
    cdef Py_ssize_t a = xv.shape[0], b = xv.shape[1], i, j
    out = np.zeros((a + 1, b + 1))
    cdef double[:, ::1] ov = out
    rows_arr = np.empty((a, b))
    cdef double[:, ::1] rows = rows_arr
    cdef double s, comp, y, t
    cdef bint comp_flag = bool(compensated)
    with nogil:
        if not comp_flag:
            for i in range(a):
                s = 0.0
                for j in range(b):
                    s = s + xv[i, j]
                    rows[i, j] = s
            for j in range(b):
                s = 0.0
                for i in range(a):
                    s = s + rows[i, j]
                    ov[i + 1, j + 1] = s
        else:
            for i in range(a):
                s = 0.0
                comp = 0.0
                for j in range(b):
                    y = xv[i, j] - comp
                    t = s + y
                    comp = (t - s) - y
                    s = t
                    rows[i, j] = s
            for j in range(b):
                s = 0.0
                comp = 0.0
                for i in range(a):
                    y = rows[i, j] - comp
                    t = s + y
                    comp = (t - s) - y
                    s = t
                    ov[i + 1, j + 1] = s
    return out


def ma_shift_accumulate(eps, coeffs):
    """Causal moving-average filter over a padded innovation array."""
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[:, ::1] e = eps
    cdef const double[:, ::1] cf = coeffs
    cdef Py_ssize_t m = cf.shape[0] - 1
    cdef Py_ssize_t n1 = e.shape[0] - m, n2 = e.shape[1] - m
    cdef Py_ssize_t u, v, k1, k2
    cdef double acc
    out = np.empty((n1, n2))
    cdef double[:, ::1] o = out
    with nogil:
        for u in range(n1):
            for v in range(n2):
                acc = 0.0
                for k1 in range(m + 1):
                    for k2 in range(m + 1):
                        acc = acc + cf[k1, k2] * e[u + m - k1, v + m - k2]
                o[u, v] = acc
    return out


def window_max_abs(S, k1, k2, n):
    """max over 1 <= i, j <= n of |S[k1+i, k2+j] - S[k1, k2]|."""
    S = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] sv = S
    cdef Py_ssize_t a1 = k1, a2 = k2, nn = n, i, j
    cdef double base = sv[a1, a2]
    cdef double best = 0.0, d
    with nogil:
        for i in range(1, nn + 1):
            for j in range(1, nn + 1):
                d = fabs(sv[a1 + i, a2 + j] - base)
                if d > best:
                    best = d
    return best


cdef void _slide_max_rows(const double[:, ::1] V, double[:, ::1] out,
                          Py_ssize_t K, long long[::1] q) nogil:
    # out[i, j] = max of V[i, max(0, j-K) .. min(P-1, j+K)]
    cdef Py_ssize_t rows = V.shape[0], P = V.shape[1]
    cdef Py_ssize_t i, j, r, head, tail
    for i in range(rows):
        head = 0
        tail = 0
        r = K if K < P - 1 else P - 1
        for j in range(r + 1):
            while tail > head and V[i, q[tail - 1]] <= V[i, j]:
                tail -= 1
            q[tail] = j
            tail += 1
        out[i, 0] = V[i, q[head]]
        for j in range(1, P):
            r = j + K
            if r < P:
                while tail > head and V[i, q[tail - 1]] <= V[i, r]:
                    tail -= 1
                q[tail] = r
                tail += 1
            while q[head] < j - K:
                head += 1
            out[i, j] = V[i, q[head]]


def pair_range_max(V, K):
    """max |V[a] - V[b]| over index pairs with Chebyshev distance <= K."""
    V = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t KK = K
    if KK <= 0:
        return 0.0
    cdef const double[:, ::1] v = V
    cdef Py_ssize_t P0 = v.shape[0], P1 = v.shape[1], i, j
    tmp_arr = np.empty((P0, P1))
    flt_arr = np.empty((P1, P0))
    qbuf = np.empty(max(P0, P1) + 1, dtype=np.int64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] flt = flt_arr
    cdef long long[::1] q = qbuf
    cdef double best = -INFINITY, d
    with nogil:
        _slide_max_rows(v, tmp, KK, q)
    tmpT = np.ascontiguousarray(tmp_arr.T)
    cdef double[:, ::1] tv = tmpT
    with nogil:
        _slide_max_rows(tv, flt, KK, q)
        # flt[j, i] = window max around (i, j)
        for i in range(P0):
            for j in range(P1):
                d = flt[j, i] - v[i, j]
                if d > best:
                    best = d
    return float(best)


def segment_minmax(V, cuts):
    """Per-segment columnwise max/min of the piece-value matrix V."""
    V = np.ascontiguousarray(V, dtype=np.float64)
    cuts = np.ascontiguousarray(cuts, dtype=np.int64)
    cdef const double[:, ::1] v = V
    cdef const long long[::1] cu = cuts
    cdef Py_ssize_t n = v.shape[0] - 1, P = v.shape[1]
    cdef Py_ssize_t nseg = cu.shape[0] - 1
    segmax_arr = np.empty((nseg, P))
    segmin_arr = np.empty((nseg, P))
    cdef double[:, ::1] smax = segmax_arr
    cdef double[:, ::1] smin = segmin_arr
    cdef Py_ssize_t s, i, j, lo, hi
    cdef double hi_v, lo_v, val
    with nogil:
        for s in range(nseg):
            lo = cu[s]
            hi = cu[s + 1]
            if s == nseg - 1:
                hi = n + 1  # boundary piece folds into the last segment
            for j in range(P):
                hi_v = v[lo, j]
                lo_v = v[lo, j]
                for i in range(lo + 1, hi):
                    val = v[i, j]
                    if val > hi_v:
                        hi_v = val
                    if val < lo_v:
                        lo_v = val
                smax[s, j] = hi_v
                smin[s, j] = lo_v
    return segmax_arr, segmin_arr


def cross_axis_dp(segmax, segmin, L):
    """Optimal cross-axis partition for a fixed segmentation of one axis."""
    segmax = np.ascontiguousarray(segmax, dtype=np.float64)
    segmin = np.ascontiguousarray(segmin, dtype=np.float64)
    cdef const double[:, ::1] smax = segmax
    cdef const double[:, ::1] smin = segmin
    cdef Py_ssize_t nseg = smax.shape[0], n = smax.shape[1] - 1
    cdef Py_ssize_t c, d, s, t, LL = L
    G_arr = np.full((n + 1, n + 1), np.inf)
    cdef double[:, ::1] G = G_arr
    runmax_arr = np.empty(nseg)
    runmin_arr = np.empty(nseg)
    cdef double[::1] runmax = runmax_arr
    cdef double[::1] runmin = runmin_arr
    cdef double osc, cur, best, v, g
    f_arr = np.full(n + 1, np.inf)
    cdef double[::1] f = f_arr
    back_arr = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] back = back_arr
    cdef Py_ssize_t arg
    with nogil:
        for c in range(n):
            for s in range(nseg):
                runmax[s] = smax[s, c]
                runmin[s] = smin[s, c]
            for t in range(0, n - c + 1):
                if t > 0:
                    for s in range(nseg):
                        v = smax[s, c + t]
                        if v > runmax[s]:
                            runmax[s] = v
                        v = smin[s, c + t]
                        if v < runmin[s]:
                            runmin[s] = v
                osc = -INFINITY
                for s in range(nseg):
                    cur = runmax[s] - runmin[s]
                    if cur > osc:
                        osc = cur
                d = c + t + 1
                if d <= n - 1:
                    G[c, d] = osc
                if t == n - c:
                    G[c, n] = osc
        f[0] = -INFINITY
        for d in range(1, n + 1):
            best = INFINITY
            arg = -1
            for c in range(0, d - LL + 1):
                v = f[c]
                g = G[c, d]
                if g > v:
                    v = g
                if v < best:
                    best = v
                    arg = c
            f[d] = best
            back[d] = arg
    if not np.isfinite(f_arr[n]):
        return float(f_arr[n]), np.asarray([0, n], dtype=np.int64)
    cuts = [n]
    d = n
    while d > 0:
        d = back[d]
        cuts.append(d)
    return float(f_arr[n]), np.asarray(cuts[::-1], dtype=np.int64)
