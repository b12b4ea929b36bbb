"""Backend selection for the hot kernels.

The compiled core (sheetlimit._ckernels) is preferred when importable; the
numpy fallback (sheetlimit._pykernels) is always available.  Setting the
environment variable SHEETLIMIT_PURE_PYTHON=1 before import forces the
fallback.  Both backends are bit-compatible; whole-pipeline outputs do not
depend on which one is active.
"""

from __future__ import annotations

import os

from . import _pykernels

_MASK = 0xFFFFFFFFFFFFFFFF
_SALT_STREAM = 0x9E3779B97F4A7C15
_SALT_ROW = 0xBF58476D1CE4E5B9


def _select():
    if os.environ.get("SHEETLIMIT_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels, "python"
    try:
        from . import _ckernels

        return _ckernels, "cython"
    except ImportError:
        return _pykernels, "python"


_impl, _backend = _select()

uniform_lattice = _impl.uniform_lattice
prefix_sum_2d = _impl.prefix_sum_2d
ma_shift_accumulate = _impl.ma_shift_accumulate
window_max_abs = _impl.window_max_abs
pair_range_max = _impl.pair_range_max
segment_minmax = _impl.segment_minmax
cross_axis_dp = _impl.cross_axis_dp


def backend_name():
    """Name of the active kernel backend: 'cython' or 'python'."""
    return _backend


def available_backends():
    """Importable backends keyed by name (for parity tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def _fmix64_int(z):
    z &= _MASK
    z = ((z ^ (z >> 33)) * 0xFF51AFD7ED558CCD) & _MASK
    z = ((z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53) & _MASK
    return z ^ (z >> 33)


def hash_u64(*parts):
    """Avalanche hash of integer parts to one u64; used for seed derivation.

    hash_u64(base_seed, r) is the per-replication seed rule quoted in the
    diagnostics reports.
    """
    z = _fmix64_int(_SALT_STREAM)
    for p in parts:
        z = _fmix64_int(z + (_SALT_ROW * (int(p) & _MASK)) & _MASK)
    return z
