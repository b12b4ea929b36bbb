"""Benchmark the compiled kernel core against the numpy fallback.

Runs each hot kernel on both backends at representative sizes, checks
bitwise agreement on the spot, and reports median timings plus an
end-to-end pipeline comparison (field generation through prefix sums).

Usage: python3 benchmarks/bench_kernels.py [--repeats 9] [--size 512]
"""

import argparse
import timeit

import numpy as np

from sheetlimit.kernels import available_backends, hash_u64
from sheetlimit.fieldgen import (
    FieldSpec,
    InnovationSpec,
    MAKernel,
    VarianceProfile,
    generate_field,
)
from sheetlimit.sumproc import partial_sums


def median_time(fn, repeats):
    times = timeit.repeat(fn, number=1, repeat=repeats)
    return sorted(times)[len(times) // 2]


def check_equal(a, b, label):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or not np.array_equal(a, b):
        raise AssertionError("backend outputs differ for %s" % label)


def bench_cases(size, seed):
    n = size
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n))
    eps = rng.normal(size=(n + 2, n + 2))
    coeffs = rng.normal(size=(3, 3))
    S = np.zeros((n + 1, n + 1))
    S[1:, 1:] = x.cumsum(axis=1).cumsum(axis=0)
    V = rng.normal(size=(n // 4 + 1, n // 4 + 1))
    cuts = np.arange(0, n // 4 + 1, 2, dtype=np.int64)
    if cuts[-1] != n // 4:
        cuts = np.append(cuts, n // 4)
    return [
        ("uniform_lattice", lambda k: k.uniform_lattice(seed, 0, -2, -2, n, n)),
        ("prefix_sum_2d", lambda k: k.prefix_sum_2d(x, False)),
        ("prefix_sum_2d[kahan]", lambda k: k.prefix_sum_2d(x, True)),
        ("ma_shift_accumulate", lambda k: k.ma_shift_accumulate(eps, coeffs)),
        ("window_max_abs", lambda k: k.window_max_abs(S, 0, 0, n)),
        ("pair_range_max", lambda k: k.pair_range_max(V, 3)),
        ("segment_minmax", lambda k: k.segment_minmax(V, cuts)),
        (
            "cross_axis_dp",
            lambda k: k.cross_axis_dp(*k.segment_minmax(V, cuts), 2),
        ),
    ]


def bench_pipeline(size, seed):
    spec = FieldSpec(
        innovations=InnovationSpec("gaussian", VarianceProfile.constant(1.0)),
        kernel=MAKernel([[1.0, 0.5], [0.5, 0.25]]),
    )

    def run():
        field = generate_field(spec, size, size, seed)
        return partial_sums(field).padded[-1, -1]

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=9)
    parser.add_argument("--size", type=int, default=512)
    args = parser.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not importable; benchmarking the fallback only")
    seed = hash_u64(2026, 8)
    names = sorted(backends)
    print("kernel benchmarks, size=%d, median of %d" % (args.size, args.repeats))
    header = "%-24s" % "kernel" + "".join("%14s" % b for b in names)
    if len(names) == 2:
        header += "%10s" % "speedup"
    print(header)
    for label, call in bench_cases(args.size, seed):
        outs = {b: call(backends[b]) for b in names}
        if len(names) == 2:
            a, b = (outs[n] for n in names)
            if isinstance(a, tuple):
                for pa, pb in zip(a, b):
                    check_equal(pa, pb, label)
            else:
                check_equal(a, b, label)
        row = "%-24s" % label
        times = {}
        for b in names:
            times[b] = median_time(lambda b=b: call(backends[b]), args.repeats)
            row += "%12.3fms" % (times[b] * 1e3)
        if len(names) == 2:
            row += "%9.1fx" % (times["python"] / times["cython"])
        print(row)

    print()
    print("pipeline: generate_field + partial_sums at n=%d" % args.size)
    run = bench_pipeline(args.size, seed)
    t = median_time(run, args.repeats)
    print("active backend: %12.3fms" % (t * 1e3))
    print("(set SHEETLIMIT_PURE_PYTHON=1 and rerun to time the fallback pipeline)")


if __name__ == "__main__":
    main()
