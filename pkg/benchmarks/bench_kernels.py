"""Compare the numba kernels with their numpy / pure-python fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is run on the same inputs in both builds; outputs are checked
for equality before timing. The first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np

from slotpunct import kernels
from slotpunct._jit import HAS_NUMBA
from slotpunct.segment import Lexicon


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def segmentation_case(rng):
    lex = Lexicon.default()
    words = [w for w in lex.entries if len(w) > 1]
    text = "".join(rng.choice(words, size=20_000))
    codes = lex.encode(text)
    arrays = lex.trie_arrays()
    return f"route {len(text):,} chars", (
        lambda: kernels.max_prob_route_numpy(codes, *arrays, kernels.TIE_TOL),
        lambda: kernels.max_prob_route_numba(codes, *arrays, kernels.TIE_TOL),
    )


def confusion_case(rng):
    n = 2_000_000
    pred = rng.integers(0, 4, n)
    ref = rng.integers(0, 4, n)
    return f"confusion {n:,} slots", (
        lambda: kernels.confusion_counts_numpy(pred, ref),
        lambda: kernels.confusion_counts_numba(pred, ref),
    )


def windows_case(rng):
    n, width, step = 500_000, 254, 190
    slots = np.arange(n) * 2 + 1
    starts = np.arange(0, 2 * n, step)
    ends = np.minimum(starts + width, 2 * n)
    return f"windows {n:,} slots x {len(starts):,} windows", (
        lambda: kernels.assign_windows_numpy(slots, starts, ends),
        lambda: kernels.assign_windows_numba(slots, starts, ends),
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not HAS_NUMBA:
        raise SystemExit("numba is unavailable or disabled; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<40} {'fallback s':>11} {'numba s':>9} {'speedup':>8}")
    for make in (segmentation_case, confusion_case, windows_case):
        name, (slow, fast) = make(rng)
        a, b = slow(), fast()
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_array_equal(x, y)
        t_slow, t_fast = best_of(slow, args.repeat), best_of(fast, args.repeat)
        print(f"{name:<40} {t_slow:>11.4f} {t_fast:>9.4f} {t_slow / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
