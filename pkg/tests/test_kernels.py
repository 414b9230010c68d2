import os
import subprocess
import sys

import numpy as np
import pytest

from slotpunct import kernels
from slotpunct.segment import Lexicon

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba unavailable or disabled")


def test_env_flag_selects_fallback():
    code = "from slotpunct import _jit, kernels; print(_jit.use_numba(), kernels.max_prob_route_numba is None)"
    env = {**os.environ, "SLOTPUNCT_DISABLE_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


def test_fallback_pipeline_gives_identical_output():
    code = (
        "from slotpunct.segment import Lexicon, segment_cjk;"
        "print(segment_cjk('我们今天去北京看天安门广场', Lexicon.default()))"
    )
    outs = []
    for flag in ("0", "1"):
        env = {**os.environ, "SLOTPUNCT_DISABLE_NUMBA": flag}
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_confusion_parity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, 500))
    p, r = rng.integers(0, 4, n), rng.integers(0, 4, n)
    np.testing.assert_array_equal(kernels.confusion_counts_numpy(p, r), kernels.confusion_counts_numba(p, r))


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_window_parity(seed):
    rng = np.random.default_rng(seed)
    slots = np.sort(rng.choice(1000, size=200, replace=False))
    starts = np.arange(0, 1000, 37)
    ends = np.minimum(starts + int(rng.integers(40, 120)), 1000)
    np.testing.assert_array_equal(
        kernels.assign_windows_numpy(slots, starts, ends), kernels.assign_windows_numba(slots, starts, ends)
    )


def test_window_ties_go_to_earlier_window():
    # slot 5 is 2 tokens from the edge of both [0, 8) and [3, 11)
    out = kernels.assign_windows_numpy(np.array([5]), np.array([0, 3]), np.array([8, 11]))
    assert out.tolist() == [0]


def test_uncovered_slots_marked():
    out = kernels.assign_windows_numpy(np.array([1, 50]), np.array([0]), np.array([10]))
    assert out.tolist() == [0, -1]


@needs_numba
def test_route_parity_with_oov():
    lex = Lexicon({"ab": 5, "a": 2, "b": 2, "c": 1})
    codes = lex.encode("abxcab")
    assert codes[2] == -1
    a = kernels.max_prob_route_numpy(codes, *lex.trie_arrays(), kernels.TIE_TOL)
    b = kernels.max_prob_route_numba(codes, *lex.trie_arrays(), kernels.TIE_TOL)
    np.testing.assert_array_equal(a[0], b[0])
