import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FixedStub, OrderInsensitiveStub
from slotpunct import kernels
from slotpunct.dataset import OversizeTokenError
from slotpunct.inference import (
    MalformedInputError,
    WindowPolicy,
    plan_windows,
    predict_windowed,
    punctuate,
    punctuate_file,
    punctuate_lines,
)
from slotpunct.segment import Lexicon, segment
from slotpunct.slotmask import PunctClass, strip_glyphs

O, C, P, Q = PunctClass
WORDS = "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu".split()


def test_stub_examples():
    assert punctuate("hello how are you", "en", FixedStub([O, O, O, Q])) == "hello how are you?"
    assert punctuate("", "en", FixedStub([])) == ""


def test_existing_punctuation_is_stripped_with_warning(caplog):
    out = punctuate("hello, how are you", "en", FixedStub([O, O, O, Q]))
    assert out == "hello how are you?"
    assert "stripped 1" in caplog.text


def test_zh_word_mode_uses_lexicon():
    lex = Lexicon({"你好": 5, "吗": 3})
    assert punctuate("你好吗", "zh", FixedStub([O, Q]), lexicon=lex) == "你好吗？"


def test_window_policy_validation():
    stub = OrderInsensitiveStub(max_len=20)
    assert WindowPolicy(overlap_tokens=4).budget(stub) == 18
    with pytest.raises(ValueError):
        WindowPolicy(overlap_tokens=18).budget(stub)
    with pytest.raises(ValueError):
        WindowPolicy(window_tokens=2, overlap_tokens=0).budget(stub)


def test_oversize_word():
    stub = OrderInsensitiveStub(max_len=8)
    with pytest.raises(OversizeTokenError, match="x" * 30):
        punctuate("ok " + "x" * 30, "en", stub, WindowPolicy(overlap_tokens=1))


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.integers(1, 6), min_size=1, max_size=120),
    st.integers(8, 40),
    st.integers(0, 100),
)
def test_windows_cover_each_slot_exactly_once(costs, budget, overlap_pct):
    budget = max(budget, max(costs))
    overlap = overlap_pct * (budget - 1) // 100
    windows = plan_windows(costs, budget, overlap)
    assert windows[0][0] == 0 and windows[-1][1] == len(costs)
    for (s0, e0), (s1, e1) in zip(windows, windows[1:]):
        assert s0 < s1 <= e0 < e1
    for s, e in windows:
        assert sum(costs[s:e]) <= budget
    offsets = np.concatenate([[0], np.cumsum(costs)])
    owner = kernels.assign_windows(offsets[1:] - 1, offsets[[s for s, _ in windows]], offsets[[e for _, e in windows]])
    assert (owner >= 0).all()
    for i, w in enumerate(owner):
        s, e = windows[w]
        assert s <= i < e


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(WORDS), min_size=1, max_size=300), st.integers(0, 20))
def test_windowing_is_transparent_for_order_insensitive_stub(words, overlap):
    stub = OrderInsensitiveStub(max_len=40)
    windowed = predict_windowed(words, "en", stub, WindowPolicy(overlap_tokens=overlap))
    assert windowed == [stub.label(w) for w in words]


def test_window_assignment_kernels_agree():
    if kernels.HAS_NUMBA is False:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(0)
    costs = rng.integers(1, 5, 2000)
    windows = plan_windows(list(costs), 60, 20)
    offsets = np.concatenate([[0], np.cumsum(costs)])
    args = offsets[1:] - 1, offsets[[s for s, _ in windows]], offsets[[e for _, e in windows]]
    np.testing.assert_array_equal(kernels.assign_windows_numpy(*args), kernels.assign_windows_numba(*args))


def test_word_conservation_and_determinism():
    stub = OrderInsensitiveStub(max_len=30)
    text = " ".join(WORDS * 20)
    out = punctuate(text, "en", stub, WindowPolicy(overlap_tokens=8))
    assert segment(strip_glyphs(out), "en") == text.split()
    assert out == punctuate(text, "en", stub, WindowPolicy(overlap_tokens=8))


def test_punctuate_file(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("alpha beta\ngamma, delta epsilon\nzeta\n", encoding="utf-8")
    dst = tmp_path / "out.txt"
    stub = OrderInsensitiveStub()
    summary = punctuate_file(src, dst, "en", stub)
    lines = dst.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3 and summary.lines == 3
    assert summary.slots == 6 == sum(summary.counts.values())
    assert summary.warnings == 1
    assert json.loads(summary.to_json())["slots"] == 6


def test_punctuate_empty_file(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes(b"")
    summary = punctuate_file(src, tmp_path / "out.txt", "en", OrderInsensitiveStub())
    assert (tmp_path / "out.txt").read_bytes() == b""
    assert summary.slots == 0 and all(v == 0 for v in summary.counts.values())


def test_malformed_utf8_position_reported():
    lines = [b"alpha beta\n", b"ga\xffmma\n"]
    with pytest.raises(MalformedInputError) as info:
        punctuate_lines(lines, io.StringIO(), "en", OrderInsensitiveStub())
    assert (info.value.line, info.value.offset) == (2, len(lines[0]) + 2)


def test_windows_advance_past_an_expensive_word():
    windows = plan_windows([1, 1, 1, 1, 6], budget=8, overlap=3)
    assert [e for _, e in windows] == [4, 5]
