"""Punctuate raw transcripts of any length.

Long inputs are cut into overlapping token windows. Each slot takes its
label from the window in which it sits most centrally, so every slot is
decided by exactly one window.
"""

from __future__ import annotations

import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from slotpunct import kernels
from slotpunct.dataset import OversizeTokenError
from slotpunct.langs import Lang, as_lang
from slotpunct.segment import DeferredBoundaries, Lexicon, SegmentationMode, segment
from slotpunct.slotmask import PunctClass, apply_labels
from slotpunct.textnorm import ALL_GLYPHS

log = logging.getLogger(__name__)


class SlotPredictor(Protocol):
    max_len: int

    def token_count(self, word: str) -> int: ...

    def split_pieces(self, text: str) -> list[str]: ...

    def predict(self, words: Sequence[str], lang: str | Lang) -> list[PunctClass]: ...


class MalformedInputError(ValueError):
    def __init__(self, path, line: int, offset: int):
        self.line = line
        self.offset = offset
        super().__init__(f"{path}: invalid UTF-8 at line {line}, byte offset {offset}")


@dataclass(frozen=True)
class WindowPolicy:
    window_tokens: int | None = None
    overlap_tokens: int = 64
    n_special: int = 2

    def budget(self, model: SlotPredictor) -> int:
        window = self.window_tokens if self.window_tokens is not None else model.max_len
        budget = min(window, model.max_len) - self.n_special
        if budget <= 0:
            raise ValueError(f"window of {window} tokens leaves no room for words")
        if not 0 <= self.overlap_tokens < budget:
            raise ValueError(f"overlap {self.overlap_tokens} must be in [0, {budget})")
        return budget


def plan_windows(costs: Sequence[int], budget: int, overlap: int) -> list[tuple[int, int]]:
    """Half-open word ranges, each fitting ``budget`` tokens, overlapping by at most ``overlap`` tokens."""
    windows = []
    n = len(costs)
    start = 0
    while start < n:
        end, used = start, 0
        while end < n and used + costs[end] <= budget:
            used += costs[end]
            end += 1
        if end == start:
            raise OversizeTokenError(str(start), costs[start], budget)
        windows.append((start, end))
        if end == n:
            break
        # back off by up to `overlap` tokens, keeping room for the next new word
        nxt, tail = end, 0
        while nxt - 1 > start and tail + costs[nxt - 1] <= min(overlap, budget - costs[end]):
            nxt -= 1
            tail += costs[nxt]
        start = nxt
    return windows


def predict_windowed(
    words: Sequence[str], lang: str | Lang, model: SlotPredictor, policy: WindowPolicy | None = None
) -> list[PunctClass]:
    if not words:
        return []
    policy = policy or WindowPolicy()
    budget = policy.budget(model)
    costs = [model.token_count(w) for w in words]
    for w, c in zip(words, costs):
        if c > budget:
            raise OversizeTokenError(w, c, budget)
    windows = plan_windows(costs, budget, policy.overlap_tokens)
    if len(windows) == 1:
        return list(model.predict(list(words), lang))

    offsets = np.concatenate([[0], np.cumsum(costs)])
    slot_pos = offsets[1:] - 1  # each word's mask token
    win_start = np.array([offsets[s] for s, _ in windows])
    win_end = np.array([offsets[e] for _, e in windows])
    owner = kernels.assign_windows(slot_pos, win_start, win_end)

    labels: list[PunctClass | None] = [None] * len(words)
    for w, (s, e) in enumerate(windows):
        mine = np.nonzero(owner[s:e] == w)[0]
        if not len(mine):
            continue
        predicted = model.predict(list(words[s:e]), lang)
        for k in mine:
            labels[s + k] = predicted[k]
    assert all(lab is not None for lab in labels)
    return labels


def strip_existing(text: str, lang: Lang) -> tuple[str, int]:
    n = sum(text.count(g) for g in ALL_GLYPHS)
    if not n:
        return text, 0
    repl = "" if lang is Lang.ZH else " "
    return text.translate({ord(g): repl for g in ALL_GLYPHS}), n


def _words_for(text: str, lang: Lang, model: SlotPredictor, mode, lexicon: Lexicon | None) -> list[str]:
    if lang is Lang.ZH and mode is SegmentationMode.WORD and lexicon is None:
        lexicon = Lexicon.default()
    pieces = segment(text, lang, mode, lexicon)
    if isinstance(pieces, DeferredBoundaries):
        return pieces.resolve(model.split_pieces)
    return pieces


def _punctuate(text, lang, model, policy, lexicon, mode) -> tuple[str, list[PunctClass], int]:
    lang = as_lang(lang)
    if mode is None:
        mode = getattr(model, "mode", SegmentationMode.WORD)
    mode = SegmentationMode(mode)
    text, stripped = strip_existing(text, lang)
    if stripped:
        log.warning("stripped %d existing punctuation glyph(s) before punctuating", stripped)
    words = _words_for(text, lang, model, mode, lexicon)
    labels = predict_windowed(words, lang, model, policy)
    return apply_labels(words, labels, lang), labels, stripped


def punctuate(
    raw_text: str,
    lang: str | Lang,
    model: SlotPredictor,
    policy: WindowPolicy | None = None,
    lexicon: Lexicon | None = None,
    mode: SegmentationMode | str | None = None,
) -> str:
    return _punctuate(raw_text, lang, model, policy, lexicon, mode)[0]


@dataclass
class FileSummary:
    lines: int = 0
    slots: int = 0
    counts: dict[str, int] = field(default_factory=lambda: {c.name: 0 for c in PunctClass})
    warnings: int = 0
    seconds: float = 0.0

    @property
    def slots_per_second(self) -> float:
        return self.slots / self.seconds if self.seconds > 0 else 0.0

    def to_json(self) -> str:
        d = dict(vars(self))
        d["slots_per_second"] = self.slots_per_second
        return json.dumps(d)


def punctuate_lines(lines, out, lang, model, policy=None, lexicon=None, mode=None, source="<stdin>") -> FileSummary:
    """Punctuate an iterable of raw byte or str lines into the text stream ``out``."""
    summary = FileSummary()
    tally: Counter[str] = Counter()
    t0 = time.perf_counter()
    offset = 0
    for lineno, raw in enumerate(lines, 1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedInputError(source, lineno, offset + exc.start) from exc
            offset += len(raw)
        else:
            line = raw
        text, labels, stripped = _punctuate(line.rstrip("\r\n"), lang, model, policy, lexicon, mode)
        out.write(text + "\n")
        out.flush()
        summary.lines += 1
        summary.slots += len(labels)
        summary.warnings += stripped
        tally.update(lab.name for lab in labels)
    summary.counts.update(tally)
    summary.seconds = time.perf_counter() - t0
    return summary


def punctuate_file(
    path_in: str | Path,
    path_out: str | Path,
    lang: str | Lang,
    model: SlotPredictor,
    policy: WindowPolicy | None = None,
    lexicon: Lexicon | None = None,
    mode: SegmentationMode | str | None = None,
) -> FileSummary:
    with open(path_in, "rb") as src, open(path_out, "w", encoding="utf-8", buffering=1) as dst:
        return punctuate_lines(src, dst, lang, model, policy, lexicon, mode, source=str(path_in))
