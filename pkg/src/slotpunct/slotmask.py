"""Slot-filling transform between punctuated text and (masked input, labels)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from slotpunct.langs import Lang, as_lang
from slotpunct.segment import DeferredBoundaries, Lexicon, SegmentationMode, segment
from slotpunct.textnorm import ALL_GLYPHS

log = logging.getLogger(__name__)

MASK = "<mask>"


class PunctClass(IntEnum):
    """Slot label. The integer value doubles as the classifier output index."""

    O = 0
    C = 1
    P = 2
    Q = 3

    @classmethod
    def parse(cls, value: str | int | PunctClass) -> PunctClass:
        if isinstance(value, str):
            return cls[value]
        return cls(value)


CLASS_ORDER: tuple[str, ...] = tuple(c.name for c in PunctClass)

_GLYPH_CLASS = {",": PunctClass.C, ".": PunctClass.P, "?": PunctClass.Q, "，": PunctClass.C, "。": PunctClass.P, "？": PunctClass.Q}
_LATIN_GLYPH = {PunctClass.O: "", PunctClass.C: ",", PunctClass.P: ".", PunctClass.Q: "?"}
_CJK_GLYPH = {PunctClass.O: "", PunctClass.C: "，", PunctClass.P: "。", PunctClass.Q: "？"}


def glyph(label: PunctClass, lang: str | Lang) -> str:
    return (_CJK_GLYPH if as_lang(lang) is Lang.ZH else _LATIN_GLYPH)[label]


def separator(lang: str | Lang) -> str:
    return "" if as_lang(lang) is Lang.ZH else " "


class LengthMismatchError(ValueError):
    pass


@dataclass
class LabeledSequence:
    words: list[str]
    labels: list[PunctClass]
    lang: Lang = Lang.EN
    dropped_leading: int = field(default=0, compare=False)

    def __post_init__(self):
        self.lang = as_lang(self.lang)
        self.labels = [PunctClass.parse(lab) for lab in self.labels]
        if len(self.words) != len(self.labels):
            raise LengthMismatchError(f"{len(self.words)} words but {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.words)

    def to_json(self) -> str:
        return json.dumps(
            {"lang": self.lang.value, "words": list(self.words), "labels": [lab.name for lab in self.labels]},
            ensure_ascii=False,
        )

    @classmethod
    def from_dict(cls, record: dict) -> LabeledSequence:
        return cls(list(record["words"]), list(record["labels"]), record.get("lang", "en"))


@dataclass(frozen=True)
class MaskedSample:
    rendered: str
    slot_count: int
    lang: Lang
    words: tuple[str, ...] = ()


def _split_glyph_runs(text: str) -> Iterator[tuple[str, str]]:
    """Yield (run, following glyph or '') pairs."""
    run: list[str] = []
    for ch in text:
        if ch in _GLYPH_CLASS:
            yield "".join(run), ch
            run = []
        else:
            run.append(ch)
    yield "".join(run), ""


def extract_labels(
    normalized_text: str,
    lang: str | Lang,
    lexicon: Lexicon | None = None,
    mode: str | SegmentationMode = SegmentationMode.WORD,
    split_pieces: Callable[[str], list[str]] | None = None,
) -> LabeledSequence:
    """Split normalized text into words and the label of the slot after each.

    Glyphs immediately following a word set its label; further glyphs before
    the next word are ignored. Glyphs before the first word are dropped and
    counted in ``dropped_leading``. In subword mode ``split_pieces`` (the
    encoder tokenizer) decides the slot positions.
    """
    lang = as_lang(lang)
    mode = SegmentationMode(mode)
    words: list[str] = []
    labels: list[PunctClass] = []
    dropped = 0
    for run, mark in _split_glyph_runs(normalized_text):
        pieces = segment(run, lang, mode, lexicon)
        if isinstance(pieces, DeferredBoundaries):
            if split_pieces is None:
                raise ValueError("subword mode needs the encoder tokenizer's split function")
            pieces = pieces.resolve(split_pieces)
        if pieces:
            words.extend(pieces)
            labels.extend([PunctClass.O] * len(pieces))
            if mark:
                labels[-1] = _GLYPH_CLASS[mark]
        elif mark:
            if not words:
                dropped += 1
            # consecutive glyph: the first one already set the label
    if dropped:
        log.warning("dropped %d leading punctuation glyph(s)", dropped)
    return LabeledSequence(words, labels, lang, dropped_leading=dropped)


def build_masked_input(seq: LabeledSequence) -> MaskedSample:
    parts = []
    for word in seq.words:
        parts.append(word)
        parts.append(MASK)
    return MaskedSample(" ".join(parts), len(seq.words), seq.lang, tuple(seq.words))


def apply_labels(words: Sequence[str], labels: Sequence[PunctClass | str], lang: str | Lang) -> str:
    if len(words) != len(labels):
        raise LengthMismatchError(f"{len(words)} words but {len(labels)} labels")
    lang = as_lang(lang)
    sep = separator(lang)
    out = []
    for word, lab in zip(words, labels):
        out.append(word + glyph(PunctClass.parse(lab), lang))
    return sep.join(out)


def strip_glyphs(text: str) -> str:
    return text.translate({ord(g): None for g in ALL_GLYPHS})


def write_jsonl(sequences: Iterable[LabeledSequence], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for seq in sequences:
            fh.write(seq.to_json() + "\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> list[LabeledSequence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(LabeledSequence.from_dict(json.loads(line)))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad sample record: {exc}") from exc
    return out
