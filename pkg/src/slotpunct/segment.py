"""Word boundary detection.

English and Malay split on whitespace. Mandarin uses a maximum-probability
path through the DAG of dictionary matches (the classic jieba-style
segmenter without its HMM fallback for unknown words).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from slotpunct import kernels
from slotpunct.langs import Lang, as_lang

FLOOR_FREQ = 1


class SegmentationMode(str, Enum):
    WORD = "word"
    SUBWORD = "subword"


class MissingLexiconError(ValueError):
    pass


class Lexicon:
    """Immutable word -> frequency table with a character trie for the DP."""

    def __init__(self, entries: Mapping[str, int]):
        freq: dict[str, int] = {}
        for word, count in entries.items():
            if not word:
                raise ValueError("empty word in lexicon")
            if int(count) <= 0:
                raise ValueError(f"non-positive frequency for {word!r}")
            freq[word] = int(count)
        for word in list(freq):
            for ch in word:
                freq.setdefault(ch, FLOOR_FREQ)
        self._freq = freq
        self.total = sum(freq.values())
        self._build_trie()

    @classmethod
    def from_file(cls, path: str | Path) -> Lexicon:
        """Read ``word<TAB>frequency`` lines; ``#`` lines are comments."""
        entries: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) < 2:
                    parts = line.split()
                try:
                    word, count = parts[0], int(parts[1])
                except (IndexError, ValueError):
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>frequency', got {line!r}") from None
                entries[word] = entries.get(word, 0) + count
        return cls(entries)

    @classmethod
    def default(cls) -> Lexicon:
        global _DEFAULT
        if _DEFAULT is None:
            ref = resources.files("slotpunct") / "data" / "zh_lexicon.txt"
            with resources.as_file(ref) as path:
                _DEFAULT = cls.from_file(path)
        return _DEFAULT

    def __contains__(self, word: str) -> bool:
        return word in self._freq

    def __len__(self) -> int:
        return len(self._freq)

    def freq(self, word: str) -> int:
        return self._freq.get(word, 0)

    @property
    def entries(self) -> Mapping[str, int]:
        return dict(self._freq)

    def _build_trie(self) -> None:
        chars = sorted({ch for word in self._freq for ch in word})
        self._char_code = {ch: i for i, ch in enumerate(chars)}
        children: list[dict[int, int]] = [{}]
        logp = [math.nan]
        log_total = math.log(self.total)
        for word, count in self._freq.items():
            node = 0
            for ch in word:
                code = self._char_code[ch]
                nxt = children[node].get(code)
                if nxt is None:
                    nxt = len(children)
                    children[node][code] = nxt
                    children.append({})
                    logp.append(math.nan)
                node = nxt
            logp[node] = math.log(count) - log_total
        starts = np.zeros(len(children) + 1, dtype=np.int64)
        child_char, child_node = [], []
        for i, kids in enumerate(children):
            for code in sorted(kids):
                child_char.append(code)
                child_node.append(kids[code])
            starts[i + 1] = len(child_char)
        self._child_start = starts
        self._child_char = np.asarray(child_char, dtype=np.int64)
        self._child_node = np.asarray(child_node, dtype=np.int64)
        self._node_logp = np.asarray(logp, dtype=np.float64)
        self.floor_logp = math.log(FLOOR_FREQ) - log_total

    def encode(self, text: str) -> np.ndarray:
        get = self._char_code.get
        return np.fromiter((get(ch, -1) for ch in text), dtype=np.int64, count=len(text))

    def trie_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
        """``(child_start, child_char, child_node, node_logp, floor_logp)`` as fed to the DP kernel."""
        return self._child_start, self._child_char, self._child_node, self._node_logp, self.floor_logp

    def route(self, text: str) -> np.ndarray:
        ends, _ = kernels.max_prob_route(self.encode(text), *self.trie_arrays())
        return ends


_DEFAULT: Lexicon | None = None


@dataclass(frozen=True)
class DeferredBoundaries:
    """Marker returned in subword mode: boundaries come from the encoder tokenizer."""

    text: str
    lang: Lang = Lang.ZH

    def resolve(self, split_pieces: Callable[[str], list[str]]) -> list[str]:
        return [p for chunk in self.text.split() for p in split_pieces(chunk) if p]


def segment_whitespace(text: str) -> list[str]:
    return text.split()


def segment_cjk(text: str, lexicon: Lexicon) -> list[str]:
    """Maximum-probability segmentation of ``text`` into lexicon words.

    Characters missing from the lexicon become single-character words scored
    with the floor frequency. Among equal-scoring segmentations the longer word
    wins at each position, scanning left to right.
    """
    if not text:
        return []
    ends = lexicon.route(text)
    words = []
    i = 0
    n = len(text)
    while i < n:
        j = int(ends[i])
        words.append(text[i:j])
        i = j
    return words


def _merge_latin_singles(words: list[str], lexicon: Lexicon) -> list[str]:
    # single ASCII letters/digits missing from the lexicon re-join into one token
    out: list[str] = []
    buf = ""
    for word in words:
        if len(word) == 1 and word.isascii() and word.isalnum() and word not in lexicon:
            buf += word
            continue
        if buf:
            out.append(buf)
            buf = ""
        out.append(word)
    if buf:
        out.append(buf)
    return out


def segment(
    text: str,
    lang: str | Lang,
    mode: str | SegmentationMode = SegmentationMode.WORD,
    lexicon: Lexicon | None = None,
) -> list[str] | DeferredBoundaries:
    lang = as_lang(lang)
    mode = SegmentationMode(mode)
    if lang is not Lang.ZH:
        if mode is SegmentationMode.SUBWORD:
            raise ValueError("subword slotting is only defined for zh")
        return segment_whitespace(text)
    if mode is SegmentationMode.SUBWORD:
        return DeferredBoundaries(text, lang)
    if lexicon is None:
        raise MissingLexiconError("zh word-mode segmentation needs a lexicon")
    words: list[str] = []
    for chunk in text.split():
        words.extend(_merge_latin_singles(segment_cjk(chunk, lexicon), lexicon))
    return words
