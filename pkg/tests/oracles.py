"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from slotpunct.slotmask import PunctClass

FLOOR = 1


def all_segmentations(text: str):
    n = len(text)
    for cuts in itertools.product((False, True), repeat=max(n - 1, 0)):
        words, start = [], 0
        for i, cut in enumerate(cuts, 1):
            if cut:
                words.append(text[start:i])
                start = i
        words.append(text[start:])
        yield words


def brute_force_segment(text: str, entries: Mapping[str, int]) -> list[str]:
    """Exhaustive maximum-probability segmentation with exact integer arithmetic.

    A piece is admissible if it is a lexicon entry or a single character
    (floor frequency). Among equal-probability segmentations the one whose
    word-length tuple is lexicographically largest wins, i.e. the longest
    possible first word, then the longest second word, and so on.
    """
    if not text:
        return []
    freq = dict(entries)
    for w in list(freq):
        for ch in w:
            freq.setdefault(ch, FLOOR)
    total = sum(freq.values())
    best_key, best = None, None
    for words in all_segmentations(text):
        if any(len(w) > 1 and w not in freq for w in words):
            continue
        num = 1
        for w in words:
            num *= freq.get(w, FLOOR)
        # probability num / total**k, compared exactly by cross-multiplying
        k = len(words)
        key = (num, k, tuple(len(w) for w in words))
        if best_key is None or _better(key, best_key, total):
            best_key, best = key, words
    return best


def _better(a, b, total) -> bool:
    lhs = a[0] * total ** b[1]
    rhs = b[0] * total ** a[1]
    if lhs != rhs:
        return lhs > rhs
    return a[2] > b[2]


def hand_confusion(pred: Sequence[PunctClass], ref: Sequence[PunctClass]) -> dict:
    """tp/fp/fn per punctuation class by direct counting."""
    out = {c: {"tp": 0, "fp": 0, "fn": 0} for c in (PunctClass.C, PunctClass.P, PunctClass.Q)}
    for p, r in zip(pred, ref):
        for c in out:
            if p == c and r == c:
                out[c]["tp"] += 1
            elif p == c:
                out[c]["fp"] += 1
            elif r == c:
                out[c]["fn"] += 1
    return out


def malay_reference() -> dict[int, str]:
    """Cardinal numerals as listed in standard Malay grammar references."""
    return {
        0: "kosong",
        1: "satu",
        7: "tujuh",
        8: "lapan",
        10: "sepuluh",
        11: "sebelas",
        12: "dua belas",
        19: "sembilan belas",
        20: "dua puluh",
        21: "dua puluh satu",
        45: "empat puluh lima",
        99: "sembilan puluh sembilan",
        100: "seratus",
        101: "seratus satu",
        110: "seratus sepuluh",
        111: "seratus sebelas",
        250: "dua ratus lima puluh",
        999: "sembilan ratus sembilan puluh sembilan",
        1000: "seribu",
        1001: "seribu satu",
        1100: "seribu seratus",
        2020: "dua ribu dua puluh",
        11000: "sebelas ribu",
        100000: "seratus ribu",
        1000000: "satu juta",
        1500000: "satu juta lima ratus ribu",
        2000000000: "dua bilion",
        3000000000000: "tiga trilion",
    }


class OrderInsensitiveStub:
    """Labels each word from the word alone, so context and windowing cannot matter."""

    mode = "word"

    def __init__(self, max_len: int = 256):
        self.max_len = max_len
        self.calls = 0

    def token_count(self, word: str) -> int:
        return 1 + (len(word) + 2) // 3

    def split_pieces(self, text: str) -> list[str]:
        return [ch for ch in text if not ch.isspace()]

    def label(self, word: str) -> PunctClass:
        return PunctClass(sum(map(ord, word)) % 4)

    def predict(self, words, lang):
        self.calls += 1
        need = 2 + sum(self.token_count(w) for w in words)
        assert need <= self.max_len, f"stub received {need} tokens over {self.max_len}"
        return [self.label(w) for w in words]


class FixedStub:
    """Returns a preset label list regardless of input."""

    mode = "word"
    max_len = 512

    def __init__(self, labels):
        self.labels = [PunctClass.parse(x) for x in labels]

    def token_count(self, word: str) -> int:
        return 2

    def split_pieces(self, text):
        return list(text)

    def predict(self, words, lang):
        return self.labels[: len(words)]
