"""Corpus ingestion, filtering, question oversampling, splits and windowing."""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from slotpunct.langs import Lang, as_lang
from slotpunct.slotmask import LabeledSequence, PunctClass, separator
from slotpunct.textnorm import ALL_GLYPHS

SENTENCE_END = ".?。？"
QUESTION = "?？"


class OversizeTokenError(ValueError):
    def __init__(self, word: str, n_tokens: int, budget: int):
        self.word = word
        super().__init__(f"word {word!r} needs {n_tokens} tokens, over the budget of {budget}")


def derive_seed(seed: int, stage: str) -> int:
    """Stable 63-bit sub-seed for one pipeline stage."""
    digest = hashlib.blake2b(f"{int(seed)}:{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class Article:
    id: str
    lang: Lang
    text: str

    def __post_init__(self):
        object.__setattr__(self, "lang", as_lang(self.lang))
        if not self.text.strip():
            raise ValueError(f"article {self.id!r} is empty")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError(f"ratios must be three non-negative numbers, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)}")


@dataclass
class CorpusStats:
    words: int = 0
    periods: int = 0
    questions: int = 0
    commas: int = 0

    def __add__(self, other: CorpusStats) -> CorpusStats:
        return CorpusStats(
            self.words + other.words,
            self.periods + other.periods,
            self.questions + other.questions,
            self.commas + other.commas,
        )


def read_articles(path: str | Path, lang: str | Lang) -> list[Article]:
    """Load articles from a file or a directory of ``*.txt`` files.

    Inside a file, blank lines separate articles.
    """
    lang = as_lang(lang)
    path = Path(path)
    files = sorted(path.rglob("*.txt")) if path.is_dir() else [path]
    articles = []
    for f in files:
        raw = f.read_text(encoding="utf-8")
        blocks = [b.strip() for b in re.split(r"\n\s*\n", raw)]
        for i, block in enumerate(b for b in blocks if b):
            articles.append(Article(f"{f.stem}:{i}", lang, block))
    return articles


def sentence_count(text: str) -> int:
    """Number of sentence-final glyphs in normalized text."""
    return sum(text.count(g) for g in SENTENCE_END)


def filter_articles(articles: Iterable[Article], min_sentences: int = 3) -> list[Article]:
    # keep articles with more than two sentences
    return [a for a in articles if sentence_count(a.text) >= min_sentences]


def split_sentences(text: str, lang: str | Lang) -> tuple[list[str], str]:
    """Split normalized text into terminated sentences plus an unterminated tail."""
    sentences = []
    start = 0
    for i, ch in enumerate(text):
        if ch in SENTENCE_END:
            sentences.append(text[start : i + 1].strip())
            start = i + 1
    tail = text[start:].strip()
    return [s for s in sentences if s], tail


def _is_question(sentence: str) -> bool:
    return bool(sentence) and sentence[-1] in QUESTION


def oversample_questions(
    articles: Sequence[Article], multiplier: float = 2.0, seed: int = 0, split: str = "train"
) -> list[Article]:
    """Duplicate question sentences into random sentence boundaries.

    Sentences ending in a question mark are drawn with replacement from the
    split's own pool and inserted until the question count reaches
    ``ceil(multiplier * original)``.
    """
    if split != "train":
        raise ValueError(f"question oversampling is only allowed on the train split, not {split!r}")
    if multiplier < 1:
        raise ValueError(f"multiplier must be >= 1, got {multiplier}")
    parsed = [split_sentences(a.text, a.lang) for a in articles]
    pool = [s for sents, _ in parsed for s in sents if _is_question(s)]
    if multiplier > 1 and not pool:
        raise ValueError("no question sentences to oversample from")
    original = len(pool)
    target = math.ceil(multiplier * original - 1e-9)
    if target == original:
        return list(articles)

    rng = np.random.default_rng(seed)
    sentences = [list(sents) for sents, _ in parsed]
    for _ in range(target - original):
        sizes = np.array([len(s) + 1 for s in sentences])
        slot = int(rng.integers(sizes.sum()))
        art = int(np.searchsorted(np.cumsum(sizes), slot, side="right"))
        pos = slot - (int(np.cumsum(sizes)[art - 1]) if art else 0)
        sentences[art].insert(pos, pool[int(rng.integers(len(pool)))])

    out = []
    for article, sents, (_, tail) in zip(articles, sentences, parsed):
        sep = separator(article.lang)
        text = sep.join(sents + ([tail] if tail else []))
        out.append(Article(article.id, article.lang, text))
    return out


def split(articles: Sequence[Article], spec: SplitSpec) -> tuple[list, list, list]:
    n = len(articles)
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [articles[i] for i in order]
    n_valid = math.floor(spec.ratios[1] * n + 1e-9)
    n_test = math.floor(spec.ratios[2] * n + 1e-9)
    n_train = n - n_valid - n_test
    return shuffled[:n_train], shuffled[n_train : n_train + n_valid], shuffled[n_train + n_valid :]


def shuffle_merge(datasets: Sequence[Sequence], seed: int) -> list:
    merged = [item for ds in datasets for item in ds]
    order = np.random.default_rng(seed).permutation(len(merged))
    return [merged[i] for i in order]


def window_samples(
    sequences: Iterable[LabeledSequence],
    max_slots: int,
    token_count: Callable[[str], int] | None = None,
    max_len: int | None = None,
    n_special: int = 2,
) -> list[LabeledSequence]:
    """Cut sequences into consecutive, non-overlapping chunks.

    A chunk holds at most ``max_slots`` words. With ``token_count`` (tokens per
    word, mask included) and ``max_len``, a chunk's encoded length, specials
    included, also stays within ``max_len``.
    """
    if max_slots < 1:
        raise ValueError("max_slots must be >= 1")
    budget = None if max_len is None else max_len - n_special
    out = []
    for seq in sequences:
        start = 0
        used = 0
        n = len(seq.words)
        for i, word in enumerate(seq.words):
            cost = token_count(word) if token_count is not None and budget is not None else 0
            if budget is not None and cost > budget:
                raise OversizeTokenError(word, cost, budget)
            if i - start >= max_slots or (budget is not None and used + cost > budget):
                out.append(LabeledSequence(seq.words[start:i], seq.labels[start:i], seq.lang))
                start, used = i, 0
            used += cost
        if start < n:
            out.append(LabeledSequence(seq.words[start:], seq.labels[start:], seq.lang))
    return out


def corpus_stats(sequences: Iterable[LabeledSequence]) -> CorpusStats:
    counts = np.zeros(len(PunctClass), dtype=np.int64)
    words = 0
    for seq in sequences:
        words += len(seq.words)
        if seq.labels:
            counts += np.bincount(np.fromiter((int(x) for x in seq.labels), dtype=np.int64), minlength=len(PunctClass))
    return CorpusStats(
        words=words,
        periods=int(counts[PunctClass.P]),
        questions=int(counts[PunctClass.Q]),
        commas=int(counts[PunctClass.C]),
    )


def render_stats_table(stats: dict[str, dict[str, CorpusStats]]) -> str:
    """Words/periods/questions/commas per split, one row per language."""
    splits = ["train", "valid", "test"]
    header = ["", *[f"{s.capitalize()} {col}" for s in splits for col in ("Word", "Period", "Question", "Comma")]]
    rows = [header]
    for lang, per_split in stats.items():
        row = [lang]
        for s in splits:
            st = per_split.get(s, CorpusStats())
            row += [f"{st.words:,}", f"{st.periods:,}", f"{st.questions:,}", f"{st.commas:,}"]
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join(" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)


def glyph_counts(text: str) -> dict[str, int]:
    return {g: text.count(g) for g in ALL_GLYPHS}
