"""Synthetic punctuated corpora for desk-scale training runs.

Each language has the same toy grammar::

    sentence := OPENER CONTENT{3} [CONJ CONTENT{3}]

A question opener makes the sentence end in a question mark, any other
opener in a period; the word before a conjunction takes a comma. Sentence
lengths are fixed (4 or 8 words), so the period position is predictable.
Mandarin words are two or three characters drawn from a shared character
pool and rendered without spaces, which makes character-level boundaries
ambiguous.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from slotpunct.dataset import Article, derive_seed
from slotpunct.langs import Lang, as_lang
from slotpunct.segment import Lexicon
from slotpunct.slotmask import separator

CLAUSE_TAIL = 3


@dataclass(frozen=True)
class Grammar:
    lang: Lang
    statement: tuple[str, ...]
    question: tuple[str, ...]
    conjunction: tuple[str, ...]
    content: tuple[str, ...]
    p_question: float = 0.3
    p_conjunction: float = 0.4

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return self.statement + self.question + self.conjunction + self.content


_EN_CONTENT = (
    "river stone light paper garden window market teacher music morning winter engine city bridge table "
    "letter forest doctor island train coffee painter silver basket mountain village"
).split()
_MS_CONTENT = (
    "sungai batu cahaya kertas taman tingkap pasar guru muzik pagi hujan enjin bandar jambatan meja "
    "surat hutan doktor pulau kereta kopi pelukis perak bakul gunung kampung"
).split()
_ZH_CHARS = "山水火木金土日月风云花草鸟鱼书画车门田石光电米茶海天雨"


def _zh_content(n: int, seed: int = 7) -> tuple[str, ...]:
    rng = np.random.default_rng(seed)
    words: list[str] = []
    while len(words) < n:
        length = 2 if rng.random() < 0.75 else 3
        w = "".join(rng.choice(list(_ZH_CHARS), size=length, replace=False))
        if w not in words:
            words.append(w)
    return tuple(words)


GRAMMARS = {
    Lang.EN: Grammar(
        Lang.EN,
        statement=("the", "this", "our", "my"),
        question=("why", "how", "where", "what"),
        conjunction=("but", "so", "because", "and"),
        content=tuple(_EN_CONTENT),
    ),
    Lang.MS: Grammar(
        Lang.MS,
        statement=("itu", "ini", "kami", "saya"),
        question=("kenapa", "bagaimana", "siapa", "adakah"),
        conjunction=("tetapi", "jadi", "kerana", "dan"),
        content=tuple(_MS_CONTENT),
    ),
    Lang.ZH: Grammar(
        Lang.ZH,
        statement=("这个", "那个", "我们", "他们"),
        question=("为什么", "怎么", "哪里", "是否"),
        conjunction=("但是", "所以", "因为", "而且"),
        content=_zh_content(40),
    ),
}


def _sentence_words(g: Grammar, rng: np.random.Generator) -> list[tuple[str, str]]:
    """One sentence as (word, glyph-after) pairs."""
    is_q = rng.random() < g.p_question
    opener = g.question[rng.integers(len(g.question))] if is_q else g.statement[rng.integers(len(g.statement))]
    words = [opener] + [g.content[rng.integers(len(g.content))] for _ in range(CLAUSE_TAIL)]
    marks = [""] * len(words)
    if rng.random() < g.p_conjunction:
        marks[-1] = ","
        words.append(g.conjunction[rng.integers(len(g.conjunction))])
        words += [g.content[rng.integers(len(g.content))] for _ in range(CLAUSE_TAIL)]
        marks += [""] * (CLAUSE_TAIL + 1)
    marks[-1] = "?" if is_q else "."
    return list(zip(words, marks))


_FULL_WIDTH = str.maketrans(",.?", "，。？")


def _render(pairs: list[tuple[str, str]], lang: Lang) -> str:
    marks = [m.translate(_FULL_WIDTH) if lang is Lang.ZH else m for _, m in pairs]
    return separator(lang).join(w + m for (w, _), m in zip(pairs, marks))


def generate_text(lang: str | Lang, n_sentences: int, rng: np.random.Generator) -> str:
    g = GRAMMARS[as_lang(lang)]
    pairs = [p for _ in range(n_sentences) for p in _sentence_words(g, rng)]
    return _render(pairs, g.lang)


def generate_articles(lang: str | Lang, n_articles: int, seed: int, sentences: tuple[int, int] = (3, 7)) -> list[Article]:
    lang = as_lang(lang)
    rng = np.random.default_rng(derive_seed(seed, f"synthetic-{lang.value}"))
    out = []
    for i in range(n_articles):
        k = int(rng.integers(sentences[0], sentences[1] + 1))
        out.append(Article(f"{lang.value}-{i}", lang, generate_text(lang, k, rng)))
    return out


def toy_lexicon(seed: int = 0, n_sentences: int = 2000) -> Lexicon:
    """Mandarin lexicon with frequencies counted on a sample of the grammar."""
    g = GRAMMARS[Lang.ZH]
    rng = np.random.default_rng(derive_seed(seed, "toy-lexicon"))
    counts: Counter[str] = Counter()
    for _ in range(n_sentences):
        counts.update(w for w, _ in _sentence_words(g, rng))
    for w in g.vocabulary:
        counts.setdefault(w, 1)
    return Lexicon(dict(counts))
