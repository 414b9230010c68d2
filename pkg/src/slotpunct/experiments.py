"""Desk-scale training runs on the synthetic grammar.

These drive the toy end-to-end check, the multilingual-vs-monolingual
comparison and the word-vs-subword segmentation ablation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

from slotpunct.dataset import SplitSpec, derive_seed, shuffle_merge, split, window_samples
from slotpunct.eval import EvalReport, score
from slotpunct.langs import Lang, as_lang
from slotpunct.model import TrainConfig, TrainResult, ToyTokenizer, build_toy_model, predict_sequences, train
from slotpunct.segment import SegmentationMode
from slotpunct.slotmask import LabeledSequence, extract_labels
from slotpunct.synthetic import generate_articles, toy_lexicon

TOY_CONFIG = TrainConfig(
    lr_head=1e-3,
    lr_encoder=1e-3,
    warmup_steps=100,
    batch_size=16,
    seq_len=128,
    iterations=2000,
    eval_every=250,
)
TOY_ENCODER = dict(dim=64, layers=2, heads=4, ff=128, max_len=128)
MAX_SLOTS = 40


@dataclass
class ToySplits:
    lang: Lang
    mode: SegmentationMode
    train: list[LabeledSequence]
    valid: list[LabeledSequence]
    test: list[LabeledSequence]


def _char_pieces(text: str) -> list[str]:
    return [ch for ch in text if not ch.isspace()]


def toy_splits(
    lang: str | Lang,
    seed: int = 0,
    n_articles: int = 600,
    mode: str | SegmentationMode = SegmentationMode.WORD,
) -> ToySplits:
    """Labeled train/valid/test windows for one language of the grammar."""
    lang = as_lang(lang)
    mode = SegmentationMode(mode)
    lexicon = toy_lexicon(seed) if lang is Lang.ZH else None
    articles = generate_articles(lang, n_articles, seed)
    parts = split(articles, SplitSpec((0.8, 0.1, 0.1), derive_seed(seed, "split")))
    out = []
    for part in parts:
        seqs = [extract_labels(a.text, lang, lexicon, mode, split_pieces=_char_pieces) for a in part]
        out.append(window_samples(seqs, MAX_SLOTS))
    return ToySplits(lang, mode, *out)


def build_tokenizer(splits: Sequence[ToySplits]) -> ToyTokenizer:
    return ToyTokenizer.build(s for sp in splits for s in sp.train + sp.valid + sp.test)


def run_toy(
    train_seqs: Sequence[LabeledSequence],
    valid: Sequence[LabeledSequence],
    tokenizer: ToyTokenizer,
    config: TrainConfig = TOY_CONFIG,
    seed: int = 0,
) -> TrainResult:
    encoder, head = build_toy_model(tokenizer, seed=seed, **TOY_ENCODER)
    config = dataclasses.replace(config, seed=seed)
    return train(train_seqs, config, encoder, head, valid=valid)


def evaluate(result: TrainResult, test: Sequence[LabeledSequence]) -> EvalReport:
    return score(predict_sequences(test, result.encoder, result.head), test)


def mono_vs_multi(
    langs: Sequence[str | Lang] = (Lang.EN, Lang.ZH, Lang.MS),
    seed: int = 0,
    n_articles: int = 600,
    config: TrainConfig = TOY_CONFIG,
) -> dict[str, dict[str, EvalReport]]:
    """Test reports per language for monolingual runs and one merged run."""
    splits = [toy_splits(lang, seed, n_articles) for lang in langs]
    tokenizer = build_tokenizer(splits)
    reports: dict[str, dict[str, EvalReport]] = {}
    for sp in splits:
        result = run_toy(sp.train, sp.valid, tokenizer, config, seed)
        reports.setdefault(sp.lang.value, {})["mono"] = evaluate(result, sp.test)
    merged = shuffle_merge([sp.train for sp in splits], derive_seed(seed, "merge"))
    valid = [s for sp in splits for s in sp.valid]
    result = run_toy(merged, valid, tokenizer, config, seed)
    for sp in splits:
        reports[sp.lang.value]["multi"] = evaluate(result, sp.test)
    return reports


def segmentation_ablation(
    seed: int = 0, n_articles: int = 600, config: TrainConfig = TOY_CONFIG
) -> dict[str, EvalReport]:
    """Word-granularity vs character-granularity slotting on the Mandarin grammar."""
    reports = {}
    for mode in SegmentationMode:
        sp = toy_splits(Lang.ZH, seed, n_articles, mode)
        result = run_toy(sp.train, sp.valid, build_tokenizer([sp]), config, seed)
        reports[mode.value] = evaluate(result, sp.test)
    return reports
