"""Command-line driver for the punctuation pipeline.

Corpus layout under a root directory (``--data`` or ``$PUNCT_DATA_DIR``)::

    <root>/<lang>/train[.txt|/]  valid[.txt|/]  test[.txt|/]

Exit status: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from slotpunct.dataset import (
    SplitSpec,
    corpus_stats,
    derive_seed,
    filter_articles,
    oversample_questions,
    read_articles,
    render_stats_table,
    shuffle_merge,
    split,
    window_samples,
)
from slotpunct.eval import AlignmentError, EvalReport, baseline_report, compare_runs, load_baselines, render_table, score
from slotpunct.inference import WindowPolicy, punctuate_lines
from slotpunct.langs import Lang, UnsupportedLanguageError, as_lang
from slotpunct.segment import DeferredBoundaries, Lexicon, SegmentationMode, segment
from slotpunct.slotmask import LabeledSequence, extract_labels, read_jsonl
from slotpunct.textnorm import normalize_text

log = logging.getLogger("slotpunct")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SPLITS = ("train", "valid", "test")
TRAIN_FIELDS = ("lr_head", "lr_encoder", "warmup_steps", "batch_size", "seq_len", "iterations", "eval_every")
LEXICON_FILE = "lexicon.txt"

# flag name -> published-baseline tables rendered by `compare --baseline`
BASELINE_VIEWS = {
    "english": ["english_iwslt2012_test"],
    "mandarin": ["mandarin_iwslt2012_test"],
    "malay": ["malay_news_test"],
    "mono-vs-multi": ["mono_vs_multi_en", "mono_vs_multi_zh", "mono_vs_multi_ms"],
    "segmenter": ["mandarin_segmenter"],
}

# Bad corpora, checkpoints and inputs all surface as one of these; the
# specific subclasses (MalformedInputError, AlignmentError, ...) carry detail.
DATA_ERRORS = (OSError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --- config file --------------------------------------------------------------


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; keys mirror long flag names."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean")
            defaults[key] = value.lower() in ("true", "1", "yes")
        else:
            defaults[key] = value
    parser.set_defaults(**defaults)


# --- shared helpers -----------------------------------------------------------


def _lang_list(value: str) -> list[Lang]:
    return [as_lang(v) for v in value.split(",") if v]


def _data_root(arg: str | None) -> Path:
    root = arg or os.environ.get("PUNCT_DATA_DIR")
    if not root:
        raise UsageError("no corpus given: pass a path or set PUNCT_DATA_DIR")
    return Path(root)


def _lang_dir(root: Path, lang: Lang) -> Path:
    return root / lang.value if (root / lang.value).is_dir() else root


def _split_path(root: Path, name: str) -> Path | None:
    for cand in (root / name, root / f"{name}.txt"):
        if cand.exists():
            return cand
    return None


def _open_in(path: str | None):
    return sys.stdin.buffer if path in (None, "-") else open(path, "rb")


def _read_lines(path: str | None) -> list[str]:
    src = _open_in(path)
    try:
        return [raw.decode("utf-8").rstrip("\r\n") for raw in src]
    finally:
        if src is not sys.stdin.buffer:
            src.close()


def _write_out(path: str | None):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8")


def _lexicon(path: str | None, model_dir: str | None = None) -> Lexicon:
    if path:
        return Lexicon.from_file(path)
    if model_dir and (Path(model_dir) / LEXICON_FILE).exists():
        return Lexicon.from_file(Path(model_dir) / LEXICON_FILE)
    return Lexicon.default()


def write_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    entries = sorted(lexicon.entries.items())
    Path(path).write_text("".join(f"{w}\t{c}\n" for w, c in entries), encoding="utf-8")


def _labeled(articles, lang: Lang, mode, lexicon, split_pieces) -> list[LabeledSequence]:
    out = []
    for art in articles:
        text = normalize_text(art.text, lang)
        out.append(extract_labels(text, lang, lexicon, mode, split_pieces=split_pieces))
    return out


def _corpus_splits(path: Path, lang: Lang, seed: int) -> dict[str, list]:
    """Articles per split, from split files if present, else a seeded 80/10/10 split."""
    root = _lang_dir(path, lang)
    if root.is_dir():
        found = {name: _split_path(root, name) for name in SPLITS}
        if any(found.values()):
            return {name: read_articles(p, lang) if p else [] for name, p in found.items()}
    if not root.exists():
        raise FileNotFoundError(f"no corpus at {root}")
    articles = read_articles(root, lang)
    parts = split(articles, SplitSpec((0.8, 0.1, 0.1), derive_seed(seed, "split")))
    return dict(zip(SPLITS, parts))


# --- subcommands --------------------------------------------------------------


def cmd_normalize(args) -> int:
    lang = as_lang(args.lang)
    with _write_out(args.out) as out:
        for line in _read_lines(args.input):
            out.write(normalize_text(line, lang) + "\n")
    return EXIT_OK


def _split_fn(args):
    if not args.model:
        raise UsageError("subword mode needs --model for the encoder tokenizer")
    from slotpunct.model import load_checkpoint

    return load_checkpoint(args.model).split_pieces


def cmd_segment(args) -> int:
    lang = as_lang(args.lang)
    mode = SegmentationMode(args.mode)
    lexicon = _lexicon(args.lexicon, args.model) if lang is Lang.ZH and mode is SegmentationMode.WORD else None
    split_pieces = _split_fn(args) if mode is SegmentationMode.SUBWORD else None
    with _write_out(args.out) as out:
        for line in _read_lines(args.input):
            pieces = segment(line, lang, mode, lexicon)
            if isinstance(pieces, DeferredBoundaries):
                pieces = pieces.resolve(split_pieces)
            out.write(" ".join(pieces) + "\n")
    return EXIT_OK


def cmd_mask(args) -> int:
    lang = as_lang(args.lang)
    mode = SegmentationMode(args.mode)
    lexicon = _lexicon(args.lexicon, args.model) if lang is Lang.ZH and mode is SegmentationMode.WORD else None
    split_pieces = _split_fn(args) if mode is SegmentationMode.SUBWORD else None
    with _write_out(args.out) as out:
        for line in _read_lines(args.input):
            if not line.strip():
                continue
            text = normalize_text(line, lang)
            seq = extract_labels(text, lang, lexicon, mode, split_pieces=split_pieces)
            out.write(seq.to_json() + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    root = _data_root(args.corpus)
    table = {}
    for lang in _lang_list(args.lang):
        lexicon = Lexicon.default() if lang is Lang.ZH else None
        parts = _corpus_splits(root, lang, args.seed)
        table[lang.value] = {
            name: corpus_stats(_labeled(arts, lang, SegmentationMode.WORD, lexicon, None)) for name, arts in parts.items()
        }
    print(render_stats_table(table))
    return EXIT_OK


def _write_articles(articles, path: Path) -> None:
    path.write_text("".join(a.text + "\n\n" for a in articles), encoding="utf-8")


def cmd_split(args) -> int:
    lang = as_lang(args.lang)
    root = _data_root(args.corpus)
    ratios = tuple(float(x) for x in args.ratios.split(","))
    try:
        spec = SplitSpec(ratios, derive_seed(args.seed, "split"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    articles = read_articles(_lang_dir(root, lang), lang)
    if args.min_sentences:
        articles = filter_articles(
            [dataclasses.replace(a, text=normalize_text(a.text, lang)) for a in articles], args.min_sentences
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in zip(SPLITS, split(articles, spec)):
        _write_articles(part, out / f"{name}.txt")
        print(f"{name}\t{len(part)}")
    return EXIT_OK


def cmd_oversample(args) -> int:
    lang = as_lang(args.lang)
    articles = [dataclasses.replace(a, text=normalize_text(a.text, lang)) for a in read_articles(args.input, lang)]
    try:
        out = oversample_questions(articles, args.multiplier, derive_seed(args.seed, "oversample"))
    except ValueError as exc:
        if isinstance(exc, UnsupportedLanguageError):
            raise
        raise UsageError(str(exc)) from None
    _write_articles(out, Path(args.out))
    return EXIT_OK


def _train_config(args):
    from slotpunct.model import TrainConfig

    overrides = {k: getattr(args, k) for k in TRAIN_FIELDS if getattr(args, k) is not None}
    try:
        return TrainConfig(seed=args.seed, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _training_data(args, langs, mode, split_pieces):
    """(train, valid) sequences per language, plus the zh lexicon used."""
    from slotpunct.synthetic import generate_articles, toy_lexicon

    data = {}
    lexicon = None
    if args.synthetic:
        if Lang.ZH in langs and mode is SegmentationMode.WORD:
            lexicon = toy_lexicon(args.seed)
        for lang in langs:
            arts = generate_articles(lang, args.synthetic, args.seed)
            tr, va, _ = split(arts, SplitSpec((0.8, 0.1, 0.1), derive_seed(args.seed, "split")))
            data[lang] = (tr, va)
    else:
        root = _data_root(args.data)
        if Lang.ZH in langs and mode is SegmentationMode.WORD:
            lexicon = _lexicon(args.lexicon)
        for lang in langs:
            parts = _corpus_splits(root, lang, args.seed)
            tr = parts["train"]
            if args.multiplier != 1.0:
                tr = [dataclasses.replace(a, text=normalize_text(a.text, lang)) for a in tr]
                tr = oversample_questions(tr, args.multiplier, derive_seed(args.seed, f"oversample-{lang.value}"))
            data[lang] = (tr, parts["valid"])
    seqs = {
        lang: tuple(_labeled(arts, lang, mode, lexicon if lang is Lang.ZH else None, split_pieces) for arts in pair)
        for lang, pair in data.items()
    }
    return seqs, lexicon


def cmd_train(args) -> int:
    from slotpunct.model import HFEncoder, ClassifierHead, ToyTokenizer, build_toy_model, save_checkpoint, train

    langs = _lang_list(args.lang)
    mode = SegmentationMode(args.mode)
    if mode is SegmentationMode.SUBWORD and langs != [Lang.ZH]:
        raise UsageError("subword mode is only defined for --lang zh")
    config = _train_config(args)

    if args.encoder == "toy":
        split_pieces = ToyTokenizer([]).split_pieces
    else:
        encoder = HFEncoder(args.encoder, max_len=config.seq_len)
        split_pieces = encoder.split_pieces
    seqs, lexicon = _training_data(args, langs, mode, split_pieces)

    if args.encoder == "toy":
        tokenizer = ToyTokenizer.build(s for pair in seqs.values() for part in pair for s in part)
        encoder, head = build_toy_model(tokenizer, seed=args.seed, max_len=config.seq_len)
    else:
        import torch

        torch.manual_seed(derive_seed(args.seed, "init"))
        head = ClassifierHead(encoder.dim)

    def windows(part):
        return window_samples(part, config.seq_len, encoder.token_count, config.seq_len)

    train_seqs = shuffle_merge([windows(pair[0]) for pair in seqs.values()], derive_seed(args.seed, "merge"))
    valid = [s for pair in seqs.values() for s in windows(pair[1])]
    result = train(train_seqs, config, encoder, head, valid=valid or None)
    out = save_checkpoint(args.out, result.encoder, result.head, config, result.trace, mode)
    if lexicon is not None and (args.synthetic or args.lexicon):
        write_lexicon(lexicon, out / LEXICON_FILE)
    for row in result.trace:
        print(f"step {row.step}\tloss {row.loss:.6f}\tval_f1 {row.val_f1:.4f}")
    return EXIT_OK


def cmd_punctuate(args) -> int:
    from slotpunct.model import load_checkpoint

    lang = as_lang(args.lang)
    model = load_checkpoint(args.model)
    mode = SegmentationMode(args.mode) if args.mode else model.mode
    lexicon = _lexicon(args.lexicon, args.model) if lang is Lang.ZH and mode is SegmentationMode.WORD else None
    policy = WindowPolicy(args.window, args.overlap)
    try:
        policy.budget(model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    src = _open_in(args.input)
    try:
        with _write_out(args.out) as out:
            summary = punctuate_lines(
                src, out, lang, model, policy, lexicon, mode, source=args.input or "<stdin>"
            )
    finally:
        if src is not sys.stdin.buffer:
            src.close()
    if args.summary:
        print(summary.to_json(), file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred, ref = read_jsonl(args.pred), read_jsonl(args.ref)
    if len(pred) != len(ref):
        raise AlignmentError(min(len(pred), len(ref)), f"{len(pred)} predicted vs {len(ref)} reference sequences")
    report = score(pred, ref)
    if args.json:
        print(report.to_json())
    else:
        print(render_table({args.name: report}))
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.baseline is None and not args.reports:
        args.baseline = "mono-vs-multi"
    if args.baseline is None:
        if len(args.reports) != 2:
            raise UsageError("compare takes two report files, or --baseline NAME [report]")
        a, b = (_report_from_file(p) for p in args.reports)
        names = (Path(args.reports[0]).stem, Path(args.reports[1]).stem)
        print(render_table(dict(zip(names, (a, b)))))
        print()
        print(compare_runs(a, b, names).render())
        return EXIT_OK
    if len(args.reports) > 1:
        raise UsageError("--baseline takes at most one report file")
    ours = {Path(p).stem: _report_from_file(p) for p in args.reports}
    tables = load_baselines()["tables"]
    blocks = []
    for key in BASELINE_VIEWS[args.baseline]:
        models = tables[key]["models"]
        reports = {m: baseline_report(key, m) for m in models}
        reports.update(ours)
        block = render_table(reports, title=tables[key].get("title", key))
        # a user report is diffed against the table's last (reference) row
        names = list(ours) + list(models)[-1:] if ours else list(models)
        if len(names) == 2:
            block += "\n" + compare_runs(reports[names[0]], reports[names[1]], tuple(names)).render()
        blocks.append(block)
    print("\n\n".join(blocks))
    return EXIT_OK


def _report_from_file(path: str) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _score_checkpoint(model_dir: str, lang: Lang, articles, lexicon_path: str | None) -> EvalReport:
    from slotpunct.model import load_checkpoint

    model = load_checkpoint(model_dir)
    lexicon = _lexicon(lexicon_path, model_dir) if model.mode is SegmentationMode.WORD else None
    seqs = _labeled(articles, lang, model.mode, lexicon, model.split_pieces)
    seqs = window_samples(seqs, model.max_len, model.token_count, model.max_len)
    return score(model.predict_sequences(seqs), seqs)


def ablate_segmentation(
    word_model: str | None = None,
    subword_model: str | None = None,
    corpus: str | Path | None = None,
    lang: Lang = Lang.ZH,
    seed: int = 0,
    toy: bool = False,
    lexicon: str | None = None,
) -> dict[str, EvalReport]:
    """Word-mode vs subword-mode test reports, from checkpoints or toy runs."""
    if toy:
        from slotpunct.experiments import segmentation_ablation

        return segmentation_ablation(seed)
    if not word_model or not subword_model:
        raise FileNotFoundError("ablation needs a word-mode and a subword-mode checkpoint")
    test = _corpus_splits(Path(corpus), lang, seed)["test"]
    return {
        "word": _score_checkpoint(word_model, lang, test, lexicon),
        "subword": _score_checkpoint(subword_model, lang, test, lexicon),
    }


def cmd_ablate(args) -> int:
    corpus = None if args.toy else _data_root(args.data)
    reports = ablate_segmentation(
        args.word_model, args.subword_model, corpus, as_lang(args.lang), args.seed, args.toy, args.lexicon
    )
    print(render_table(reports, title="Word vs subword slotting"))
    print()
    print(compare_runs(reports["word"], reports["subword"], ("word", "subword")).render())
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="slotpunct", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    subs = {}

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key = value file; flags override it")
        subs[name] = p
        return p

    def lang(p, multi=False):
        p.add_argument("--lang", required=True, help="comma-separated en,zh,ms" if multi else "en, zh or ms")

    def io(p):
        p.add_argument("input", nargs="?", help="input file (default stdin)")
        p.add_argument("-o", "--out", help="output file (default stdout)")

    def seg(p):
        p.add_argument("--mode", choices=[m.value for m in SegmentationMode], default="word")
        p.add_argument("--lexicon", help="word<TAB>frequency file for zh (default: bundled)")
        p.add_argument("--model", help="checkpoint whose tokenizer decides subword slots")

    p = add("normalize", cmd_normalize, "map punctuation to the 4-class inventory")
    lang(p)
    io(p)

    p = add("segment", cmd_segment, "split normalized text into slotting units")
    lang(p)
    io(p)
    seg(p)

    p = add("mask", cmd_mask, "turn punctuated lines into labeled JSONL sequences")
    lang(p)
    io(p)
    seg(p)

    p = add("stats", cmd_stats, "word and punctuation counts per split")
    lang(p, multi=True)
    p.add_argument("corpus", nargs="?")
    p.add_argument("--seed", type=int, default=0)

    p = add("split", cmd_split, "seeded train/valid/test split of a corpus")
    lang(p)
    p.add_argument("corpus", nargs="?")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--min-sentences", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = add("oversample", cmd_oversample, "duplicate question sentences in training articles")
    lang(p)
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--multiplier", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("train", cmd_train, "fine-tune an encoder and head")
    lang(p, multi=True)
    p.add_argument("--data", help="corpus root (default $PUNCT_DATA_DIR)")
    p.add_argument("--synthetic", type=int, default=0, metavar="N", help="train on N generated articles per language")
    p.add_argument("-o", "--out", required=True, help="checkpoint directory")
    p.add_argument("--encoder", default="toy", help="'toy' or a Hugging Face model name/path")
    p.add_argument("--mode", choices=[m.value for m in SegmentationMode], default="word")
    p.add_argument("--lexicon")
    p.add_argument("--multiplier", type=float, default=1.0, help="question oversampling factor")
    p.add_argument("--seed", type=int, default=0)
    for name in TRAIN_FIELDS:
        p.add_argument("--" + name.replace("_", "-"), type=float if name.startswith("lr") else int)

    p = add("punctuate", cmd_punctuate, "restore punctuation in raw text")
    lang(p)
    io(p)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=[m.value for m in SegmentationMode])
    p.add_argument("--lexicon")
    p.add_argument("--window", type=int, help="window size in tokens (default: model max length)")
    p.add_argument("--overlap", type=int, default=64)
    p.add_argument("--summary", action="store_true", help="print a JSON summary to stderr")
    p.add_argument("--seed", type=int, default=0)

    p = add("evaluate", cmd_evaluate, "score predicted against reference JSONL")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--name", default="model")
    p.add_argument("--json", action="store_true")

    p = add("compare", cmd_compare, "render published baselines or diff two report files")
    p.add_argument("reports", nargs="*", help="JSON reports written by `evaluate --json`")
    p.add_argument("--baseline", choices=sorted(BASELINE_VIEWS), help="published tables (default mono-vs-multi)")

    p = add("ablate", cmd_ablate, "word vs subword slotting comparison")
    p.add_argument("--lang", default="zh")
    p.add_argument("--word-model")
    p.add_argument("--subword-model")
    p.add_argument("--data")
    p.add_argument("--lexicon")
    p.add_argument("--toy", action="store_true", help="train both modes on the synthetic grammar")
    p.add_argument("--seed", type=int, default=0)
    return parser, subs


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(subs[args.command], read_config(args.config))
            args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedLanguageError as exc:
        print(f"slotpunct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"slotpunct: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
