"""Checkpoint directories and the loaded-model object used for inference.

Layout::

    config.json    train config, encoder and head hyperparameters, mode
    classes.json   class order, index -> label
    head.pt        head state dict
    encoder.pt     encoder state dict (toy encoder, or fine-tuned HF weights)
    vocab.txt      toy tokenizer vocabulary, one piece per line
    trace.csv      step,loss,val_f1
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch

from slotpunct.dataset import derive_seed
from slotpunct.langs import Lang
from slotpunct.model.core import ClassifierHead, TraceRow, TrainConfig, predict_sequences
from slotpunct.model.encoders import HFEncoder, ToyEncoder, ToyTokenizer
from slotpunct.segment import SegmentationMode
from slotpunct.slotmask import CLASS_ORDER, LabeledSequence, PunctClass


def build_toy_model(tokenizer: ToyTokenizer, seed: int = 0, head_hidden: int = 1568, **encoder_kw):
    torch.manual_seed(derive_seed(seed, "init"))
    encoder = ToyEncoder(tokenizer, **encoder_kw)
    head = ClassifierHead(encoder.dim, hidden=head_hidden)
    return encoder, head


@dataclass
class PunctuationModel:
    """A trained encoder + head, read-only after loading."""

    encoder: object
    head: ClassifierHead
    config: TrainConfig
    mode: SegmentationMode = SegmentationMode.WORD

    def __post_init__(self):
        self.encoder.eval()
        self.head.eval()

    @property
    def max_len(self) -> int:
        return self.encoder.max_len

    def token_count(self, word: str) -> int:
        return self.encoder.token_count(word)

    def split_pieces(self, text: str) -> list[str]:
        return self.encoder.split_pieces(text)

    def predict(self, words: Sequence[str], lang: str | Lang) -> list[PunctClass]:
        seq = LabeledSequence(list(words), [PunctClass.O] * len(words), lang)
        return predict_sequences([seq], self.encoder, self.head)[0].labels

    def predict_sequences(self, sequences: Sequence[LabeledSequence]) -> list[LabeledSequence]:
        return predict_sequences(sequences, self.encoder, self.head)


def save_checkpoint(
    path: str | Path,
    encoder,
    head: ClassifierHead,
    config: TrainConfig,
    trace: Sequence[TraceRow] = (),
    mode: SegmentationMode | str = SegmentationMode.WORD,
) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "train_config": config.to_dict(),
        "encoder": {"kind": encoder.kind, **encoder.hparams},
        "head": head.hparams,
        "mode": SegmentationMode(mode).value,
    }
    if isinstance(encoder, ToyEncoder):
        meta["encoder"]["lowercase"] = encoder.tokenizer.lowercase
        vocab = encoder.tokenizer.itos[5:]
        (path / "vocab.txt").write_text("".join(v + "\n" for v in vocab), encoding="utf-8")
    (path / "config.json").write_text(json.dumps(meta, indent=2, ensure_ascii=False), encoding="utf-8")
    (path / "classes.json").write_text(json.dumps(list(CLASS_ORDER)), encoding="utf-8")
    torch.save(head.state_dict(), path / "head.pt")
    torch.save(encoder.state_dict(), path / "encoder.pt")
    write_trace(trace, path / "trace.csv")
    return path


def load_checkpoint(path: str | Path) -> PunctuationModel:
    path = Path(path)
    if not (path / "config.json").exists():
        raise FileNotFoundError(f"no checkpoint at {path}")
    meta = json.loads((path / "config.json").read_text(encoding="utf-8"))
    classes = json.loads((path / "classes.json").read_text(encoding="utf-8"))
    if tuple(classes) != CLASS_ORDER:
        raise ValueError(f"checkpoint class order {classes} differs from {list(CLASS_ORDER)}")
    enc = dict(meta["encoder"])
    kind = enc.pop("kind")
    if kind == "toy":
        lowercase = enc.pop("lowercase", True)
        vocab = (path / "vocab.txt").read_text(encoding="utf-8").split("\n")[:-1]
        encoder = ToyEncoder(ToyTokenizer(vocab, lowercase=lowercase), **enc)
    elif kind == "hf":
        encoder = HFEncoder(enc["name_or_path"], max_len=enc["max_len"])
    else:
        raise ValueError(f"unknown encoder kind {kind!r}")
    encoder.load_state_dict(torch.load(path / "encoder.pt", weights_only=True))
    head = ClassifierHead(**meta["head"])
    head.load_state_dict(torch.load(path / "head.pt", weights_only=True))
    return PunctuationModel(encoder, head, TrainConfig.from_dict(meta["train_config"]), SegmentationMode(meta["mode"]))


def write_trace(trace: Sequence[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "val_f1"])
        for row in trace:
            writer.writerow([row.step, repr(row.loss), repr(row.val_f1)])


def read_trace(path: str | Path) -> list[TraceRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [TraceRow(int(r["step"]), float(r["loss"]), float(r["val_f1"])) for r in csv.DictReader(fh)]
