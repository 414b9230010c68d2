"""Contextual encoders behind one small contract.

An encoder turns a masked sample into token ids plus the index of every
``<mask>`` sentinel, and maps a padded id batch to ``[B, T, D]`` vectors.
Exactly one sentinel is emitted per slot, whatever the number of subword
pieces around it.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Protocol, Sequence, runtime_checkable

import torch
from torch import Tensor, nn

from slotpunct.slotmask import MASK, LabeledSequence, MaskedSample

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK, MASK)


class SequenceTooLongError(ValueError):
    pass


@runtime_checkable
class Encoder(Protocol):
    dim: int
    max_len: int
    mask_id: int
    pad_id: int

    def tokenize(self, sample: MaskedSample) -> tuple[list[int], list[int]]: ...

    def token_count(self, word: str) -> int: ...

    def split_pieces(self, text: str) -> list[str]: ...

    def __call__(self, ids: Tensor, attention_mask: Tensor) -> Tensor: ...


def sample_words(sample: MaskedSample) -> list[str]:
    if sample.words or not sample.slot_count:
        return list(sample.words)
    return [w for w in sample.rendered.split(" ") if w != MASK]


class ToyTokenizer:
    """Whole-word vocabulary with a per-character fallback.

    Known words are one piece; anything else is spelled out character by
    character. ``split_pieces`` always returns characters, which is what the
    subword-granularity mode slots between.
    """

    def __init__(self, vocab: Sequence[str], lowercase: bool = True):
        self.lowercase = lowercase
        self.itos = list(SPECIALS) + [v for v in vocab if v not in SPECIALS]
        self.stoi = {s: i for i, s in enumerate(self.itos)}
        self.pad_id, self.bos_id, self.eos_id, self.unk_id, self.mask_id = (self.stoi[s] for s in SPECIALS)

    @classmethod
    def build(cls, sequences: Iterable[LabeledSequence], min_count: int = 1, lowercase: bool = True) -> ToyTokenizer:
        counts: Counter[str] = Counter()
        chars: set[str] = set()
        for seq in sequences:
            for w in seq.words:
                w = w.lower() if lowercase else w
                counts[w] += 1
                chars.update(w)
        words = sorted(w for w, c in counts.items() if c >= min_count and len(w) > 1)
        return cls(sorted(chars) + words, lowercase=lowercase)

    def __len__(self) -> int:
        return len(self.itos)

    def pieces(self, word: str) -> list[str]:
        w = word.lower() if self.lowercase else word
        if w in self.stoi:
            return [w]
        return list(w)

    def split_pieces(self, text: str) -> list[str]:
        return [ch for ch in text if not ch.isspace()]

    def piece_ids(self, word: str) -> list[int]:
        return [self.stoi.get(p, self.unk_id) for p in self.pieces(word)]

    def token_count(self, word: str) -> int:
        return len(self.pieces(word)) + 1

    def encode_words(self, words: Sequence[str]) -> tuple[list[int], list[int]]:
        ids = [self.bos_id]
        slots = []
        for w in words:
            ids.extend(self.piece_ids(w))
            slots.append(len(ids))
            ids.append(self.mask_id)
        ids.append(self.eos_id)
        return ids, slots


class ToyEncoder(nn.Module):
    """A small randomly initialised transformer with the encoder contract."""

    kind = "toy"

    def __init__(
        self,
        tokenizer: ToyTokenizer,
        dim: int = 64,
        layers: int = 2,
        heads: int = 4,
        ff: int = 128,
        max_len: int = 128,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.tokenizer = tokenizer
        self.dim = dim
        self.max_len = max_len
        self.mask_id = tokenizer.mask_id
        self.pad_id = tokenizer.pad_id
        self.hparams = dict(dim=dim, layers=layers, heads=heads, ff=ff, max_len=max_len, dropout=dropout)
        self.embed = nn.Embedding(len(tokenizer), dim, padding_idx=tokenizer.pad_id)
        self.position = nn.Embedding(max_len, dim)
        layer = nn.TransformerEncoderLayer(dim, heads, ff, dropout, batch_first=True, activation="gelu")
        self.layers = nn.TransformerEncoder(layer, layers, enable_nested_tensor=False)
        self.norm = nn.LayerNorm(dim)

    def tokenize(self, sample: MaskedSample) -> tuple[list[int], list[int]]:
        return self.tokenizer.encode_words(sample_words(sample))

    def token_count(self, word: str) -> int:
        return self.tokenizer.token_count(word)

    def split_pieces(self, text: str) -> list[str]:
        return self.tokenizer.split_pieces(text)

    def forward(self, ids: Tensor, attention_mask: Tensor) -> Tensor:
        if ids.shape[1] > self.max_len:
            raise SequenceTooLongError(f"{ids.shape[1]} tokens exceed max_len {self.max_len}")
        positions = torch.arange(ids.shape[1], device=ids.device)
        x = self.embed(ids) + self.position(positions)[None]
        x = self.layers(x, src_key_padding_mask=~attention_mask.bool())
        return self.norm(x)


class HFEncoder(nn.Module):
    """Adapter for a pretrained Hugging Face encoder (e.g. XLM-R base).

    Words are tokenized one at a time so every slot gets exactly one mask
    sentinel; the checkpoint's own special tokens frame the sequence.
    """

    kind = "hf"

    def __init__(self, name_or_path: str | None = None, max_len: int = 256, model=None, tokenizer=None):
        super().__init__()
        if model is None or tokenizer is None:
            from transformers import AutoModel, AutoTokenizer

            tokenizer = tokenizer or AutoTokenizer.from_pretrained(name_or_path)
            model = model or AutoModel.from_pretrained(name_or_path)
        self.name_or_path = name_or_path
        self.model = model
        self.tokenizer = tokenizer
        self.dim = int(model.config.hidden_size)
        self.max_len = max_len
        self.mask_id = int(tokenizer.mask_token_id)
        self.pad_id = int(tokenizer.pad_token_id)
        self.bos_id = int(tokenizer.cls_token_id if tokenizer.cls_token_id is not None else tokenizer.bos_token_id)
        self.eos_id = int(tokenizer.sep_token_id if tokenizer.sep_token_id is not None else tokenizer.eos_token_id)
        self.hparams = dict(name_or_path=name_or_path, max_len=max_len)

    def _piece_ids(self, word: str) -> list[int]:
        return self.tokenizer.convert_tokens_to_ids(self.tokenizer.tokenize(word))

    def tokenize(self, sample: MaskedSample) -> tuple[list[int], list[int]]:
        ids = [self.bos_id]
        slots = []
        for w in sample_words(sample):
            ids.extend(self._piece_ids(w))
            slots.append(len(ids))
            ids.append(self.mask_id)
        ids.append(self.eos_id)
        return ids, slots

    def token_count(self, word: str) -> int:
        return len(self._piece_ids(word)) + 1

    def split_pieces(self, text: str) -> list[str]:
        out = []
        for piece in self.tokenizer.tokenize(text):
            piece = piece.replace("▁", "").replace("##", "")
            if piece:
                out.append(piece)
        return out

    def forward(self, ids: Tensor, attention_mask: Tensor) -> Tensor:
        if ids.shape[1] > self.max_len:
            raise SequenceTooLongError(f"{ids.shape[1]} tokens exceed max_len {self.max_len}")
        return self.model(input_ids=ids, attention_mask=attention_mask).last_hidden_state
