"""Classifier head, slot-level forward/loss/predict and the training loop."""

from __future__ import annotations

import copy
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
import torch.nn.functional as F
from torch import Tensor, nn

from slotpunct.dataset import derive_seed
from slotpunct.eval import score
from slotpunct.model.encoders import Encoder, SequenceTooLongError
from slotpunct.model.radam import RAdam
from slotpunct.slotmask import LabeledSequence, MaskedSample, PunctClass, build_masked_input

log = logging.getLogger(__name__)

N_CLASSES = len(PunctClass)
HEAD_HIDDEN = 1568

_ACTIVATIONS = {"tanh": nn.Tanh, "relu": nn.ReLU, "gelu": nn.GELU, "identity": nn.Identity}


class NonFiniteLossError(RuntimeError):
    pass


class ClassifierHead(nn.Module):
    """Two affine layers shared by every mask position."""

    def __init__(self, dim: int, hidden: int = HEAD_HIDDEN, n_classes: int = N_CLASSES, activation: str = "tanh"):
        super().__init__()
        self.hparams = dict(dim=dim, hidden=hidden, n_classes=n_classes, activation=activation)
        self.layer1 = nn.Linear(dim, hidden)
        self.act = _ACTIVATIONS[activation]()
        self.layer2 = nn.Linear(hidden, n_classes)

    def forward(self, h: Tensor) -> Tensor:
        return self.layer2(self.act(self.layer1(h)))


@dataclass
class TrainConfig:
    lr_head: float = 1e-4
    lr_encoder: float = 3e-5
    optimizer: str = "radam"
    warmup_steps: int = 300
    batch_size: int = 4
    seq_len: int = 256
    iterations: int = 9000
    seed: int = 0
    eval_every: int = 500
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        self.betas = tuple(self.betas)
        for name in ("lr_head", "lr_encoder", "batch_size", "seq_len", "eval_every"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.warmup_steps < 0 or self.iterations < 0:
            raise ValueError("warmup_steps and iterations must be non-negative")
        if self.lr_encoder > self.lr_head:
            raise ValueError("lr_encoder must not exceed lr_head")
        if self.optimizer != "radam":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TrainConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def lr_at(step: int, base_lr: float, warmup_steps: int) -> float:
    """Linear warmup from 0 to ``base_lr`` over ``warmup_steps``, then flat."""
    if step < 0:
        raise ValueError("step must be >= 0")
    if warmup_steps <= 0 or step >= warmup_steps:
        return base_lr
    return base_lr * step / warmup_steps


# --- batching ---------------------------------------------------------------


@dataclass
class Batch:
    ids: Tensor
    attention_mask: Tensor
    slot_rows: Tensor
    slot_cols: Tensor
    labels: Tensor
    slot_counts: list[int] = field(default_factory=list)


def collate(encoded: Sequence[tuple[list[int], list[int], list[int]]], pad_id: int) -> Batch:
    width = max((len(ids) for ids, _, _ in encoded), default=0)
    ids = torch.full((len(encoded), width), pad_id, dtype=torch.long)
    attn = torch.zeros((len(encoded), width), dtype=torch.long)
    rows, cols, labels, counts = [], [], [], []
    for b, (tok, slots, labs) in enumerate(encoded):
        ids[b, : len(tok)] = torch.as_tensor(tok, dtype=torch.long)
        attn[b, : len(tok)] = 1
        rows.extend([b] * len(slots))
        cols.extend(slots)
        labels.extend(labs)
        counts.append(len(slots))
    return Batch(
        ids,
        attn,
        torch.as_tensor(rows, dtype=torch.long),
        torch.as_tensor(cols, dtype=torch.long),
        torch.as_tensor(labels, dtype=torch.long),
        counts,
    )


def encode_sequence(seq: LabeledSequence, encoder: Encoder) -> tuple[list[int], list[int], list[int]]:
    ids, slots = encoder.tokenize(build_masked_input(seq))
    if len(ids) > encoder.max_len:
        raise SequenceTooLongError(f"sequence of {len(ids)} tokens exceeds max_len {encoder.max_len}")
    return ids, slots, [int(x) for x in seq.labels]


def slot_logits_from_hidden(hidden: Tensor, rows: Tensor, cols: Tensor, head: nn.Module) -> Tensor:
    """Classify only the mask positions; everything else is never read."""
    return head(hidden[rows, cols])


def batch_logits(batch: Batch, encoder: Encoder, head: nn.Module) -> Tensor:
    if batch.slot_rows.numel() == 0:
        return torch.zeros((0, N_CLASSES))
    hidden = encoder(batch.ids, batch.attention_mask)
    return slot_logits_from_hidden(hidden, batch.slot_rows, batch.slot_cols, head)


# --- single-sample API ------------------------------------------------------


def forward(sample: MaskedSample, encoder: Encoder, head: nn.Module) -> np.ndarray:
    """Per-slot class distributions, shape ``[slot_count, 4]``."""
    if sample.slot_count == 0:
        return np.zeros((0, N_CLASSES))
    ids, slots = encoder.tokenize(sample)
    if len(ids) > encoder.max_len:
        raise SequenceTooLongError(f"sample of {len(ids)} tokens exceeds max_len {encoder.max_len}")
    batch = collate([(ids, slots, [0] * len(slots))], encoder.pad_id)
    was_training = encoder.training, head.training
    encoder.eval()
    head.eval()
    try:
        with torch.no_grad():
            probs = torch.softmax(batch_logits(batch, encoder, head).double(), dim=-1)
    finally:
        encoder.train(was_training[0])
        head.train(was_training[1])
    return probs.numpy()


def loss(dists, labels: Sequence[PunctClass | int]) -> float:
    """Mean negative log-likelihood of the true class over the slots."""
    dists = np.asarray(dists, dtype=np.float64).reshape(-1, N_CLASSES)
    if len(dists) != len(labels):
        raise ValueError(f"{len(dists)} distributions but {len(labels)} labels")
    if not len(labels):
        return 0.0
    idx = np.asarray([int(x) for x in labels])
    picked = dists[np.arange(len(idx)), idx]
    with np.errstate(divide="ignore"):
        return float(-np.mean(np.log(picked)))


def argmax_labels(dists: np.ndarray) -> list[PunctClass]:
    # np.argmax returns the first maximum, i.e. ties resolve O < C < P < Q
    return [PunctClass(int(i)) for i in np.argmax(dists, axis=1)] if len(dists) else []


def predict(sample: MaskedSample, encoder: Encoder, head: nn.Module) -> list[PunctClass]:
    return argmax_labels(forward(sample, encoder, head))


@torch.no_grad()
def predict_sequences(
    sequences: Sequence[LabeledSequence], encoder: Encoder, head: nn.Module, batch_size: int = 32
) -> list[LabeledSequence]:
    """Predict labels for every sequence; words are carried over unchanged."""
    was_training = encoder.training, head.training
    encoder.eval()
    head.eval()
    out: list[LabeledSequence] = []
    try:
        for start in range(0, len(sequences), batch_size):
            chunk = sequences[start : start + batch_size]
            batch = collate([encode_sequence(s, encoder) for s in chunk], encoder.pad_id)
            logits = batch_logits(batch, encoder, head).double()
            labels = argmax_labels(logits.numpy())
            k = 0
            for seq, n in zip(chunk, batch.slot_counts):
                out.append(LabeledSequence(list(seq.words), labels[k : k + n], seq.lang))
                k += n
    finally:
        encoder.train(was_training[0])
        head.train(was_training[1])
    return out


# --- training ---------------------------------------------------------------


@dataclass
class TraceRow:
    step: int
    loss: float
    val_f1: float


@dataclass
class TrainResult:
    encoder: Encoder
    head: ClassifierHead
    trace: list[TraceRow]
    best_step: int
    best_f1: float


def train(
    samples: Sequence[LabeledSequence],
    config: TrainConfig,
    encoder: Encoder,
    head: ClassifierHead,
    valid: Sequence[LabeledSequence] | None = None,
) -> TrainResult:
    """Fine-tune encoder and head with rectified Adam and linear warmup.

    Two parameter groups run at ``lr_head`` and ``lr_encoder``. Validation
    overall F1 is logged every ``eval_every`` steps, and the best-scoring
    parameters are restored before returning.
    """
    encoded = [encode_sequence(s, encoder) for s in samples if len(s.words)]
    if not encoded:
        raise ValueError("empty training stream")
    if config.iterations == 0:
        return TrainResult(encoder, head, [], 0, math.nan)

    torch.manual_seed(derive_seed(config.seed, "train-torch"))
    rng = np.random.default_rng(derive_seed(config.seed, "batches"))
    optimizer = RAdam(
        [
            {"params": list(head.parameters()), "lr": 0.0, "base_lr": config.lr_head},
            {"params": list(encoder.parameters()), "lr": 0.0, "base_lr": config.lr_encoder},
        ],
        betas=config.betas,
        eps=config.eps,
        weight_decay=config.weight_decay,
    )
    encoder.train()
    head.train()

    trace: list[TraceRow] = []
    best_f1, best_step, best_state = -1.0, 0, None
    order = rng.permutation(len(encoded))
    cursor = 0
    running, n_running = 0.0, 0
    for step in range(1, config.iterations + 1):
        if cursor + config.batch_size > len(order):
            order = rng.permutation(len(encoded))
            cursor = 0
        picked = order[cursor : cursor + config.batch_size]
        cursor += config.batch_size
        batch = collate([encoded[i] for i in picked], encoder.pad_id)

        for group in optimizer.param_groups:
            group["lr"] = lr_at(step, group["base_lr"], config.warmup_steps)
        logits = batch_logits(batch, encoder, head)
        batch_loss = F.cross_entropy(logits, batch.labels)
        if not torch.isfinite(batch_loss):
            raise NonFiniteLossError(
                f"non-finite loss {batch_loss.item()} at step {step} "
                f"(lr_head={optimizer.param_groups[0]['lr']:.3g}, max |logit|={logits.abs().max().item():.3g})"
            )
        optimizer.zero_grad()
        batch_loss.backward()
        optimizer.step()
        running += batch_loss.item()
        n_running += 1

        if step % config.eval_every == 0 or step == config.iterations:
            val_f1 = math.nan
            if valid:
                val_f1 = score(predict_sequences(valid, encoder, head), valid).overall.f1
            trace.append(TraceRow(step, running / n_running, val_f1))
            log.info("step %d loss %.4f val_f1 %.4f", step, running / n_running, val_f1)
            running, n_running = 0.0, 0
            metric = val_f1 if valid else step
            if metric > best_f1:
                best_f1, best_step = metric, step
                best_state = (copy.deepcopy(encoder.state_dict()), copy.deepcopy(head.state_dict()))

    if best_state is not None:
        encoder.load_state_dict(best_state[0])
        head.load_state_dict(best_state[1])
    encoder.eval()
    head.eval()
    return TrainResult(encoder, head, trace, best_step, best_f1 if valid else math.nan)
