from slotpunct.model.checkpoint import PunctuationModel, build_toy_model, load_checkpoint, save_checkpoint
from slotpunct.model.core import (
    ClassifierHead,
    NonFiniteLossError,
    TraceRow,
    TrainConfig,
    TrainResult,
    forward,
    loss,
    lr_at,
    predict,
    predict_sequences,
    train,
)
from slotpunct.model.encoders import Encoder, HFEncoder, SequenceTooLongError, ToyEncoder, ToyTokenizer
from slotpunct.model.radam import RAdam

__all__ = [
    "ClassifierHead",
    "Encoder",
    "HFEncoder",
    "NonFiniteLossError",
    "PunctuationModel",
    "RAdam",
    "SequenceTooLongError",
    "ToyEncoder",
    "ToyTokenizer",
    "TraceRow",
    "TrainConfig",
    "TrainResult",
    "build_toy_model",
    "forward",
    "load_checkpoint",
    "loss",
    "lr_at",
    "predict",
    "predict_sequences",
    "save_checkpoint",
    "train",
]
