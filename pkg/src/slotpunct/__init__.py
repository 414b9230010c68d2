"""Punctuation restoration for unpunctuated transcripts as mask slot filling."""

from slotpunct.langs import Lang, UnsupportedLanguageError
from slotpunct.slotmask import MASK, LabeledSequence, PunctClass, apply_labels, extract_labels

__version__ = "0.1.0"

__all__ = [
    "MASK",
    "LabeledSequence",
    "Lang",
    "PunctClass",
    "UnsupportedLanguageError",
    "apply_labels",
    "extract_labels",
]
