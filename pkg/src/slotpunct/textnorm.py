"""Text normalization into the four-class punctuation inventory.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from slotpunct.langs import Lang, as_lang

HALF_GLYPHS = ",.?"
FULL_GLYPHS = "，。？"
ALL_GLYPHS = HALF_GLYPHS + FULL_GLYPHS
_TO_FULL = str.maketrans(HALF_GLYPHS, FULL_GLYPHS)
_TO_HALF = str.maketrans(FULL_GLYPHS, HALF_GLYPHS)

_ALLOWED_TARGETS = frozenset(ALL_GLYPHS) | {""}

DEFAULT_ENTRIES: tuple[tuple[str, str], ...] = (
    ("？！", "？"),
    ("！？", "？"),
    ("?!", "?"),
    ("!?", "?"),
    ("……", "。"),
    ("...", "."),
    ("…", "."),
    ("!", "."),
    ("！", "。"),
    (";", ","),
    (":", ","),
    ("；", "，"),
    ("：", "，"),
    ("、", "，"),
    ("¿", ""),
    ("¡", ""),
)

# Punctuation kept verbatim; apostrophes and hyphens only inside words.
_KEEP = frozenset("%&@#*/\\_")
_INTRAWORD = frozenset("'-’")


class UnnormalizableTokenError(ValueError):
    """Raised when a token cannot be verbalized."""

    def __init__(self, token: str, span: tuple[int, int], reason: str):
        self.token = token
        self.span = span
        super().__init__(f"cannot normalize {token!r} at {span[0]}:{span[1]}: {reason}")


@dataclass(frozen=True)
class MappingTable:
    """Ordered source -> target glyph rewrites, applied longest match first."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for src, dst in self.entries:
            if not src:
                raise ValueError("empty source in mapping table")
            if dst not in _ALLOWED_TARGETS:
                raise ValueError(f"mapping target {dst!r} for {src!r} is not a punctuation-class glyph")
        ordered = tuple(sorted(self.entries, key=lambda e: -len(e[0])))
        object.__setattr__(self, "entries", ordered)

    @classmethod
    def default(cls) -> MappingTable:
        return cls(DEFAULT_ENTRIES)

    @classmethod
    def from_file(cls, path: str | Path, base: MappingTable | None = None) -> MappingTable:
        """Load a two-column ``source<TAB>target`` override file.

        Entries override ``base`` (the compiled-in defaults when omitted). An
        empty or missing target column means deletion. ``#`` starts a comment.
        """
        merged = dict((base or cls.default()).entries)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                src, _, dst = line.partition("\t")
                if not src:
                    raise ValueError(f"{path}:{lineno}: missing source column")
                merged[src] = dst.strip()
        return cls(tuple(merged.items()))

    @property
    def pattern(self) -> re.Pattern:
        return _compile(self.entries)


_PATTERN_CACHE: dict[tuple, re.Pattern] = {}


def _compile(entries: tuple[tuple[str, str], ...]) -> re.Pattern:
    pat = _PATTERN_CACHE.get(entries)
    if pat is None:
        pat = re.compile("|".join(re.escape(src) for src, _ in entries))
        _PATTERN_CACHE[entries] = pat
    return pat


_DEFAULT_TABLE = MappingTable.default()

_DIGIT_GROUP_COMMA = re.compile(r"(?<=\d),(?=\d{3}(?!\d))")
_DECIMAL_POINT = re.compile(r"(?<=\d)\.(?=\d)")
_DECIMAL_WORD = {Lang.EN: " point ", Lang.MS: " perpuluhan ", Lang.ZH: "点"}
_SPACE_RUN = re.compile(r"\s+")
_SPACE_BEFORE_GLYPH = re.compile(r"\s+(?=[" + ALL_GLYPHS + "])")
_GLYPH_RUN = re.compile(r"([" + ALL_GLYPHS + r"])[" + ALL_GLYPHS + "]+")
_LEADING = re.compile(r"^[\s" + ALL_GLYPHS + "]+")
_GLYPH_THEN_CHAR = re.compile(r"([" + ALL_GLYPHS + r"])(?=\S)")


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def _drop_other_punctuation(text: str) -> str:
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch in ALL_GLYPHS or ch in _KEEP:
            out.append(ch)
            continue
        if not unicodedata.category(ch).startswith("P"):
            out.append(ch)
            continue
        if ch in _INTRAWORD and 0 < i < n - 1 and _is_word_char(text[i - 1]) and _is_word_char(text[i + 1]):
            out.append(ch)
            continue
        # deleted; keep a space so neighbouring words do not fuse
        out.append(" ")
    return "".join(out)


def map_punctuation(text: str, lang: str | Lang, table: MappingTable | None = None) -> str:
    """Rewrite punctuation into the comma / period / question inventory.

    Latin-script languages get half-width glyphs, Mandarin full-width ones.
    Other punctuation is dropped, runs of class glyphs collapse to their first
    glyph and leading glyphs are removed. The result is a fixed point.
    """
    lang = as_lang(lang)
    table = table or _DEFAULT_TABLE
    mapping = dict(table.entries)

    text = _DIGIT_GROUP_COMMA.sub("", text)
    text = _DECIMAL_POINT.sub(_DECIMAL_WORD[lang], text)
    text = table.pattern.sub(lambda m: mapping[m.group(0)], text)
    text = _drop_other_punctuation(text)
    text = text.translate(_TO_FULL if lang is Lang.ZH else _TO_HALF)

    text = _SPACE_RUN.sub(" ", text).strip()
    text = _SPACE_BEFORE_GLYPH.sub("", text)
    text = _GLYPH_RUN.sub(r"\1", text)
    text = _LEADING.sub("", text)
    if lang is not Lang.ZH:
        text = _GLYPH_THEN_CHAR.sub(r"\1 ", text)
    return text


def lowercase_if_latin(text: str, lang: str | Lang) -> str:
    lang = as_lang(lang)
    if lang is Lang.ZH:
        return text
    return text.lower()


def strip_to_asr_form(text: str, lang: str | Lang) -> str:
    """Simulate an ASR transcript: no punctuation, lower case, single spaces."""
    lang = as_lang(lang)
    text = map_punctuation(text, lang)
    text = re.sub("[" + ALL_GLYPHS + "]", " " if lang is not Lang.ZH else "", text)
    # str.lower leaves CJK untouched, so embedded Latin in zh text folds too
    text = text.lower()
    return _SPACE_RUN.sub(" ", text).strip()


def normalize_text(text: str, lang: str | Lang, table: MappingTable | None = None) -> str:
    """Full training-side normalization for one document.

    Malay is verbalized first, then punctuation is mapped and text lower-cased.
    Mandarin loses all whitespace, since word boundaries are re-derived by
    segmentation.
    """
    lang = as_lang(lang)
    if lang is Lang.MS:
        text = normalize_malay(text)
    text = map_punctuation(text, lang, table)
    if lang is Lang.ZH:
        return _SPACE_RUN.sub("", text.lower())
    return lowercase_if_latin(text, lang)


# --- Malay verbalization ----------------------------------------------------

_MS_ONES = ["kosong", "satu", "dua", "tiga", "empat", "lima", "enam", "tujuh", "lapan", "sembilan"]
_MS_SCALES = [(10**12, "trilion"), (10**9, "bilion"), (10**6, "juta")]
MS_MAX = 10**15


def malay_cardinal(n: int) -> str:
    """Spell a non-negative integer below 10**15 in Malay."""
    if n < 0:
        return "negatif " + malay_cardinal(-n)
    if n >= MS_MAX:
        raise ValueError(f"{n} exceeds the supported magnitude")
    if n < 10:
        return _MS_ONES[n]
    if n == 10:
        return "sepuluh"
    if n == 11:
        return "sebelas"
    if n < 20:
        return f"{_MS_ONES[n - 10]} belas"
    if n < 100:
        tens, rest = divmod(n, 10)
        head = f"{_MS_ONES[tens]} puluh"
        return head if rest == 0 else f"{head} {malay_cardinal(rest)}"
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        head = "seratus" if hundreds == 1 else f"{_MS_ONES[hundreds]} ratus"
        return head if rest == 0 else f"{head} {malay_cardinal(rest)}"
    if n < 10**6:
        thousands, rest = divmod(n, 1000)
        head = "seribu" if thousands == 1 else f"{malay_cardinal(thousands)} ribu"
        return head if rest == 0 else f"{head} {malay_cardinal(rest)}"
    for scale, word in _MS_SCALES:
        if n >= scale:
            count, rest = divmod(n, scale)
            head = f"{malay_cardinal(count)} {word}"
            return head if rest == 0 else f"{head} {malay_cardinal(rest)}"
    raise AssertionError("unreachable")


def malay_digits(digits: str) -> str:
    return " ".join("tambah" if d == "+" else _MS_ONES[int(d)] for d in digits if d == "+" or d.isdigit())


_CURRENCY_PREFIX = {"RM": "ringgit", "US$": "dolar amerika", "S$": "dolar singapura", "$": "dolar", "€": "euro", "£": "paun"}
_CENTS_WORD = {"ringgit": "sen", "dolar": "sen", "dolar amerika": "sen", "dolar singapura": "sen"}
_MAGNITUDE = r"(?:\s?(ribu|juta|bilion|trilion))?"
_NUM = r"\d[\d,]*(?:\.\d+)?"

_URL = re.compile(
    r"(?:https?://)?(?:www\.)?(?:[a-z0-9-]+\.)+(?:com|my|net|org|gov|edu|io|co|info|biz|asia|sg)\b(?:[/?#]\S*)?",
    re.IGNORECASE,
)
_PHONE = re.compile(r"(?<![\w.+])\+?(?:60|0)\d{1,2}[- ]?\d{3,4}[- ]?\d{4}(?![\w.])")
_CURRENCY = re.compile(
    r"(?P<cur>RM|US\$|S\$|\$|€|£)\s?(?P<num>" + _NUM + r")" + _MAGNITUDE.replace("(ribu", "(?P<mag>ribu"),
)
_PERCENT = re.compile(r"(?P<num>" + _NUM + r")\s?%")
_NUMBER = re.compile(_NUM)


def _number_token(token: str, span: tuple[int, int]) -> str:
    raw = token.rstrip(",")
    whole, _, frac = raw.replace(",", "").partition(".")
    if len(whole) > 1 and whole.startswith("0") and not frac:
        return malay_digits(whole)
    value = int(whole)
    if value >= MS_MAX:
        raise UnnormalizableTokenError(token, span, "number of 10**15 or more")
    words = malay_cardinal(value)
    if frac:
        words += " perpuluhan " + malay_digits(frac)
    return words


def _verbalize_url(match: re.Match) -> str:
    url = match.group(0)
    tail = ""
    while url and url[-1] in ".,?!)":
        tail = url[-1] + tail
        url = url[:-1]
    host = re.sub(r"^https?://", "", url, flags=re.IGNORECASE)
    host = re.split(r"[/?#]", host, maxsplit=1)[0]
    parts = []
    for label in host.lower().split("."):
        spoken = re.sub(r"\d+", lambda m: " " + malay_digits(m.group(0)) + " ", label)
        parts.append(" ".join(spoken.split()))
    return " dot ".join(parts) + tail


def normalize_malay(text: str) -> str:
    """Verbalize numbers, currency, percentages, URLs and phone numbers.

    >>> normalize_malay("RM50")
    'lima puluh ringgit'
    """
    text = _URL.sub(_verbalize_url, text)
    text = _PHONE.sub(lambda m: f" {malay_digits(m.group(0))} ", text)

    def currency(m: re.Match) -> str:
        unit = _CURRENCY_PREFIX[m.group("cur")]
        num = m.group("num").rstrip(",")
        mag = m.group("mag")
        span = m.span()
        if mag:
            return f"{_number_token(num, span)} {mag} {unit}"
        whole, _, frac = num.replace(",", "").partition(".")
        words = f"{_number_token(whole, span)} {unit}"
        if frac and unit in _CENTS_WORD and len(frac) <= 2:
            cents = int(frac.ljust(2, "0"))
            if cents:
                words += f" {malay_cardinal(cents)} {_CENTS_WORD[unit]}"
        elif frac:
            words = f"{_number_token(num, span)} {unit}"
        return words

    text = _CURRENCY.sub(currency, text)
    text = _PERCENT.sub(lambda m: f"{_number_token(m.group('num'), m.span())} peratus", text)

    def number(m: re.Match) -> str:
        token = m.group(0)
        trail = "," if token.endswith(",") else ""
        words = _number_token(token, m.span())
        start, end = m.span()
        before = " " if start > 0 and text[start - 1].isalpha() else ""
        after = " " if end < len(text) and text[end].isalpha() else ""
        return before + words + trail + after

    return _SPACE_RUN.sub(" ", _NUMBER.sub(number, text)).strip()
