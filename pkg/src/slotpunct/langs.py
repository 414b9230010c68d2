from __future__ import annotations

from enum import Enum


class UnsupportedLanguageError(ValueError):
    pass


class Lang(str, Enum):
    EN = "en"
    ZH = "zh"
    MS = "ms"

    def __str__(self) -> str:
        return self.value


def as_lang(lang: str | Lang) -> Lang:
    if isinstance(lang, Lang):
        return lang
    try:
        return Lang(str(lang).lower())
    except ValueError:
        raise UnsupportedLanguageError(f"unsupported language {lang!r}; expected one of en, zh, ms") from None


def is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0x20000 <= cp <= 0x2A6DF
        or 0xF900 <= cp <= 0xFAFF
        or 0x3040 <= cp <= 0x30FF
    )
