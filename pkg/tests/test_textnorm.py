import re
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import malay_reference
from slotpunct.langs import UnsupportedLanguageError
from slotpunct.textnorm import (
    ALL_GLYPHS,
    FULL_GLYPHS,
    HALF_GLYPHS,
    MS_MAX,
    MappingTable,
    UnnormalizableTokenError,
    lowercase_if_latin,
    malay_cardinal,
    map_punctuation,
    normalize_malay,
    normalize_text,
    strip_to_asr_form,
)

LANGS = ("en", "zh", "ms")

raw_text = st.lists(
    st.sampled_from(list("abcXYZ 你好吗 ,.?!;:…'\"()-，。？！；：、¿¡7") + ["?!", "...", "  ", "3.5", "1,000"]),
    max_size=25,
).map("".join)


@pytest.mark.parametrize(
    "text, lang, expected",
    [
        ("betul?!", "ms", "betul?"),
        ("berhenti!", "ms", "berhenti."),
        ("你好。", "zh", "你好。"),
        ("a; b", "en", "a, b"),
        ("a: b", "en", "a, b"),
        ("Wait... what?!", "en", "Wait. what?"),
        ("你好，世界！", "zh", "你好，世界。"),
        ("真的？！", "zh", "真的？"),
        ("苹果、香蕉", "zh", "苹果，香蕉"),
        ('"Hello" (world)', "en", "Hello world"),
        ("it's well-known", "en", "it's well-known"),
        ("1,000 people", "en", "1000 people"),
        ("pi is 3.14", "en", "pi is 3 point 14"),
    ],
)
def test_map_punctuation_examples(text, lang, expected):
    assert map_punctuation(text, lang) == expected


def test_zh_uses_full_width_and_latin_uses_half_width():
    assert map_punctuation("好,吗?", "zh") == "好，吗？"
    assert map_punctuation("ok，fine。", "en") == "ok, fine."


def test_unsupported_language_rejected():
    with pytest.raises(UnsupportedLanguageError):
        map_punctuation("hi", "fr")
    with pytest.raises(UnsupportedLanguageError):
        normalize_text("hi", "de")


@settings(max_examples=300, deadline=None)
@given(raw_text, st.sampled_from(LANGS))
def test_mapping_is_idempotent(text, lang):
    once = map_punctuation(text, lang)
    assert map_punctuation(once, lang) == once


@settings(max_examples=300, deadline=None)
@given(raw_text, st.sampled_from(LANGS))
def test_mapping_closure(text, lang):
    out = map_punctuation(text, lang)
    allowed = set(FULL_GLYPHS if lang == "zh" else HALF_GLYPHS) | set("'-’")
    for ch in out:
        if unicodedata.category(ch).startswith("P"):
            assert ch in allowed, (text, out)


ASR_FORM = re.compile(r"^(?:[^\s" + re.escape(ALL_GLYPHS) + r"]+(?: [^\s" + re.escape(ALL_GLYPHS) + r"]+)*)?$")


@settings(max_examples=300, deadline=None)
@given(raw_text, st.sampled_from(LANGS))
def test_asr_form_shape(text, lang):
    out = strip_to_asr_form(text, lang)
    assert ASR_FORM.match(out), out
    assert out == out.lower()


@pytest.mark.parametrize(
    "text, lang, expected",
    [
        ("hello. this is josh, here to help you.", "en", "hello this is josh here to help you"),
        ("", "en", ""),
        ("你好吗？", "zh", "你好吗"),
        ("Hello,World", "en", "hello world"),
    ],
)
def test_strip_to_asr_form(text, lang, expected):
    assert strip_to_asr_form(text, lang) == expected


@pytest.mark.parametrize(
    "text, lang, expected",
    [("Hello World", "en", "hello world"), ("SAHAM Malaysia", "ms", "saham malaysia"), ("你好ABC", "zh", "你好ABC")],
)
def test_lowercase_if_latin(text, lang, expected):
    assert lowercase_if_latin(text, lang) == expected


@pytest.mark.parametrize("n, words", sorted(malay_reference().items()))
def test_malay_cardinal_matches_reference_list(n, words):
    assert malay_cardinal(n) == words


@pytest.mark.parametrize(
    "text, expected",
    [
        ("5 ringgit", "lima ringgit"),
        ("tahun 2020", "tahun dua ribu dua puluh"),
        ("RM50", "lima puluh ringgit"),
        ("RM1.50", "satu ringgit lima puluh sen"),
        ("$3 juta", "tiga juta dolar"),
        ("naik 50%", "naik lima puluh peratus"),
        ("3.14", "tiga perpuluhan satu empat"),
        ("1,000 orang", "seribu orang"),
        ("hubungi 012-345 6789", "hubungi kosong satu dua tiga empat lima enam tujuh lapan sembilan"),
        ("lawati www.abc.com.my sekarang", "lawati www dot abc dot com dot my sekarang"),
    ],
)
def test_normalize_malay(text, expected):
    assert normalize_malay(text) == expected


def test_normalize_malay_magnitude_limit():
    assert "trilion" in normalize_malay(str(MS_MAX - 1))
    with pytest.raises(UnnormalizableTokenError) as info:
        normalize_malay(f"jumlah {MS_MAX} ringgit")
    assert info.value.span == (7, 7 + len(str(MS_MAX)))


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("0123456789 ,.%$RMab")), max_size=30))
def test_normalize_malay_leaves_no_digits(text):
    try:
        out = normalize_malay(text)
    except UnnormalizableTokenError:
        return
    assert not re.search(r"[0-9]", out), out


def test_mapping_table_override_file(tmp_path):
    f = tmp_path / "table.tsv"
    f.write_text("# comment\n!\t?\n~\t\n", encoding="utf-8")
    table = MappingTable.from_file(f)
    assert map_punctuation("wow! ok~", "en", table) == "wow? ok"
    assert [len(src) for src, _ in table.entries] == sorted((len(s) for s, _ in table.entries), reverse=True)


def test_mapping_table_rejects_non_glyph_target():
    with pytest.raises(ValueError):
        MappingTable((("!", "!"),))


def test_normalize_text_zh_drops_spaces_and_lowercases_latin():
    assert normalize_text("你好 ABC。", "zh") == "你好abc。"
