import re
import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yaharvest.corpus_io import RawTweet
from yaharvest.normalizer import (
    PLACEHOLDERS,
    NormalizedTweet,
    normalize,
    normalize_stream,
    tokenize,
)

GOLDEN = [
    # entity placeholders
    ("@sami شاهد https://t.co/x #قدس 123 يا كلب", "USER شاهد URL HASH NUM يا كلب"),
    ("http://example.com/a?b=1", "URL"),
    ("HTTPS://X.COM/Path", "URL"),
    ("see www.site.com now", "see URL now"),
    ("t.co/abc123", "URL"),
    ("https://x.com/#frag", "URL"),
    ("@user_1 hi", "USER hi"),
    ("@user123", "USER"),
    ("@@bob", "@ USER"),
    ("#وسم_جميل", "HASH"),
    ("#123", "HASH"),
    ("٢٠٢٠ عام", "NUM عام"),
    ("abc123def", "abc NUM def"),
    ("1 2 3", "NUM NUM NUM"),
    # diacritics and tatweel
    ("أَحمد ذهب إلى المستشفى", "احمد ذهب الي المستشفي"),
    ("كَتَبَ", "كتب"),
    ("مُحَمَّدٌ", "محمد"),
    ("سْلامٍ", "سلام"),
    ("كِتَابًا", "كتابا"),
    ("جمـــيل", "جميل"),
    # Alef and Yeh folding
    ("إسلام آمن ٱلله", "اسلام امن الله"),
    ("مستشفى", "مستشفي"),
    # untouched letters
    ("مدرسة مؤمن", "مدرسة مؤمن"),
    # whitespace
    ("  يا   كلب \t\n ", "يا كلب"),
    ("", ""),
    ("USER URL", "USER URL"),
    ("يا 😀", "يا 😀"),
]


@pytest.mark.parametrize("raw,expected", GOLDEN)
def test_golden(raw, expected):
    assert normalize(raw) == expected


def test_golden_suite_size():
    assert len(GOLDEN) >= 20


@pytest.mark.parametrize(
    "text,tokens",
    [
        ("يا كلب!", ["يا", "كلب", "!"]),
        ("", []),
        ("USER يا كلب", ["USER", "يا", "كلب"]),
        ("؟؟ لماذا،", ["؟", "؟", "لماذا", "،"]),
        ("a.b", ["a", ".", "b"]),
    ],
)
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


# fuzz over a mix of Arabic, digits, entity prefixes, whitespace and anything else
_interesting = st.sampled_from(
    list("@#:/.wht ٠٩09\t\n ــًٌٍَُِّْأإآٱىيا") + ["http://", "https://", "www.", "t.co/"]
)
fuzz = st.lists(st.one_of(_interesting, st.characters()), max_size=40).map("".join)


@settings(max_examples=1000)
@given(fuzz)
def test_idempotent(text):
    once = normalize(text)
    assert normalize(once) == once


@settings(max_examples=300)
@given(fuzz)
def test_postcondition_audit(text):
    out = normalize(text)
    assert not re.search(r"https?://|www\.|t\.co/", out, re.IGNORECASE)
    assert not re.search(r"[@#][^\W\d_]", out)
    assert not re.search(r"[0-9٠-٩]", out)
    assert not any(0x064B <= ord(c) <= 0x0652 or c == "ـ" for c in out)
    assert not any(c in "أإآٱى" for c in out)
    assert out == out.strip() and "  " not in out
    assert not re.search(r"\s", out.replace(" ", ""))


@settings(max_examples=300)
@given(fuzz)
def test_no_foreign_characters(text):
    allowed = set(text) | set("".join(PLACEHOLDERS)) | {" ", "ا", "ي"}
    assert set(normalize(text)) <= allowed


@settings(max_examples=300)
@given(fuzz)
def test_token_join(text):
    t = NormalizedTweet.from_text("x", text)
    assert t.text == " ".join(t.tokens)
    norm = normalize(text)
    if not any(unicodedata.category(c).startswith("P") for c in norm):
        assert " ".join(tokenize(norm)) == norm


def test_normalized_tweet_roundtrip():
    t = NormalizedTweet.from_text("9", "يا كلب!! https://t.co/1")
    assert t.tokens == ("يا", "كلب", "!", "!", "URL")
    assert NormalizedTweet.from_normalized("9", t.text) == t
    assert t.raw() == RawTweet("9", "يا كلب ! ! URL")


def test_stream_is_lazy():
    def gen():
        yield RawTweet("1", "@a")
        raise AssertionError("read too far")

    it = normalize_stream(gen())
    assert next(it).text == "USER"
