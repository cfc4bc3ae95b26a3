"""Twitter cleanup, Arabic orthographic normalization and word tokenization."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator

from .corpus_io import RawTweet

PLACEHOLDERS = frozenset({"URL", "USER", "HASH", "NUM"})

_URL_RE = re.compile(r"(?:https?://|www\.|t\.co/)\S*", re.IGNORECASE)
_USER_RE = re.compile(r"@\w+")
_HASH_RE = re.compile(r"#\w+")
_DIGITS_RE = re.compile(r"[0-9٠-٩]+")
_WS_RE = re.compile(r"\s+")

# harakat block U+064B..U+0652 and tatweel are deleted; Alef variants and Alef Maqsura are folded
_CHAR_MAP = {cp: None for cp in range(0x064B, 0x0653)}
_CHAR_MAP[0x0640] = None
_CHAR_MAP.update({ord(c): "ا" for c in "أإآٱ"})
_CHAR_MAP[0x0649] = "ي"

_MAX_PASSES = 64


def _replace_entities(text: str) -> str:
    text = _URL_RE.sub(" URL ", text)
    text = _USER_RE.sub(" USER ", text)
    text = _HASH_RE.sub(" HASH ", text)
    return _DIGITS_RE.sub(" NUM ", text)


def normalize(text: str) -> str:
    """Normalize one post.

    URLs, @mentions, #hashtags and digit runs become URL/USER/HASH/NUM,
    diacritics and tatweel are dropped, Alef forms fold to bare Alef and
    Alef Maqsura to Yeh, and whitespace is collapsed. Placeholders are
    emitted as standalone words. Total and idempotent.
    """
    text = text.translate(_CHAR_MAP)
    # each pass strictly removes a trigger character ('@', '#', digit, URL
    # prefix), so this terminates; the loop catches forms like "@#x"
    for _ in range(_MAX_PASSES):
        replaced = _replace_entities(text)
        if replaced == text:
            break
        text = replaced
    return _WS_RE.sub(" ", text).strip()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(normalized: str) -> list[str]:
    """Split on whitespace and detach each punctuation character as its own token."""
    tokens: list[str] = []
    for chunk in normalized.split():
        start = 0
        for i, ch in enumerate(chunk):
            if _is_punct(ch):
                if i > start:
                    tokens.append(chunk[start:i])
                tokens.append(ch)
                start = i + 1
        if start < len(chunk):
            tokens.append(chunk[start:])
    return tokens


@dataclass(frozen=True)
class NormalizedTweet:
    """A cleaned post. ``text`` is always ``" ".join(tokens)``."""

    id: str
    text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, tid: str, text: str) -> "NormalizedTweet":
        tokens = tuple(tokenize(normalize(text)))
        return cls(tid, " ".join(tokens), tokens)

    @classmethod
    def from_normalized(cls, tid: str, text: str) -> "NormalizedTweet":
        """Wrap text that already went through ``normalize_tweet`` (e.g. read back from disk)."""
        tokens = tuple(text.split())
        return cls(tid, " ".join(tokens), tokens)

    def raw(self) -> RawTweet:
        return RawTweet(self.id, self.text)


def normalize_tweet(tweet: RawTweet) -> NormalizedTweet:
    return NormalizedTweet.from_text(tweet.id, tweet.text)


def normalize_stream(tweets: Iterable[RawTweet]) -> Iterator[NormalizedTweet]:
    for tweet in tweets:
        yield normalize_tweet(tweet)
