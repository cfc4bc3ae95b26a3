"""Streaming JSONL readers and labeled TSV datasets."""

from __future__ import annotations

import enum
import hashlib
import io
import json
import logging
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError, ParseError, ValidationError

log = logging.getLogger(__name__)

TSV_HEADER = ("id", "text", "label")


class Task(str, enum.Enum):
    OFFENSIVE = "offensive"
    HATE_SPEECH = "hate_speech"
    SENTIMENT = "sentiment"
    EMOTION = "emotion"

    @classmethod
    def parse(cls, value: "Task | str") -> "Task":
        if isinstance(value, Task):
            return value
        aliases = {"off": cls.OFFENSIVE, "hs": cls.HATE_SPEECH, "hate": cls.HATE_SPEECH}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            allowed = ", ".join(t.value for t in cls)
            raise ValidationError(f"unknown task {value!r} (allowed: {allowed})") from None


# Ordered label sets. Emotion labels are open: whatever the data carries.
LABEL_SETS: dict[Task, tuple[str, ...]] = {
    Task.OFFENSIVE: ("NOT_OFF", "OFF"),
    Task.HATE_SPEECH: ("NOT_HS", "HS"),
    Task.SENTIMENT: ("NEG", "POS"),
}
POSITIVE_LABEL = {Task.OFFENSIVE: "OFF", Task.HATE_SPEECH: "HS"}
NEGATIVE_LABEL = {Task.OFFENSIVE: "NOT_OFF", Task.HATE_SPEECH: "NOT_HS"}


def task_for_label(label: str) -> Task | None:
    for task, labels in LABEL_SETS.items():
        if label in labels:
            return task
    return None


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str


@dataclass
class Dataset:
    """Labeled records for one task. ``counts`` is always recomputed from ``records``."""

    task: Task
    records: list[tuple[RawTweet, str]] = field(default_factory=list)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.task = Task.parse(self.task)

    @property
    def label_set(self) -> tuple[str, ...]:
        if self.task in LABEL_SETS:
            return LABEL_SETS[self.task]
        return tuple(sorted({label for _, label in self.records}))

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(label for _, label in self.records)
        ordered = {label: tally.get(label, 0) for label in self.label_set}
        for label in sorted(tally):
            ordered.setdefault(label, tally[label])
        return ordered

    @property
    def tweets(self) -> list[RawTweet]:
        return [t for t, _ in self.records]

    @property
    def ids(self) -> list[str]:
        return [t.id for t, _ in self.records]

    @property
    def texts(self) -> list[str]:
        return [t.text for t, _ in self.records]

    @property
    def labels(self) -> list[str]:
        return [label for _, label in self.records]

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        allowed = LABEL_SETS.get(self.task)
        seen: dict[str, int] = {}
        for i, (tweet, label) in enumerate(self.records):
            if allowed is not None and label not in allowed:
                raise DataError(
                    f"record {i} (id {tweet.id!r}): unknown label {label!r}; allowed: {', '.join(allowed)}"
                )
            if not label:
                raise DataError(f"record {i} (id {tweet.id!r}): empty label")
            if tweet.id in seen:
                raise DataError(f"duplicate id {tweet.id!r} at records {seen[tweet.id]} and {i}")
            seen[tweet.id] = i


class JsonlReader:
    """Iterate RawTweets from a JSON-Lines file.

    ``on_error`` is ``"fail"`` (raise on the first malformed line) or
    ``"skip"`` (count it in ``skipped`` and move on). Duplicate ids always
    raise. ``line_of`` maps each id seen so far to its 1-based line number.
    """

    def __init__(self, path: str | os.PathLike, on_error: str = "fail"):
        if on_error not in ("fail", "skip"):
            raise ValidationError(f"on_error must be 'fail' or 'skip', got {on_error!r}")
        self.path = Path(path)
        self.on_error = on_error
        self.skipped = 0
        self.count = 0
        self.line_of: dict[str, int] = {}

    def _bad(self, lineno: int, message: str) -> None:
        if self.on_error == "fail":
            raise ParseError(self.path, lineno, message)
        self.skipped += 1
        log.warning("%s:%d: skipped (%s)", self.path, lineno, message)

    def __iter__(self) -> Iterator[RawTweet]:
        try:
            fh = open(self.path, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read {self.path}: {exc.strerror or exc}") from exc
        with fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    self._bad(lineno, f"malformed JSON ({exc.msg})")
                    continue
                if not isinstance(obj, dict):
                    self._bad(lineno, "line is not a JSON object")
                    continue
                tid, text = obj.get("id"), obj.get("text")
                if not isinstance(tid, str) or not tid:
                    self._bad(lineno, "field 'id' missing or not a non-empty string")
                    continue
                if not isinstance(text, str):
                    self._bad(lineno, "field 'text' missing or not a string")
                    continue
                if tid in self.line_of:
                    raise ParseError(
                        self.path, lineno, f"duplicate id {tid!r} (first seen on line {self.line_of[tid]})"
                    )
                self.line_of[tid] = lineno
                self.count += 1
                yield RawTweet(tid, text)


def read_jsonl(path: str | os.PathLike, on_error: str = "fail") -> Iterator[RawTweet]:
    return iter(JsonlReader(path, on_error=on_error))


def write_jsonl(records: Iterable[RawTweet], path: str | os.PathLike) -> int:
    """Write ``{"id","text"}`` lines; returns the record count."""
    n = 0

    def lines():
        nonlocal n
        for r in records:
            n += 1
            yield json.dumps({"id": r.id, "text": r.text}, ensure_ascii=False) + "\n"

    _atomic_write(path, lines())
    return n


def read_labeled_tsv(path: str | os.PathLike, task: Task | str | None = None) -> Dataset:
    """Read an ``id\\ttext\\tlabel`` file.

    A first row equal to the column names is treated as a header. With
    ``task=None`` the task is inferred from the first label.
    """
    path = Path(path)
    resolved = Task.parse(task) if task is not None else None
    records: list[tuple[RawTweet, str]] = []
    seen: dict[str, int] = {}
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(path, lineno, f"expected 3 tab-separated columns, found {len(cols)}")
            if lineno == 1 and tuple(cols) == TSV_HEADER:
                continue
            tid, text, label = cols
            if not tid:
                raise ParseError(path, lineno, "empty id")
            if resolved is None:
                resolved = task_for_label(label)
                if resolved is None:
                    raise ParseError(path, lineno, f"cannot infer task from label {label!r}; pass a task")
            allowed = LABEL_SETS.get(resolved)
            if allowed is not None and label not in allowed:
                raise ParseError(path, lineno, f"unknown label {label!r}; allowed: {', '.join(allowed)}")
            if not label:
                raise ParseError(path, lineno, "empty label")
            if tid in seen:
                raise ParseError(path, lineno, f"duplicate id {tid!r} (first seen on line {seen[tid]})")
            seen[tid] = lineno
            records.append((RawTweet(tid, text), label))
    if resolved is None:
        raise ValidationError(f"{path}: empty file and no task given")
    return Dataset(resolved, records)


def _sanitize(text: str) -> str:
    return text.replace("\t", " ").replace("\r", " ").replace("\n", " ")


def dataset_bytes(dataset: Dataset) -> tuple[bytes, int]:
    """Canonical TSV serialization and the number of texts that needed sanitizing."""
    buf = io.StringIO()
    buf.write("\t".join(TSV_HEADER) + "\n")
    sanitized = 0
    for tweet, label in dataset.records:
        text = _sanitize(tweet.text)
        if text != tweet.text:
            sanitized += 1
        buf.write(f"{_sanitize(tweet.id)}\t{text}\t{label}\n")
    return buf.getvalue().encode("utf-8"), sanitized


def write_dataset(dataset: Dataset, path: str | os.PathLike) -> int:
    """Write ``dataset`` as TSV. Returns how many texts had tabs/newlines replaced."""
    data, sanitized = dataset_bytes(dataset)
    if sanitized:
        log.warning("%s: replaced tabs/newlines in %d text(s)", path, sanitized)
    _atomic_write(path, [data])
    return sanitized


def dataset_fingerprint(dataset: Dataset) -> str:
    return hashlib.sha256(dataset_bytes(dataset)[0]).hexdigest()


def file_fingerprint(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path: str | os.PathLike, chunks: Iterable[str | bytes]) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            for chunk in chunks:
                fh.write(chunk.encode("utf-8") if isinstance(chunk, str) else chunk)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except OSError as exc:
        Path(tmp).unlink(missing_ok=True)
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    _atomic_write(path, [text])
