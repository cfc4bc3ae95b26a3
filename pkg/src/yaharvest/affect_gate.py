"""Binary sentiment gate: a trainable baseline or a pluggable external scorer.

Every gate exposes ``score_batch(tweets) -> list[PolarityLabel]`` where
``tweets`` are NormalizedTweets. There is no neutral class.
"""

from __future__ import annotations

import enum
import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus_io import Dataset, Task
from .errors import DataError, ValidationError
from .model import ModelCheckpoint, TrainConfig, fit, softmax
from .normalizer import NormalizedTweet, normalize, tokenize


class Polarity(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


_WIRE = {"POS": Polarity.POSITIVE, "NEG": Polarity.NEGATIVE}
_WIRE_OUT = {v: k for k, v in _WIRE.items()}


@dataclass(frozen=True)
class PolarityLabel:
    polarity: Polarity
    score: float

    def __post_init__(self):
        object.__setattr__(self, "polarity", Polarity(self.polarity))
        if not (0.0 <= self.score <= 1.0) or math.isnan(self.score):
            raise ValueError(f"polarity score {self.score} outside [0, 1]")


class Gate(Protocol):
    def score_batch(self, tweets: Sequence[NormalizedTweet]) -> list[PolarityLabel]: ...


class GateError(DataError):
    """The scorer broke the batch protocol."""


def prepare(text: str) -> str:
    """Normalized, tokenized form of ``text``; a no-op on already prepared text."""
    return " ".join(tokenize(normalize(text)))


def train_affect(data: Dataset, config: TrainConfig) -> ModelCheckpoint:
    """Train the baseline affect model on sentiment (POS/NEG) or emotion labels."""
    if data.task not in (Task.SENTIMENT, Task.EMOTION):
        raise ValidationError(f"affect training needs sentiment or emotion data, got {data.task.value}")
    if len(set(data.labels)) < 2:
        raise DataError(f"single-class affect data: {sorted(set(data.labels))}")
    texts = [prepare(t) for t in data.texts]
    return fit(data.task.value, texts, data.labels, data.label_set, config)


def _polarity_from_probs(probs: np.ndarray, label_set: Sequence[str]) -> list[PolarityLabel]:
    neg, pos = label_set.index("NEG"), label_set.index("POS")
    out = []
    for row in probs:
        # exact ties go to negative: a borderline tweet stays out of the clean pool
        if row[neg] >= row[pos]:
            out.append(PolarityLabel(Polarity.NEGATIVE, float(row[neg])))
        else:
            out.append(PolarityLabel(Polarity.POSITIVE, float(row[pos])))
    return out


class CheckpointGate:
    def __init__(self, checkpoint: ModelCheckpoint):
        if checkpoint.task != Task.SENTIMENT.value or set(checkpoint.label_set) != {"NEG", "POS"}:
            raise ValidationError(
                f"gate checkpoint must be a POS/NEG sentiment model, got task {checkpoint.task!r}"
            )
        self.checkpoint = checkpoint

    def score_batch(self, tweets: Sequence[NormalizedTweet]) -> list[PolarityLabel]:
        if not tweets:
            return []
        ckpt = self.checkpoint
        probs = softmax(ckpt.logits(ckpt.features([t.text for t in tweets])))
        return _polarity_from_probs(probs, ckpt.label_set)


class TokenRuleGate:
    """Deterministic stub: negative iff the tweet contains a marker token."""

    def __init__(self, negative_markers: Iterable[str], score: float = 1.0):
        self.markers = frozenset(normalize(m) for m in negative_markers)
        self.score = score

    def score_batch(self, tweets: Sequence[NormalizedTweet]) -> list[PolarityLabel]:
        out = []
        for t in tweets:
            neg = any(tok in self.markers for tok in t.tokens)
            out.append(PolarityLabel(Polarity.NEGATIVE if neg else Polarity.POSITIVE, self.score))
        return out


def read_batch_out(path: str | os.PathLike) -> dict[str, PolarityLabel]:
    """Parse ``id<TAB>POS|NEG<TAB>score`` lines; duplicate ids are protocol errors."""
    out: dict[str, PolarityLabel] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise GateError(f"scorer output {path} unreadable: {exc.strerror or exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise GateError(f"{path}:{lineno}: expected 'id<TAB>POS|NEG<TAB>score'")
            tid, lab, raw = cols
            if lab not in _WIRE:
                raise GateError(f"{path}:{lineno}: record {tid!r} has non-polarity label {lab!r}")
            try:
                label = PolarityLabel(_WIRE[lab], float(raw))
            except ValueError:
                raise GateError(f"{path}:{lineno}: record {tid!r} has bad score {raw!r}") from None
            if tid in out:
                raise GateError(f"{path}:{lineno}: record {tid!r} scored more than once")
            out[tid] = label
    return out


def write_batch_out(labels: dict[str, PolarityLabel], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, lab in labels.items():
            fh.write(f"{tid}\t{_WIRE_OUT[lab.polarity]}\t{lab.score!r}\n")


class ExternalScorer:
    """Batch-file exchange with an outside sentiment tool.

    For each batch the gate writes ``batch_in.jsonl`` (``{"id","text"}``
    per line) into ``workdir`` and expects ``batch_out.tsv``
    (``id<TAB>POS|NEG<TAB>score``) with every input id exactly once.

    ``command`` is run once per batch with ``{in}``/``{out}`` substituted
    (or the two paths appended when absent). Without a command, a
    pre-computed ``scores`` file is consulted instead.
    """

    def __init__(
        self,
        workdir: str | os.PathLike | None = None,
        command: str | Sequence[str] | None = None,
        scores: str | os.PathLike | None = None,
    ):
        if command is None and scores is None:
            raise ValidationError("external scorer needs a command or a scores file")
        self.workdir = Path(workdir) if workdir is not None else None
        if isinstance(command, str):
            command = shlex.split(command)
        self.command = list(command) if command else None
        self._table = read_batch_out(scores) if scores is not None else None
        if self.command and self.workdir is None:
            raise ValidationError("external scorer command needs a workdir")

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ExternalScorer":
        return cls(scores=path)

    def _run(self, tweets: Sequence[NormalizedTweet]) -> dict[str, PolarityLabel]:
        assert self.workdir is not None and self.command is not None
        self.workdir.mkdir(parents=True, exist_ok=True)
        src = self.workdir / "batch_in.jsonl"
        dst = self.workdir / "batch_out.tsv"
        with open(src, "w", encoding="utf-8", newline="\n") as fh:
            for t in tweets:
                fh.write(json.dumps({"id": t.id, "text": t.text}, ensure_ascii=False) + "\n")
        dst.unlink(missing_ok=True)
        argv = [a.replace("{in}", str(src)).replace("{out}", str(dst)) for a in self.command]
        if not any("{in}" in a or "{out}" in a for a in self.command):
            argv += [str(src), str(dst)]
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise GateError(f"scorer command failed ({proc.returncode}): {proc.stderr.strip()[:500]}")
        return read_batch_out(dst)

    def score_batch(self, tweets: Sequence[NormalizedTweet]) -> list[PolarityLabel]:
        if not tweets:
            return []
        table = self._table if self._table is not None else self._run(tweets)
        wanted = {t.id for t in tweets}
        if self._table is None:
            extra = sorted(set(table) - wanted)
            if extra:
                raise GateError(f"scorer returned unknown id {extra[0]!r}")
        out = []
        for t in tweets:
            if t.id not in table:
                raise GateError(f"scorer output missing id {t.id!r}")
            out.append(table[t.id])
        return out


def score(scorer, text: str, tweet_id: str = "0") -> PolarityLabel:
    """Polarity of a single text.

    ``scorer`` is a ModelCheckpoint (sentiment task) or any gate object.
    External scorers key on ``tweet_id``.
    """
    if isinstance(scorer, ModelCheckpoint):
        scorer = CheckpointGate(scorer)
    tweet = NormalizedTweet.from_text(tweet_id, text)
    return scorer.score_batch([tweet])[0]
