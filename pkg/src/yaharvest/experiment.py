"""Task training (scratch or warm start), prediction, scoring and corpus reports."""

from __future__ import annotations

import json
import os
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .affect_gate import Gate, Polarity, prepare
from .corpus_io import POSITIVE_LABEL, Dataset, RawTweet, Task
from .errors import DataError, ValidationError
from .lexicon import SeedLexicon
from .model import ModelCheckpoint, TrainConfig, fit, save_checkpoint
from .normalizer import PLACEHOLDERS, NormalizedTweet, tokenize


@dataclass
class Metrics:
    accuracy: float
    per_class: dict[str, tuple[float, float, float]]
    macro_f1: float
    support: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": {
                c: {"precision": p, "recall": r, "f1": f} for c, (p, r, f) in self.per_class.items()
            },
            "support": dict(self.support),
        }


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def compute_metrics(gold: Sequence[str], predicted: Sequence[str]) -> Metrics:
    """Accuracy and per-class P/R/F1; macro F1 averages over the labels present in ``gold``."""
    if len(gold) != len(predicted):
        raise DataError(f"length mismatch: {len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise DataError("cannot score an empty split")
    classes = sorted(set(gold))
    tp: Counter[str] = Counter()
    pred_n = Counter(predicted)
    gold_n = Counter(gold)
    for g, p in zip(gold, predicted):
        if g == p:
            tp[g] += 1
    per_class = {}
    for c in classes:
        prec = _ratio(tp[c], pred_n[c])
        rec = _ratio(tp[c], gold_n[c])
        f1 = _ratio(2 * tp[c], pred_n[c] + gold_n[c])
        per_class[c] = (prec, rec, f1)
    macro = sum(f for _, _, f in per_class.values()) / len(classes)
    return Metrics(sum(tp.values()) / len(gold), per_class, macro, {c: gold_n[c] for c in classes})


def evaluate(gold: Dataset, predicted: Dataset) -> Metrics:
    """Score ``predicted`` against ``gold``, pairing records by id."""
    pred = {t.id: lab for t, lab in predicted.records}
    gold_ids = gold.ids
    missing = [i for i in gold_ids if i not in pred]
    extra = sorted(set(pred) - set(gold_ids))
    if missing or extra:
        raise DataError(
            f"id mismatch: missing {len(missing)} {missing[:10]}, extra {len(extra)} {extra[:10]}"
        )
    return compute_metrics(gold.labels, [pred[i] for i in gold_ids])


# --- training ---------------------------------------------------------------


def train_task(
    data: Dataset,
    config: TrainConfig,
    init: ModelCheckpoint | None = None,
    dev: Dataset | None = None,
    checkpoint_dir: str | os.PathLike | None = None,
) -> ModelCheckpoint:
    """Train a task classifier from scratch or warm-started from an affect checkpoint.

    With ``dev``, every epoch is scored and the best macro-F1 epoch is
    returned (earliest wins ties). ``checkpoint_dir`` keeps every epoch.
    """
    if len(set(data.labels)) < 2:
        raise DataError(f"single-class training data: {sorted(set(data.labels))}")
    if dev is not None and dev.task is not data.task:
        raise ValidationError("dev split belongs to a different task")
    texts = [prepare(t) for t in data.texts]
    best: dict = {"f1": -1.0, "ckpt": None}
    history: list[float] = []
    ckdir = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckdir is not None:
        ckdir.mkdir(parents=True, exist_ok=True)

    def on_epoch(epoch: int, ckpt: ModelCheckpoint) -> None:
        if ckdir is not None:
            save_checkpoint(ckpt, ckdir / f"epoch-{epoch:03d}.ckpt")
        if dev is not None:
            f1 = evaluate(dev, predict(ckpt, dev.tweets)).macro_f1
            history.append(f1)
            if f1 > best["f1"]:
                best.update(f1=f1, ckpt=ckpt, epoch=epoch)

    hook = on_epoch if (dev is not None or ckdir is not None) else None
    final = fit(data.task.value, texts, data.labels, data.label_set, config, init=init, on_epoch=hook)
    if best["ckpt"] is None:
        return final
    chosen: ModelCheckpoint = best["ckpt"]
    chosen.training_meta.update(best_epoch=best["epoch"], dev_macro_f1=history, epochs_run=config.epochs)
    return chosen


def predict(checkpoint: ModelCheckpoint, corpus: Iterable[NormalizedTweet | RawTweet]) -> Dataset:
    """Label every tweet with the checkpoint's argmax class, preserving input order."""
    if len(checkpoint.label_set) < 2:
        raise ValidationError("checkpoint has fewer than 2 labels")
    tweets = list(corpus)
    texts = [prepare(t.text) for t in tweets]
    labels = checkpoint.predict(texts)
    return Dataset(Task.parse(checkpoint.task), [(RawTweet(t.id, t.text), lab) for t, lab in zip(tweets, labels)])


# --- reports ----------------------------------------------------------------


def whole_percent(count: int, total: int) -> int:
    """round(100 * count / total), halves rounded up, in exact integer arithmetic."""
    return (200 * count + total) // (2 * total)


@dataclass
class DistributionRow:
    name: str
    total: int
    counts: dict[str, int]

    @property
    def percentages(self) -> dict[str, int]:
        return {lab: whole_percent(n, self.total) for lab, n in self.counts.items()}


@dataclass
class DistributionReport:
    task: Task
    labels: tuple[str, ...]
    rows: list[DistributionRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "rows": [
                {"split": r.name, "total": r.total, "counts": r.counts, "percent": r.percentages}
                for r in self.rows
            ],
        }

    def to_text(self) -> str:
        head = ["split", "#tweets"] + [f"#{lab}" for lab in self.labels] + [f"{lab}%" for lab in self.labels]
        body = [
            [r.name, str(r.total)]
            + [str(r.counts[lab]) for lab in self.labels]
            + [f"{r.percentages[lab]}%" for lab in self.labels]
            for r in self.rows
        ]
        return _table(head, body)


def distribution_report(datasets: Mapping[str, Dataset]) -> DistributionReport:
    tasks = {d.task for d in datasets.values()}
    if len(tasks) != 1:
        raise ValidationError(f"datasets span several tasks: {sorted(t.value for t in tasks)}")
    task = tasks.pop()
    labels: tuple[str, ...] = ()
    for d in datasets.values():
        labels += tuple(lab for lab in d.label_set if lab not in labels)
    report = DistributionReport(task, labels)
    for name, d in datasets.items():
        if not len(d):
            raise DataError(f"empty split: {name}")
        counts = d.counts
        report.rows.append(DistributionRow(name, len(d), {lab: counts.get(lab, 0) for lab in labels}))
    return report


@dataclass
class AffectBreakdown:
    """Per task label: how many tweets the gate called negative / positive."""

    counts: dict[str, dict[str, int]]

    def fractions(self) -> dict[str, dict[str, float]]:
        out = {}
        for lab, c in self.counts.items():
            total = c["negative"] + c["positive"]
            out[lab] = {p: _ratio(n, total) for p, n in c.items()}
        return out

    def to_dict(self) -> dict:
        return {"counts": self.counts, "fractions": self.fractions()}

    def to_text(self) -> str:
        body = []
        for lab, c in self.counts.items():
            total = c["negative"] + c["positive"]
            body.append(
                [lab, str(total), f"{whole_percent(c['negative'], total)}%", f"{whole_percent(c['positive'], total)}%"]
            )
        return _table(["label", "#tweets", "negative", "positive"], body)


def affect_distribution(data: Dataset, gate: Gate, batch_size: int = 512) -> AffectBreakdown:
    counts = {lab: {"negative": 0, "positive": 0} for lab in data.label_set}
    recs = data.records
    for start in range(0, len(recs), batch_size):
        chunk = recs[start : start + batch_size]
        tweets = [NormalizedTweet.from_text(t.id, t.text) for t, _ in chunk]
        for (_, lab), v in zip(chunk, gate.score_batch(tweets)):
            counts.setdefault(lab, {"negative": 0, "positive": 0})
            counts[lab][Polarity(v.polarity).value] += 1
    return AffectBreakdown({k: v for k, v in counts.items() if sum(v.values())})


def _is_punct_token(tok: str) -> bool:
    return all(unicodedata.category(ch).startswith("P") for ch in tok)


def top_unigrams(
    data: Dataset,
    exclude: Iterable[SeedLexicon | Iterable[str]] = (),
    k: int = 50,
    label: str | None = None,
) -> list[tuple[str, int]]:
    """Most frequent tokens in the positive class, minus seeds, placeholders and punctuation."""
    if label is None:
        if data.task not in POSITIVE_LABEL:
            raise ValidationError(f"no positive class for task {data.task.value}; pass label")
        label = POSITIVE_LABEL[data.task]
    if k <= 0:
        return []
    banned = set(PLACEHOLDERS)
    for lex in exclude:
        banned.update(lex.entries if isinstance(lex, SeedLexicon) else lex)
    freq: Counter[str] = Counter()
    for tweet, lab in data.records:
        if lab != label:
            continue
        for tok in tokenize(prepare(tweet.text)):
            if tok not in banned and not _is_punct_token(tok):
                freq[tok] += 1
    return sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def results_table(results: Mapping[str, Mapping[tuple[str, str], Metrics]]) -> str:
    """Model rows by (split, task) columns of Acc and F1, both in percent."""
    cols: list[tuple[str, str]] = []
    for per in results.values():
        for key in per:
            if key not in cols:
                cols.append(key)
    head = ["model"]
    for task, split in cols:
        head += [f"{split}/{task} Acc", f"{split}/{task} F1"]
    body = []
    for model_name, per in results.items():
        row = [model_name]
        for key in cols:
            m = per.get(key)
            row += [f"{100 * m.accuracy:.2f}", f"{100 * m.macro_f1:.2f}"] if m else ["--", "--"]
        body.append(row)
    return _table(head, body)


def _table(head: list[str], body: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(head), rule] + [fmt(r) for r in body]) + "\n"


def metrics_json(metrics: Metrics) -> str:
    return json.dumps(metrics.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
