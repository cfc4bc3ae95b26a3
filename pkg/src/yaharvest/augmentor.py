"""Weak labeling by trigger + seed co-occurrence gated on sentiment, and prevalence balancing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .affect_gate import Gate, GateError, Polarity, PolarityLabel
from .corpus_io import NEGATIVE_LABEL, POSITIVE_LABEL, Dataset, RawTweet, Task
from .errors import DataError, ValidationError
from .lexicon import Matcher, MatchResult
from .normalizer import NormalizedTweet

log = logging.getLogger(__name__)

RULE_POSITIVE = "trigger+seed+negative"
RULE_NEGATIVE = "trigger+no-seed+positive"
HARVEST_TASKS = (Task.OFFENSIVE, Task.HATE_SPEECH)


@dataclass(frozen=True)
class Evidence:
    offensive_seeds: tuple[str, ...]
    hateful_seeds: tuple[str, ...]
    polarity: Polarity
    score: float
    rule: str


@dataclass(frozen=True)
class HarvestRecord:
    tweet: NormalizedTweet
    task: Task
    label: str
    evidence: Evidence

    def is_valid(self, matcher: Matcher, verdict: PolarityLabel | None = None) -> bool:
        """Re-run the matcher (and optionally compare a fresh gate verdict) against the stored evidence."""
        m = matcher.match(self.tweet.tokens)
        ev = self.evidence
        if verdict is not None and verdict.polarity is not ev.polarity:
            return False
        if (m.offensive_hits, m.hateful_hits) != (ev.offensive_seeds, ev.hateful_seeds):
            return False
        if not m.trigger_present:
            return False
        if self.label == POSITIVE_LABEL[self.task]:
            seeds = m.offensive_hits if self.task is Task.OFFENSIVE else m.hateful_hits
            return bool(seeds) and ev.polarity is Polarity.NEGATIVE and ev.rule == RULE_POSITIVE
        if self.label == NEGATIVE_LABEL[self.task]:
            return not m.seeded and ev.polarity is Polarity.POSITIVE and ev.rule == RULE_NEGATIVE
        return False

    def to_json(self) -> dict:
        ev = self.evidence
        return {
            "id": self.tweet.id,
            "text": self.tweet.text,
            "task": self.task.value,
            "label": self.label,
            "offensive_seeds": list(ev.offensive_seeds),
            "hateful_seeds": list(ev.hateful_seeds),
            "polarity": ev.polarity.value,
            "score": ev.score,
            "rule": ev.rule,
        }


@dataclass
class HarvestReport:
    """Funnel tallies for one harvest pass.

    ``seed_hits`` counts trigger-bearing tweets with at least one seed;
    ``eligible`` counts tweets sent to the gate; ``gate_pass`` counts
    gate verdicts per polarity (after any confidence threshold).
    """

    mode: str
    scanned: int = 0
    excluded: int = 0
    trigger_hits: int = 0
    seed_hits: int = 0
    eligible: int = 0
    below_threshold: int = 0
    gate_pass: dict[str, int] = field(default_factory=lambda: {"negative": 0, "positive": 0})
    emitted: dict[str, int] = field(default_factory=dict)
    duplicates: int = 0
    aborted: str | None = None

    @property
    def negative_gate_rate(self) -> float:
        return self.gate_pass["negative"] / self.eligible if self.eligible else 0.0

    @property
    def positive_gate_rate(self) -> float:
        return self.gate_pass["positive"] / self.eligible if self.eligible else 0.0

    def merge(self, other: "HarvestReport") -> "HarvestReport":
        if other.mode != self.mode:
            raise ValidationError("cannot merge reports of different harvest modes")
        emitted = dict(self.emitted)
        for k, v in other.emitted.items():
            emitted[k] = emitted.get(k, 0) + v
        return HarvestReport(
            self.mode,
            self.scanned + other.scanned,
            self.excluded + other.excluded,
            self.trigger_hits + other.trigger_hits,
            self.seed_hits + other.seed_hits,
            self.eligible + other.eligible,
            self.below_threshold + other.below_threshold,
            {p: self.gate_pass[p] + other.gate_pass[p] for p in self.gate_pass},
            dict(sorted(emitted.items())),
            self.duplicates + other.duplicates,
            self.aborted or other.aborted,
        )

    def check(self) -> None:
        """Raise if the tallies contradict each other."""
        passed = sum(self.gate_pass.values())
        ok = (
            self.trigger_hits <= self.scanned - self.excluded
            and self.seed_hits <= self.trigger_hits
            and passed + self.below_threshold <= self.eligible <= self.scanned
            and all(v >= 0 for v in self.emitted.values())
        )
        if ok and self.aborted is None:
            need = "negative" if self.mode == "positive" else "positive"
            ok = all(v <= self.gate_pass[need] for v in self.emitted.values())
        if not ok:
            raise DataError(f"inconsistent harvest report: {self.to_dict()}")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "scanned": self.scanned,
            "excluded": self.excluded,
            "trigger_hits": self.trigger_hits,
            "seed_hits": self.seed_hits,
            "eligible": self.eligible,
            "below_threshold": self.below_threshold,
            "gate_pass": dict(self.gate_pass),
            "emitted": dict(self.emitted),
            "duplicates": self.duplicates,
            "negative_gate_rate": self.negative_gate_rate,
            "positive_gate_rate": self.positive_gate_rate,
            "aborted": self.aborted,
        }


class HarvestAborted(GateError):
    def __init__(self, cause: Exception, report: HarvestReport):
        self.report = report
        self.cause = cause
        super().__init__(f"harvest aborted after {report.scanned} tweets: {cause}")


def _batches(items: Iterable, size: int) -> Iterator[list]:
    batch: list = []
    for item in items:
        batch.append(item)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def _harvest(
    corpus: Iterable[NormalizedTweet],
    matcher: Matcher,
    gate: Gate,
    mode: str,
    tasks: Sequence[Task],
    threshold: float | None,
    exclude_ids: frozenset[str] | set[str],
    batch_size: int,
) -> tuple[dict[Task, list[HarvestRecord]], HarvestReport]:
    report = HarvestReport(mode)
    pools: dict[Task, dict[str, HarvestRecord]] = {t: {} for t in tasks}
    want = Polarity.NEGATIVE if mode == "positive" else Polarity.POSITIVE

    def candidates() -> Iterator[tuple[NormalizedTweet, MatchResult]]:
        for tweet in corpus:
            report.scanned += 1
            if tweet.id in exclude_ids:
                report.excluded += 1
                continue
            m = matcher.match(tweet.tokens)
            if not m.trigger_present:
                continue
            report.trigger_hits += 1
            if m.seeded:
                report.seed_hits += 1
            if m.seeded == (mode == "positive"):
                report.eligible += 1
                yield tweet, m

    try:
        for batch in _batches(candidates(), batch_size):
            verdicts = gate.score_batch([t for t, _ in batch])
            if len(verdicts) != len(batch):
                raise GateError(f"gate returned {len(verdicts)} verdicts for {len(batch)} tweets")
            for (tweet, m), v in zip(batch, verdicts):
                if threshold is not None and v.score < threshold:
                    report.below_threshold += 1
                    continue
                report.gate_pass[v.polarity.value] += 1
                if v.polarity is not want:
                    continue
                rule = RULE_POSITIVE if mode == "positive" else RULE_NEGATIVE
                ev = Evidence(m.offensive_hits, m.hateful_hits, v.polarity, v.score, rule)
                for task in tasks:
                    if mode == "positive":
                        hits = m.offensive_hits if task is Task.OFFENSIVE else m.hateful_hits
                        if not hits:
                            continue
                        label = POSITIVE_LABEL[task]
                    else:
                        label = NEGATIVE_LABEL[task]
                    pool = pools[task]
                    if tweet.id in pool:
                        report.duplicates += 1
                        continue
                    pool[tweet.id] = HarvestRecord(tweet, task, label, ev)
    except GateError as exc:
        report.aborted = str(exc)
        raise HarvestAborted(exc, report) from exc

    out = {t: [pools[t][k] for k in sorted(pools[t])] for t in tasks}
    report.emitted = {f"{t.value}/{_label(t, mode)}": len(recs) for t, recs in out.items()}
    report.check()
    return out, report


def _label(task: Task, mode: str) -> str:
    return POSITIVE_LABEL[task] if mode == "positive" else NEGATIVE_LABEL[task]


def harvest_positive(
    corpus: Iterable[NormalizedTweet],
    matcher: Matcher,
    gate: Gate,
    threshold: float | None = None,
    exclude_ids: Iterable[str] = (),
    batch_size: int = 512,
) -> tuple[dict[Task, list[HarvestRecord]], HarvestReport]:
    """Trigger + any seed + negative verdict. A tweet with both kinds of seed lands in both pools."""
    return _harvest(
        corpus, matcher, gate, "positive", HARVEST_TASKS, threshold, frozenset(exclude_ids), batch_size
    )


def harvest_negative(
    corpus: Iterable[NormalizedTweet],
    matcher: Matcher,
    gate: Gate,
    threshold: float | None = None,
    exclude_ids: Iterable[str] = (),
    batch_size: int = 512,
    tasks: Sequence[Task] = HARVEST_TASKS,
) -> tuple[dict[Task, list[HarvestRecord]], HarvestReport]:
    """Trigger + no seed of either lexicon + positive verdict."""
    return _harvest(corpus, matcher, gate, "negative", tasks, threshold, frozenset(exclude_ids), batch_size)


def pool_dataset(records: Sequence[HarvestRecord], task: Task) -> Dataset:
    recs = [(r.tweet.raw(), r.label) for r in records if r.task is task]
    return Dataset(task, recs)


# --- balancing --------------------------------------------------------------


def required_negatives(n_positives: int, prevalence: float) -> int:
    """Negatives needed so positives make up ``prevalence`` of the total (total rounded half-to-even)."""
    return round(n_positives / prevalence) - n_positives


def balance(
    positives: Dataset,
    negative_pool: Dataset | Sequence[RawTweet],
    target_prevalence: float | None,
    rng_seed: int,
) -> Dataset:
    """Add uniformly sampled negatives until positives reach the target share.

    ``target_prevalence=None`` takes the whole pool. If the pool is too
    small, all of it is used and ``meta["shortfall"]`` is set. Output:
    positives then negatives, each sorted by id.
    """
    task = positives.task
    if task not in POSITIVE_LABEL:
        raise ValidationError(f"cannot balance task {task.value}")
    if rng_seed is None:
        raise ValidationError("rng_seed required")
    if not len(positives):
        raise DataError("no positives to balance")
    if target_prevalence is not None and not (0.0 < target_prevalence < 1.0):
        raise ValidationError(f"prevalence out of (0,1): {target_prevalence}")
    pos_label, neg_label = POSITIVE_LABEL[task], NEGATIVE_LABEL[task]
    bad = [t.id for t, lab in positives.records if lab != pos_label]
    if bad:
        raise DataError(f"positives contain non-{pos_label} record(s), e.g. id {bad[0]!r}")

    pool_tweets = negative_pool.records if isinstance(negative_pool, Dataset) else [(t, None) for t in negative_pool]
    pos_ids = set(positives.ids)
    by_id: dict[str, RawTweet] = {}
    for tweet, _ in pool_tweets:
        if tweet.id in pos_ids:
            log.warning("negative pool id %r also a positive; dropped from pool", tweet.id)
            continue
        by_id.setdefault(tweet.id, tweet)
    pool = [by_id[k] for k in sorted(by_id)]

    n_pos = len(positives)
    need = len(pool) if target_prevalence is None else required_negatives(n_pos, target_prevalence)
    if need > len(pool):
        chosen = pool
    else:
        rng = np.random.default_rng(rng_seed)
        idx = np.sort(rng.choice(len(pool), size=need, replace=False)) if need else []
        chosen = [pool[i] for i in idx]

    records = sorted(positives.records, key=lambda r: r[0].id)
    records += [(t, neg_label) for t in chosen]
    total = len(records)
    meta = {
        "target_prevalence": target_prevalence,
        "requested_negatives": need,
        "drawn_negatives": len(chosen),
        "pool_size": len(pool),
        "achieved_prevalence": n_pos / total,
        "shortfall": need > len(pool),
        "rng_seed": rng_seed,
    }
    if meta["shortfall"]:
        log.warning(
            "negative pool too small: wanted %d, have %d; achieved prevalence %d/%d",
            need, len(pool), n_pos, total,
        )
    return Dataset(task, records, meta)


def merge_with_gold(gold: Dataset, augmented: Dataset, mode: str = "concat") -> Dataset:
    """``augmented_only`` returns the augmented set; ``concat`` appends gold after it."""
    if gold.task is not augmented.task or gold.label_set != augmented.label_set:
        raise ValidationError(
            f"label-set mismatch: gold {gold.task.value} {gold.label_set} vs "
            f"augmented {augmented.task.value} {augmented.label_set}"
        )
    if mode == "augmented_only":
        return augmented
    if mode != "concat":
        raise ValidationError(f"unknown merge mode {mode!r}")
    aug_ids = set(augmented.ids)
    for tweet, _ in gold.records:
        if tweet.id in aug_ids:
            raise DataError(f"id collision between gold and augmented data: {tweet.id!r}")
    return Dataset(augmented.task, list(augmented.records) + list(gold.records))
