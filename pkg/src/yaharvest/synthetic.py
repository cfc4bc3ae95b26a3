"""Seeded synthetic corpora for tests, benchmarks and the demo workspace.

Nothing here is real data: the vocabulary mixes a few seed words shown
in published lexica with neutral filler, and sentiment is planted with
marker tokens that the stub gate keys on.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import yaml

from .corpus_io import Dataset, RawTweet, Task, write_dataset
from .lexicon import Category, SeedLexicon, Verdict, extract_candidates, save_lexicon
from .normalizer import NormalizedTweet

TRIGGER = "يا"
OFFENSIVE_SEEDS = ["كلب", "حيوان", "رعاع", "متشرد", "مجانين", "زباله", "بغيض", "مغفل", "غباء", "حمقي"]
HATEFUL_SEEDS = ["حوثي", "شيعي", "عميل", "دحباشي", "اخوانجي"]
BENIGN_AFTER_TRIGGER = ["فنان", "ابطال", "حبيبي", "ناس", "ماما", "بابا", "رب", "قمر"]
NEGATIVE_MARKERS = ["قذر", "اكرهك", "سيء", "لعنه"]
POSITIVE_MARKERS = ["جميل", "رائع", "احبك", "شكرا"]
FILLER = [
    "شاهد", "اليوم", "قال", "في", "من", "علي", "هذا", "الله", "كل", "ما", "انت",
    "والله", "بس", "الناس", "بكره", "الصبح", "البيت", "الشارع", "الكوره", "المباراه",
]
NOISE = ["@user_{n}", "https://t.co/{n}", "#وسم{n}", "{n}", "www.site{n}.com"]


def _noisy(rng: random.Random, words: list[str]) -> str:
    words = list(words)
    if rng.random() < 0.3:
        words.insert(rng.randrange(len(words) + 1), rng.choice(NOISE).format(n=rng.randrange(1000)))
    text = " ".join(words)
    if rng.random() < 0.2:
        text = text.replace("ا", "أ", 1)
    if rng.random() < 0.2:
        text += "!"
    return text


def _tweet(rng: random.Random, core: list[str]) -> list[str]:
    words = [rng.choice(FILLER) for _ in range(rng.randint(1, 4))]
    at = rng.randrange(len(words) + 1)
    return words[:at] + core + words[at:]


def seeded_tweet(rng: random.Random, negative: bool) -> str:
    """Trigger + offensive and/or hateful seed, sentiment planted by marker."""
    r = rng.random()
    core = [TRIGGER]
    if r < 0.6:
        core.append(rng.choice(OFFENSIVE_SEEDS))
    elif r < 0.85:
        core.append(rng.choice(HATEFUL_SEEDS))
    else:
        core += [rng.choice(OFFENSIVE_SEEDS), TRIGGER, rng.choice(HATEFUL_SEEDS)]
    core.append(rng.choice(NEGATIVE_MARKERS if negative else POSITIVE_MARKERS))
    return _noisy(rng, _tweet(rng, core))


def clean_tweet(rng: random.Random, positive: bool) -> str:
    core = [TRIGGER, rng.choice(BENIGN_AFTER_TRIGGER)]
    core.append(rng.choice(POSITIVE_MARKERS if positive else NEGATIVE_MARKERS))
    return _noisy(rng, _tweet(rng, core))


def make_corpus(n: int, seed: int, kind: str, p_negative: float = 0.67) -> list[RawTweet]:
    """``kind="seeded"``: trigger+seed tweets; ``kind="clean"``: trigger, no seed. Some lines lack the trigger."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        r = rng.random()
        if r < 0.1:
            text = _noisy(rng, _tweet(rng, [rng.choice(OFFENSIVE_SEEDS + FILLER)]))
        elif kind == "seeded":
            text = seeded_tweet(rng, negative=rng.random() < p_negative)
        else:
            text = clean_tweet(rng, positive=rng.random() >= p_negative)
        out.append(RawTweet(f"{kind[0]}{i:06d}", text))
    return out


def make_gold(n: int, seed: int, task: Task, prefix: str, positive_rate: float = 0.2) -> Dataset:
    rng = random.Random(seed)
    pos, neg = {Task.OFFENSIVE: ("OFF", "NOT_OFF"), Task.HATE_SPEECH: ("HS", "NOT_HS")}[task]
    # hate speech is a kind of offensive language, so offensive positives use both
    seeds = OFFENSIVE_SEEDS + HATEFUL_SEEDS if task is Task.OFFENSIVE else HATEFUL_SEEDS
    records = []
    for i in range(n):
        if rng.random() < positive_rate:
            core = [TRIGGER, rng.choice(seeds), rng.choice(NEGATIVE_MARKERS)]
            label = pos
        else:
            core = [TRIGGER, rng.choice(BENIGN_AFTER_TRIGGER), rng.choice(POSITIVE_MARKERS + NEGATIVE_MARKERS)]
            label = neg
        records.append((RawTweet(f"{prefix}{i:05d}", _noisy(rng, _tweet(rng, core))), label))
    return Dataset(task, records)


def make_sentiment(n: int, seed: int) -> Dataset:
    rng = random.Random(seed)
    records = []
    for i in range(n):
        negative = rng.random() < 0.5
        markers = NEGATIVE_MARKERS if negative else POSITIVE_MARKERS
        core = [rng.choice(markers) for _ in range(rng.randint(1, 2))]
        records.append((RawTweet(f"s{i:05d}", " ".join(_tweet(rng, core))), "NEG" if negative else "POS"))
    return Dataset(Task.SENTIMENT, records)


def _write_jsonl(tweets: list[RawTweet], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tweets:
            fh.write(json.dumps({"id": t.id, "text": t.text}, ensure_ascii=False) + "\n")


def make_workspace(
    root: str | Path,
    n_lines: int = 5000,
    seed: int = 0,
    with_lexica: bool = True,
    gate: str = "stub",
    epochs: int = 10,
    dim: int = 1 << 16,
) -> Path:
    """Write a complete runnable workspace under ``root``; returns the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    _write_jsonl(make_corpus(n_lines, seed + 1, "seeded"), root / "seeded.jsonl")
    _write_jsonl(make_corpus(n_lines, seed + 2, "clean"), root / "clean.jsonl")
    train = make_gold(600, seed + 3, Task.OFFENSIVE, "t")
    write_dataset(train, root / "train.tsv")
    write_dataset(make_gold(200, seed + 4, Task.OFFENSIVE, "d"), root / "dev.tsv")
    write_dataset(make_sentiment(400, seed + 5), root / "sentiment.tsv")

    save_lexicon(SeedLexicon(Category.OFFENSIVE, set(OFFENSIVE_SEEDS)), root / "off.txt")
    save_lexicon(SeedLexicon(Category.HATEFUL, set(HATEFUL_SEEDS)), root / "hs.txt")
    cands = extract_candidates(
        NormalizedTweet.from_text(t.id, t.text) for t, lab in train.records if lab == "OFF"
    )
    with open(root / "decisions.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for c in cands:
            if c.surface in OFFENSIVE_SEEDS:
                v = Verdict.OFFENSIVE
            elif c.surface in HATEFUL_SEEDS:
                v = Verdict.HATEFUL
            else:
                v = Verdict.DROP
            fh.write(f"{c.surface}\t{v.value}\n")

    paths = {
        "output_dir": "out",
        "corpus_positive": "seeded.jsonl",
        "corpus_negative": "clean.jsonl",
        "train": "train.tsv",
        "dev": "dev.tsv",
        "sentiment": "sentiment.tsv",
        "decisions": "decisions.tsv",
    }
    if with_lexica:
        paths.update(off_lexicon="off.txt", hs_lexicon="hs.txt")
    gate_cfg: dict = {"kind": gate, "threshold": None}
    if gate == "stub":
        gate_cfg["negative_markers"] = NEGATIVE_MARKERS
    manifest = {
        "trigger": TRIGGER,
        "task": "offensive",
        "paths": paths,
        "gate": gate_cfg,
        "balance": {"prevalence": 0.65, "rng_seed": 42, "merge": "concat"},
        "train": {
            "seed": 42,
            "epochs": epochs,
            "learning_rate": 2.0,
            "batch_size": 32,
            "warm_start": True,
            "features": {"orders": [2, 3, 4, 5], "dim": dim, "seed": 0},
            "affect": {"seed": 7, "epochs": epochs},
        },
    }
    path = root / "manifest.yaml"
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(manifest, fh, allow_unicode=True, sort_keys=False)
    return path
