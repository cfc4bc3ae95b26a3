"""Fixtures with planted, exactly known proportions (shared by unit and acceptance tests)."""

from __future__ import annotations

import random
from dataclasses import dataclass

from yaharvest.lexicon import Category, SeedLexicon, compile_matcher
from yaharvest.normalizer import NormalizedTweet

OFF_SEEDS = ["كلب", "حيوان", "رعاع"]
HS_SEEDS = ["حوثي", "عميل"]
NEG_MARK, POS_MARK = "قذر", "جميل"


@dataclass(frozen=True)
class Plan:
    no_trigger: int = 100
    seeded_neg_off: int = 120  # trigger + offensive seed, gated negative
    seeded_neg_hs: int = 60
    seeded_neg_both: int = 21
    seeded_pos: int = 99  # seeded, gated positive
    clean_pos: int = 140  # trigger, no seed, gated positive
    clean_neg: int = 60

    @property
    def seeded(self) -> int:
        return self.seeded_neg_off + self.seeded_neg_hs + self.seeded_neg_both + self.seeded_pos

    @property
    def clean(self) -> int:
        return self.clean_pos + self.clean_neg

    @property
    def total(self) -> int:
        return self.no_trigger + self.seeded + self.clean


def planted_corpus(plan: Plan = Plan(), seed: int = 0) -> list[NormalizedTweet]:
    rng = random.Random(seed)
    filler = ["في", "من", "الله", "اليوم", "والله"]
    rows: list[list[str]] = []
    rows += [[rng.choice(OFF_SEEDS), NEG_MARK] for _ in range(plan.no_trigger)]
    rows += [["يا", rng.choice(OFF_SEEDS), NEG_MARK] for _ in range(plan.seeded_neg_off)]
    rows += [["يا", rng.choice(HS_SEEDS), NEG_MARK] for _ in range(plan.seeded_neg_hs)]
    rows += [["يا", rng.choice(OFF_SEEDS), "و", rng.choice(HS_SEEDS), NEG_MARK] for _ in range(plan.seeded_neg_both)]
    rows += [["يا", rng.choice(OFF_SEEDS + HS_SEEDS), POS_MARK] for _ in range(plan.seeded_pos)]
    rows += [["يا", "فنان", POS_MARK] for _ in range(plan.clean_pos)]
    rows += [["يا", "حبيبي", NEG_MARK] for _ in range(plan.clean_neg)]
    for r in rows:
        r.insert(rng.randrange(len(r) + 1), rng.choice(filler))
    rng.shuffle(rows)
    return [NormalizedTweet.from_text(f"t{i:05d}", " ".join(r)) for i, r in enumerate(rows)]


def planted_matcher():
    return compile_matcher(
        SeedLexicon(Category.OFFENSIVE, set(OFF_SEEDS)), SeedLexicon(Category.HATEFUL, set(HS_SEEDS))
    )


# --- warm-start transfer fixture ---------------------------------------------

_LETTERS = "بتثجحخدذرزسشصضطظعغفقكلمنهوي"


def _words(rng: random.Random, n: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        w = "".join(rng.choice(_LETTERS) for _ in range(4))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


@dataclass(frozen=True)
class TransferFixture:
    sentiment: list[tuple[str, str]]  # (text, POS|NEG)
    train: list[tuple[str, str]]  # (text, OFF|NOT_OFF), 50 rows
    test: list[tuple[str, str]]


def transfer_fixture(seed: int = 2024) -> TransferFixture:
    """Task labels follow polarity 90% of the time.

    The affect data covers 24 negative and 24 positive marker words; the
    50-row task train split only ever shows the first 5 of each, while
    the held-out split draws from all of them.
    """
    rng = random.Random(seed)
    taken: set[str] = set()
    neg, pos, filler = _words(rng, 24, taken), _words(rng, 24, taken), _words(rng, 40, taken)

    def tweet(markers: list[str]) -> str:
        words = [rng.choice(markers)] + [rng.choice(filler) for _ in range(rng.randint(2, 4))]
        rng.shuffle(words)
        return " ".join(words)

    sentiment = []
    for _ in range(400):
        negative = rng.random() < 0.5
        sentiment.append((tweet(neg if negative else pos), "NEG" if negative else "POS"))

    def task_rows(n: int, vocab: int) -> list[tuple[str, str]]:
        rows = []
        for _ in range(n):
            off = rng.random() < 0.4
            negative = off if rng.random() < 0.9 else not off
            rows.append((tweet((neg if negative else pos)[:vocab]), "OFF" if off else "NOT_OFF"))
        return rows

    return TransferFixture(sentiment, task_rows(50, 5), task_rows(300, 24))
