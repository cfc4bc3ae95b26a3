"""Seed lexicon bootstrapping: trigger-adjacent candidates, human curation, matching."""

from __future__ import annotations

import enum
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import _accel
from .corpus_io import atomic_write_text
from .errors import DataError, ParseError, ValidationError
from .normalizer import PLACEHOLDERS, NormalizedTweet, normalize

DEFAULT_TRIGGER = "يا"
MAX_SAMPLE_IDS = 5


class Category(str, enum.Enum):
    OFFENSIVE = "offensive"
    HATEFUL = "hateful"


class Verdict(str, enum.Enum):
    OFFENSIVE = "offensive"
    HATEFUL = "hateful"
    DROP = "drop"
    PENDING = "pending"


@dataclass
class CandidateSeed:
    surface: str
    frequency: int
    sample_ids: list[str] = field(default_factory=list)


def extract_candidates(
    corpus: Iterable[NormalizedTweet | Sequence[str]], trigger: str = DEFAULT_TRIGGER
) -> list[CandidateSeed]:
    """Collect every token that immediately follows ``trigger``.

    Ranked by frequency (descending), then surface. Placeholder tokens and
    the trigger itself never become candidates.
    """
    freq: Counter[str] = Counter()
    samples: dict[str, list[str]] = {}
    for i, item in enumerate(corpus):
        if isinstance(item, NormalizedTweet):
            tokens, tid = item.tokens, item.id
        else:
            tokens, tid = item, str(i)
        for pos in range(len(tokens) - 1):
            if tokens[pos] != trigger:
                continue
            nxt = tokens[pos + 1]
            if nxt == trigger or nxt in PLACEHOLDERS:
                continue
            freq[nxt] += 1
            ids = samples.setdefault(nxt, [])
            if len(ids) < MAX_SAMPLE_IDS and tid not in ids:
                ids.append(tid)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return [CandidateSeed(s, n, samples[s]) for s, n in ranked]


def merge_candidate_counts(shards: Iterable[Sequence[CandidateSeed]]) -> list[CandidateSeed]:
    """Associative merge of per-shard extraction results."""
    freq: Counter[str] = Counter()
    samples: dict[str, list[str]] = {}
    for shard in shards:
        for c in shard:
            freq[c.surface] += c.frequency
            ids = samples.setdefault(c.surface, [])
            for sid in c.sample_ids:
                if len(ids) < MAX_SAMPLE_IDS and sid not in ids:
                    ids.append(sid)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return [CandidateSeed(s, n, samples[s]) for s, n in ranked]


def write_candidates(candidates: Sequence[CandidateSeed], path: str | os.PathLike) -> None:
    lines = ["surface\tfrequency\tsample_ids"]
    lines += [f"{c.surface}\t{c.frequency}\t{','.join(c.sample_ids)}" for c in candidates]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_candidates(path: str | os.PathLike) -> list[CandidateSeed]:
    out: list[CandidateSeed] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or (lineno == 1 and line.startswith("surface\t")):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ParseError(path, lineno, f"expected 3 columns, found {len(cols)}")
            try:
                n = int(cols[1])
            except ValueError:
                raise ParseError(path, lineno, f"bad frequency {cols[1]!r}") from None
            out.append(CandidateSeed(cols[0], n, [s for s in cols[2].split(",") if s]))
    return out


# --- lexica -----------------------------------------------------------------

EXTRACTED = "extracted"
MANUAL = "manually-added"
_PROVENANCE_MARK = "# provenance: "


@dataclass
class SeedLexicon:
    category: Category
    entries: set[str] = field(default_factory=set)
    provenance: dict[str, str] = field(default_factory=dict)
    complete: bool = True

    def __post_init__(self):
        self.category = Category(self.category)
        for e in self.entries:
            self.provenance.setdefault(e, EXTRACTED)

    def add(self, token: str, origin: str = EXTRACTED) -> None:
        if not token or normalize(token) != token or len(token.split()) != 1:
            raise ValidationError(f"lexicon entry {token!r} is not a single normalized token")
        self.entries.add(token)
        self.provenance[token] = origin

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: object) -> bool:
        return token in self.entries

    def serialize(self) -> str:
        lines = [f"# category: {self.category.value}"]
        if not self.complete:
            lines.append("# status: incomplete")
        for origin in (EXTRACTED, MANUAL):
            block = sorted(e for e in self.entries if self.provenance.get(e, EXTRACTED) == origin)
            if block:
                lines.append(_PROVENANCE_MARK + origin)
                lines.extend(block)
        return "\n".join(lines) + "\n"


def save_lexicon(lexicon: SeedLexicon, path: str | os.PathLike) -> None:
    atomic_write_text(path, lexicon.serialize())


def load_lexicon(path: str | os.PathLike, category: Category | str | None = None) -> SeedLexicon:
    """Read a lexicon file: one token per line, ``#`` comments ignored.

    Entries are normalized on load. The ``# provenance:`` and
    ``# category:`` comments written by ``save_lexicon`` are honoured.
    """
    path = Path(path)
    origin = EXTRACTED
    found_category = None
    entries: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read lexicon {path}: {exc.strerror or exc}") from exc
    complete = True
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith(_PROVENANCE_MARK):
                    origin = line[len(_PROVENANCE_MARK) :].strip()
                elif line.startswith("# category:"):
                    found_category = line.split(":", 1)[1].strip()
                elif line == "# status: incomplete":
                    complete = False
                continue
            token = normalize(line)
            if len(token.split()) != 1:
                raise ParseError(path, lineno, f"lexicon entry {line!r} is not a single token")
            entries.setdefault(token, origin)
    cat = category or found_category
    if cat is None:
        raise ValidationError(f"{path}: lexicon category unknown; pass one explicitly")
    return SeedLexicon(Category(cat), set(entries), dict(entries), complete=complete)


# --- curation ---------------------------------------------------------------


@dataclass
class Curation:
    """Outcome of a curation session."""

    offensive: SeedLexicon
    hateful: SeedLexicon
    decisions: dict[str, Verdict]
    order: list[str]

    @property
    def pending(self) -> list[str]:
        return [s for s in self.order if self.decisions.get(s, Verdict.PENDING) is Verdict.PENDING]

    @property
    def complete(self) -> bool:
        return not self.pending

    def decisions_tsv(self) -> str:
        lines = [f"{s}\t{self.decisions.get(s, Verdict.PENDING).value}" for s in self.order]
        return "\n".join(lines) + ("\n" if lines else "")


def read_decisions(path: str | os.PathLike) -> dict[str, Verdict]:
    out: dict[str, Verdict] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ParseError(path, lineno, "expected 'surface<TAB>verdict'")
            try:
                out[cols[0]] = Verdict(cols[1])
            except ValueError:
                allowed = ", ".join(v.value for v in Verdict)
                raise ParseError(path, lineno, f"unknown verdict {cols[1]!r}; allowed: {allowed}") from None
    return out


def write_decisions(curation: Curation, path: str | os.PathLike) -> None:
    atomic_write_text(path, curation.decisions_tsv())


def curate(
    candidates: Sequence[CandidateSeed],
    decisions: Mapping[str, Verdict | str],
    manual: Mapping[str, Iterable[str]] | None = None,
) -> Curation:
    """Apply keep/drop verdicts to ranked candidates.

    ``manual`` optionally maps a category to extra hand-added tokens.
    Candidates without a verdict stay pending and both lexica are marked
    incomplete.
    """
    known = {c.surface for c in candidates}
    unknown = sorted(set(decisions) - known)
    if unknown:
        raise DataError(f"decisions reference unknown surface(s): {', '.join(unknown)}")
    verdicts = {s: Verdict(v) for s, v in decisions.items()}
    order = [c.surface for c in candidates]
    off = SeedLexicon(Category.OFFENSIVE)
    hs = SeedLexicon(Category.HATEFUL)
    for s in order:
        v = verdicts.get(s, Verdict.PENDING)
        if v is Verdict.OFFENSIVE:
            off.add(s)
        elif v is Verdict.HATEFUL:
            hs.add(s)
    for cat, tokens in (manual or {}).items():
        target = off if Category(cat) is Category.OFFENSIVE else hs
        for tok in tokens:
            target.add(normalize(tok), MANUAL)
    result = Curation(off, hs, verdicts, order)
    off.complete = hs.complete = result.complete
    return result


_KEYS = {
    "o": Verdict.OFFENSIVE,
    "h": Verdict.HATEFUL,
    "d": Verdict.DROP,
}


def interactive_curate(
    candidates: Sequence[CandidateSeed],
    decisions: Mapping[str, Verdict | str] | None = None,
    contexts: Mapping[str, str] | None = None,
    save: Callable[[Curation], None] | None = None,
    input_fn: Callable[[str], str] = input,
    print_fn: Callable[[str], None] = print,
) -> Curation:
    """Terminal review of unresolved candidates.

    Keys: ``o`` keep as offensive, ``h`` keep as hateful, ``d`` drop,
    ``u`` undo the previous verdict, ``q`` quit and save. ``save`` is called
    after every verdict so an interrupted session resumes where it stopped.
    ``contexts`` maps a sample tweet id to its text for display.
    """
    verdicts = {s: Verdict(v) for s, v in (decisions or {}).items()}
    queue = [c for c in candidates if verdicts.get(c.surface, Verdict.PENDING) is Verdict.PENDING]
    history: list[str] = []
    contexts = contexts or {}

    def snapshot() -> Curation:
        return curate(candidates, {s: v for s, v in verdicts.items() if v is not Verdict.PENDING})

    i = 0
    while i < len(queue):
        cand = queue[i]
        print_fn(f"[{i + 1}/{len(queue)}] {cand.surface}  (freq {cand.frequency})")
        for sid in cand.sample_ids:
            if sid in contexts:
                print_fn(f"    {sid}: {contexts[sid]}")
        key = input_fn("[o]ffensive [h]ateful [d]rop [u]ndo [q]uit > ").strip().lower()
        if key == "q":
            break
        if key == "u":
            if history:
                verdicts.pop(history.pop(), None)
                i -= 1
            else:
                print_fn("nothing to undo")
            continue
        if key not in _KEYS:
            print_fn(f"unknown key {key!r}")
            continue
        verdicts[cand.surface] = _KEYS[key]
        history.append(cand.surface)
        i += 1
        if save is not None:
            save(snapshot())
    result = snapshot()
    if save is not None:
        save(result)
    return result


# --- matching ---------------------------------------------------------------


@dataclass(frozen=True)
class MatchResult:
    offensive_hits: tuple[str, ...]
    hateful_hits: tuple[str, ...]
    trigger_present: bool

    @property
    def seeded(self) -> bool:
        return bool(self.offensive_hits or self.hateful_hits)


class Matcher:
    """Immutable token-exact matcher for the trigger and up to two lexica."""

    __slots__ = ("_table", "trigger", "_sizes", "_off", "_hs")

    def __init__(self, trigger: str, offensive: frozenset[str], hateful: frozenset[str]):
        table: dict[str, int] = {}
        table[trigger] = _accel.TRIGGER
        for tok in offensive:
            table[tok] = table.get(tok, 0) | _accel.OFFENSIVE
        for tok in hateful:
            table[tok] = table.get(tok, 0) | _accel.HATEFUL
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "trigger", trigger)
        object.__setattr__(self, "_off", offensive)
        object.__setattr__(self, "_hs", hateful)
        object.__setattr__(self, "_sizes", (len(offensive), len(hateful)))

    def __setattr__(self, name, value):
        raise AttributeError("Matcher is immutable")

    @property
    def sizes(self) -> tuple[int, int]:
        return self._sizes

    @property
    def offensive(self) -> frozenset[str]:
        return self._off

    @property
    def hateful(self) -> frozenset[str]:
        return self._hs

    def match(self, tokens: Sequence[str]) -> MatchResult:
        trig, off, hs = _accel.scan_tokens(list(tokens), self._table)
        return MatchResult(tuple(off), tuple(hs), bool(trig))


def compile_matcher(
    offensive: SeedLexicon, hateful: SeedLexicon | None = None, trigger: str = DEFAULT_TRIGGER
) -> Matcher:
    for lex in (offensive, hateful):
        if lex is not None and not lex.entries:
            raise ValidationError(f"empty lexicon ({lex.category.value})")
    if not trigger or len(trigger.split()) != 1:
        raise ValidationError(f"trigger must be a single token, got {trigger!r}")
    return Matcher(
        trigger,
        frozenset(offensive.entries),
        frozenset(hateful.entries) if hateful is not None else frozenset(),
    )


def match(matcher: Matcher, tokens: Sequence[str]) -> MatchResult:
    return matcher.match(tokens)
