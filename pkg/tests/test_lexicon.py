import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yaharvest.errors import DataError, ValidationError
from yaharvest.lexicon import (
    Category,
    CandidateSeed,
    SeedLexicon,
    Verdict,
    compile_matcher,
    curate,
    extract_candidates,
    interactive_curate,
    load_lexicon,
    match,
    merge_candidate_counts,
    read_candidates,
    read_decisions,
    save_lexicon,
    write_candidates,
    write_decisions,
)
from yaharvest.normalizer import NormalizedTweet

TRIG = "يا"


def lex(cat, *words):
    return SeedLexicon(Category(cat), set(words))


def pairs(cands):
    return [(c.surface, c.frequency) for c in cands]


# --- extraction -------------------------------------------------------------


def test_extract_example():
    corpus = [["يا", "كلب", "انت"], ["قال", "يا", "كلب", "يا", "حيوان"]]
    assert pairs(extract_candidates(corpus)) == [("كلب", 2), ("حيوان", 1)]


def test_trigger_final_token():
    assert extract_candidates([["انت", "يا"]]) == []


def test_empty_corpus():
    assert extract_candidates([]) == []


def test_placeholders_and_trigger_excluded():
    corpus = [["يا", "USER"], ["يا", "يا", "كلب"], ["يا", "NUM"]]
    assert pairs(extract_candidates(corpus)) == [("كلب", 1)]


def test_tie_break_and_samples():
    tweets = [NormalizedTweet.from_text(str(i), t) for i, t in enumerate(["يا ب", "يا ا", "يا ب"] * 3)]
    cands = extract_candidates(tweets)
    assert pairs(cands) == [("ب", 6), ("ا", 3)]
    assert cands[0].sample_ids == ["0", "2", "3", "5", "6"]


tok = st.sampled_from(["يا", "كلب", "حيوان", "USER", "x", "y"])


@given(st.lists(st.lists(tok, max_size=8), max_size=10))
def test_frequency_total(corpus):
    cands = extract_candidates(corpus)
    successors = sum(
        1
        for toks in corpus
        for a, b in zip(toks, toks[1:])
        if a == TRIG and b != TRIG and b != "USER"
    )
    assert sum(c.frequency for c in cands) == successors


@given(st.lists(st.lists(tok, max_size=8), max_size=12), st.integers(0, 12))
def test_shard_merge_is_fold(corpus, cut):
    whole = extract_candidates(corpus)
    merged = merge_candidate_counts([extract_candidates(corpus[:cut]), extract_candidates(corpus[cut:])])
    assert pairs(merged) == pairs(whole)


def test_candidates_file_roundtrip(tmp_path):
    cands = [CandidateSeed("كلب", 2, ["1", "2"]), CandidateSeed("فنان", 1, [])]
    write_candidates(cands, tmp_path / "c.tsv")
    assert read_candidates(tmp_path / "c.tsv") == cands


# --- curation ---------------------------------------------------------------

CANDS = [CandidateSeed("كلب", 5, ["1"]), CandidateSeed("فنان", 3, ["2"]), CandidateSeed("حوثي", 2, ["3"])]


def test_curate_selects():
    result = curate(CANDS[:2], {"كلب": "offensive", "فنان": "drop"})
    assert result.offensive.entries == {"كلب"}
    assert result.complete and result.offensive.complete


def test_curate_empty_decisions_pending():
    result = curate(CANDS, {})
    assert not result.complete
    assert result.pending == ["كلب", "فنان", "حوثي"]
    assert len(result.offensive) == 0 and not result.offensive.complete
    assert "# status: incomplete" in result.offensive.serialize()


def test_curate_unknown_surface():
    with pytest.raises(DataError, match="unknown surface"):
        curate(CANDS, {"قمر": "drop"})


def test_manual_additions_carry_provenance(tmp_path):
    result = curate(CANDS, {"كلب": "offensive"}, manual={"hateful": ["إخوانجي"]})
    assert result.hateful.provenance == {"اخوانجي": "manually-added"}
    save_lexicon(result.hateful, tmp_path / "hs.txt")
    back = load_lexicon(tmp_path / "hs.txt")
    assert back.provenance == result.hateful.provenance and back.category is Category.HATEFUL


def test_replay_is_byte_identical(tmp_path):
    first = curate(CANDS, {"كلب": "offensive", "حوثي": "hateful", "فنان": "drop"})
    write_decisions(first, tmp_path / "dec.tsv")
    replay = curate(CANDS, read_decisions(tmp_path / "dec.tsv"))
    assert replay.offensive.serialize() == first.offensive.serialize()
    assert replay.hateful.serialize() == first.hateful.serialize()
    assert replay.decisions_tsv() == first.decisions_tsv()


def test_bad_verdict_in_file(tmp_path):
    (tmp_path / "d.tsv").write_text("كلب\tmaybe\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_decisions(tmp_path / "d.tsv")


def _scripted(keys):
    it = iter(keys)
    return lambda prompt: next(it)


def test_interactive_keys_and_undo():
    saves = []
    out = []
    result = interactive_curate(
        CANDS,
        contexts={"1": "يا كلب"},
        save=saves.append,
        input_fn=_scripted(["o", "d", "u", "x", "h", "h"]),
        print_fn=out.append,
    )
    assert result.offensive.entries == {"كلب"}
    assert result.hateful.entries == {"فنان", "حوثي"}
    assert result.complete
    assert any("يا كلب" in line for line in out)
    assert any("unknown key" in line for line in out)
    assert saves[-1].decisions_tsv() == result.decisions_tsv()


def test_interactive_quit_resumes():
    partial = interactive_curate(CANDS, input_fn=_scripted(["o", "q"]), print_fn=lambda s: None)
    assert partial.pending == ["فنان", "حوثي"]
    done = interactive_curate(
        CANDS,
        decisions={s: v for s, v in partial.decisions.items() if v is not Verdict.PENDING},
        input_fn=_scripted(["d", "h"]),
        print_fn=lambda s: None,
    )
    assert done.complete and done.offensive.entries == {"كلب"} and done.hateful.entries == {"حوثي"}


# --- lexicon files ----------------------------------------------------------


def test_lexicon_file_comments_and_normalization(tmp_path):
    (tmp_path / "off.txt").write_text("# my list\nكَلب\n\nحيوان\n", encoding="utf-8")
    lx = load_lexicon(tmp_path / "off.txt", "offensive")
    assert lx.entries == {"كلب", "حيوان"}


def test_lexicon_needs_category(tmp_path):
    (tmp_path / "x.txt").write_text("كلب\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="category"):
        load_lexicon(tmp_path / "x.txt")


def test_entry_must_be_normalized():
    with pytest.raises(ValidationError):
        lex("offensive").add("أحمد")


# --- matching ---------------------------------------------------------------


def test_match_examples():
    m = compile_matcher(lex("offensive", "كلب"), lex("hateful", "حوثي"))
    r = match(m, ["يا", "كلب"])
    assert r.offensive_hits == ("كلب",) and r.trigger_present
    r = match(m, ["كلبي", "يا"])
    assert r.offensive_hits == () and r.trigger_present
    r = match(m, ["يا", "كلب", "يا", "حوثي"])
    assert r.offensive_hits == ("كلب",) and r.hateful_hits == ("حوثي",)
    assert not match(m, ["كلب"]).trigger_present


def test_empty_lexicon_rejected():
    with pytest.raises(ValidationError, match="empty lexicon"):
        compile_matcher(lex("offensive"), lex("hateful", "حوثي"))


def test_sizes_352_38():
    off = lex("offensive", *[f"o{i}" for i in range(352)])
    hs = lex("hateful", *[f"h{i}" for i in range(38)])
    assert compile_matcher(off, hs).sizes == (352, 38)


def test_matcher_immutable():
    m = compile_matcher(lex("offensive", "كلب"))
    with pytest.raises(AttributeError):
        m.trigger = "x"
    assert [m.match(["يا", "كلب"]) for _ in range(3)] == [m.match(["يا", "كلب"])] * 3


def naive(tokens, off, hs, trigger):
    """Reference scan: plain set membership, dedup in first-seen order."""
    o, h = [], []
    for t in tokens:
        if t in off and t not in o:
            o.append(t)
        if t in hs and t not in h:
            h.append(t)
    return tuple(o), tuple(h), trigger in tokens


def run_oracle(cases: int, seed: int = 0) -> int:
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(60)] + ["يا", "كلب", "حوثي", "كلبي"]
    agree = 0
    for _ in range(cases):
        off = set(rng.sample(vocab, rng.randint(1, 12)))
        hs = set(rng.sample(vocab, rng.randint(1, 6)))
        trig = rng.choice(["يا", "w0"])
        m = compile_matcher(lex("offensive", *off), lex("hateful", *hs), trig)
        tokens = [rng.choice(vocab) for _ in range(rng.randint(0, 25))]
        r = m.match(tokens)
        agree += (r.offensive_hits, r.hateful_hits, r.trigger_present) == naive(tokens, off, hs, trig)
    return agree


def test_oracle_equivalence():
    assert run_oracle(10_000) == 10_000
