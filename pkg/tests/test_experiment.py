import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from yaharvest.affect_gate import TokenRuleGate, prepare, train_affect
from yaharvest.corpus_io import Dataset, RawTweet, Task
from yaharvest.errors import DataError, ValidationError
from yaharvest.experiment import (
    affect_distribution,
    compute_metrics,
    distribution_report,
    evaluate,
    metrics_json,
    predict,
    results_table,
    top_unigrams,
    train_task,
    whole_percent,
)
from yaharvest.features import FeatureSpec
from yaharvest.lexicon import Category, SeedLexicon
from yaharvest.model import TrainConfig, checkpoint_bytes
from yaharvest.normalizer import NormalizedTweet

from conftest import dataset
from fixtures import transfer_fixture
from reference import brute_metrics

SPEC = FeatureSpec(dim=1 << 12)


# --- metrics ----------------------------------------------------------------


def test_worked_example_half():
    m = compute_metrics(["O", "O", "N", "N"], ["O", "N", "O", "N"])
    assert m.per_class["O"][2] == m.per_class["N"][2] == 0.5
    assert m.macro_f1 == 0.5 and m.accuracy == 0.5


def test_worked_example_all_negative():
    m = compute_metrics(["O", "N", "N", "N"], ["N", "N", "N", "N"])
    assert m.per_class["N"][2] == pytest.approx(6 / 7, abs=1e-12)
    assert m.per_class["O"] == (0.0, 0.0, 0.0)
    assert m.macro_f1 == pytest.approx(3 / 7, abs=1e-12) and round(m.macro_f1, 4) == 0.4286
    assert m.accuracy == 0.75


def test_perfect():
    m = compute_metrics(list("abab"), list("abab"))
    assert m.accuracy == 1.0 and m.macro_f1 == 1.0


def random_vectors(n_cases, seed=0):
    rng = random.Random(seed)
    for _ in range(n_cases):
        k = rng.randint(2, 4)
        labels = [f"c{i}" for i in range(k)]
        n = rng.randint(1, 200)
        yield [rng.choice(labels) for _ in range(n)], [rng.choice(labels) for _ in range(n)]


def test_metric_oracle():
    worst = 0.0
    for gold, pred in random_vectors(50):
        m = compute_metrics(gold, pred)
        acc, per, macro = brute_metrics(gold, pred)
        worst = max(worst, abs(m.accuracy - acc), abs(m.macro_f1 - macro))
        for c, (p, r, f) in per.items():
            worst = max(worst, *(abs(a - b) for a, b in zip(m.per_class[c], (p, r, f))))
    assert worst <= 1e-12


@given(st.lists(st.tuples(st.sampled_from("AB"), st.sampled_from("AB")), min_size=1, max_size=50))
def test_label_swap_symmetry(pairs):
    gold, pred = zip(*pairs)
    swap = {"A": "B", "B": "A"}
    a = compute_metrics(gold, pred)
    b = compute_metrics([swap[g] for g in gold], [swap[p] for p in pred])
    assert a.accuracy == b.accuracy
    assert a.macro_f1 == pytest.approx(b.macro_f1, abs=1e-15)


def test_evaluate_pairs_by_id():
    gold = dataset("offensive", [("a", "OFF"), ("b", "NOT_OFF")])
    pred = Dataset(Task.OFFENSIVE, list(reversed(gold.records)))
    assert evaluate(gold, pred).accuracy == 1.0


def test_evaluate_id_mismatch():
    gold = dataset("offensive", [("a", "OFF"), ("b", "NOT_OFF")])
    pred = dataset("offensive", [("a", "OFF")], prefix="z")
    with pytest.raises(DataError, match=r"missing 2 \['r0', 'r1'\], extra 1 \['z0'\]"):
        evaluate(gold, pred)


def test_metrics_outputs():
    m = compute_metrics(["OFF", "NOT_OFF"], ["OFF", "OFF"])
    assert '"macro_f1"' in metrics_json(m)
    table = results_table({"scratch": {("offensive", "dev"): m}, "warm": {}})
    lines = table.splitlines()
    assert lines[0].split() == ["model", "dev/offensive", "Acc", "dev/offensive", "F1"]
    assert lines[2].split() == ["scratch", "50.00", "33.33"]
    assert lines[3].split() == ["warm", "--", "--"]


# --- distribution -----------------------------------------------------------


def shaped(total, positives, task="offensive", pos="OFF", neg="NOT_OFF"):
    return Dataset(Task(task), [(RawTweet(str(i), ""), pos if i < positives else neg) for i in range(total)])


def test_whole_percent_shares():
    rep = distribution_report({"train": shaped(6994, 1409)})
    assert rep.rows[0].percentages == {"NOT_OFF": 80, "OFF": 20}
    rep = distribution_report({"train": shaped(6994, 361, "hate_speech", "HS", "NOT_HS")})
    assert rep.rows[0].percentages["HS"] == 5


def test_empty_split():
    with pytest.raises(DataError, match="empty split: dev"):
        distribution_report({"train": shaped(3, 1), "dev": shaped(0, 0)})


def test_mixed_tasks():
    with pytest.raises(ValidationError):
        distribution_report({"a": shaped(3, 1), "b": shaped(3, 1, "hate_speech", "HS", "NOT_HS")})


@pytest.mark.parametrize("c,t,p", [(1, 200, 1), (1, 8, 13), (5, 200, 3), (1409, 6994, 20), (361, 6994, 5), (3, 3, 100)])
def test_whole_percent(c, t, p):
    assert whole_percent(c, t) == p


@given(st.integers(1, 5000), st.data())
def test_report_is_recomputed(total, data):
    pos = data.draw(st.integers(0, total))
    row = distribution_report({"x": shaped(total, pos)}).rows[0]
    assert sum(row.counts.values()) == row.total
    assert row.percentages["OFF"] == whole_percent(row.counts["OFF"], row.total)
    assert abs(row.percentages["OFF"] - 100 * pos / total) <= 0.5


def test_report_text_and_dict():
    rep = distribution_report({"train": shaped(10, 2)})
    assert rep.to_dict()["rows"][0] == {
        "split": "train", "total": 10, "counts": {"NOT_OFF": 8, "OFF": 2}, "percent": {"NOT_OFF": 80, "OFF": 20}
    }
    assert "20%" in rep.to_text()


# --- affect breakdown and unigrams -------------------------------------------


def test_affect_distribution_planted():
    rows = [("يا قذر", "OFF")] * 7 + [("يا جميل", "OFF")] * 3 + [("يا قذر", "NOT_OFF")] * 2 + [("x", "NOT_OFF")] * 8
    out = affect_distribution(dataset("offensive", rows), TokenRuleGate(["قذر"]), batch_size=3)
    assert out.counts == {"NOT_OFF": {"negative": 2, "positive": 8}, "OFF": {"negative": 7, "positive": 3}}
    fr = out.fractions()
    assert fr["OFF"] == {"negative": 0.7, "positive": 0.3}
    assert all(sum(v.values()) == pytest.approx(1.0) for v in fr.values())


def test_affect_all_negative():
    out = affect_distribution(dataset("offensive", [("قذر", "OFF")] * 4), TokenRuleGate(["قذر"]))
    assert out.fractions() == {"OFF": {"negative": 1.0, "positive": 0.0}}


def test_top_unigrams_example():
    data = dataset("offensive", [("يا كلب قذر", "OFF"), ("كلب", "OFF"), ("قذر قذر", "OFF"), ("جميل", "NOT_OFF")])
    off = SeedLexicon(Category.OFFENSIVE, {"كلب"})
    assert top_unigrams(data, [off], k=50) == [("قذر", 3), ("يا", 1)]
    assert top_unigrams(data, [off], k=0) == []
    assert top_unigrams(data, [{"يا", "كلب", "قذر"}]) == []


def test_top_unigrams_drops_placeholders_and_punctuation():
    data = dataset("offensive", [("@x يا !! 12", "OFF")])
    assert top_unigrams(data) == [("يا", 1)]


# --- training ---------------------------------------------------------------


def fx_data():
    fx = transfer_fixture()
    return (
        dataset("sentiment", fx.sentiment),
        dataset("offensive", fx.train),
        dataset("offensive", fx.test, prefix="h"),
    )


def test_zero_epoch_warm_start_shares_features():
    senti, train, _ = fx_data()
    src = train_affect(senti, TrainConfig(seed=7, epochs=1, feature_spec=SPEC))
    warm = train_task(train, TrainConfig(seed=1, epochs=0), init=src)
    probe = [f"w{i} يا كلب" for i in range(20)]
    assert warm.feature_spec == src.feature_spec
    assert (warm.features(probe) != src.features(probe)).nnz == 0
    assert warm.training_meta["init"] == "warm:sentiment"


def test_incompatible_override():
    senti, train, _ = fx_data()
    src = train_affect(senti, TrainConfig(seed=7, epochs=1, feature_spec=SPEC))
    with pytest.raises(ValidationError, match="incompatible"):
        train_task(train, TrainConfig(seed=1, feature_spec=FeatureSpec(dim=1 << 10)), init=src)


def test_scratch_and_warm_differ():
    senti, train, _ = fx_data()
    src = train_affect(senti, TrainConfig(seed=7, epochs=2, feature_spec=SPEC))
    a = train_task(train, TrainConfig(seed=1, epochs=2, feature_spec=SPEC))
    b = train_task(train, TrainConfig(seed=1, epochs=2), init=src)
    assert checkpoint_bytes(a) != checkpoint_bytes(b)


def test_weights_only_warm_start():
    senti, train, _ = fx_data()
    src = train_affect(senti, TrainConfig(seed=7, epochs=2, feature_spec=SPEC))
    ck = train_task(train, TrainConfig(seed=1, epochs=2, transfer_body=False), init=src)
    assert ck.body is None and ck.feature_spec == SPEC


def test_single_class_task():
    with pytest.raises(DataError, match="single-class"):
        train_task(dataset("offensive", [("a", "OFF"), ("b", "OFF")]), TrainConfig(seed=0))


def test_best_epoch_selection(tmp_path):
    _, train, test = fx_data()
    ck = train_task(train, TrainConfig(seed=42, epochs=6, feature_spec=SPEC), dev=test, checkpoint_dir=tmp_path)
    hist = ck.training_meta["dev_macro_f1"]
    assert len(hist) == 6 and len(list(tmp_path.glob("epoch-*.ckpt"))) == 6
    best = ck.training_meta["best_epoch"]
    assert hist[best - 1] == max(hist) and hist.index(max(hist)) == best - 1
    assert evaluate(test, predict(ck, test.tweets)).macro_f1 == max(hist)


def test_predict_order_and_empty():
    _, train, test = fx_data()
    ck = train_task(train, TrainConfig(seed=0, epochs=3, feature_spec=SPEC))
    assert len(predict(ck, [])) == 0
    a, b = predict(ck, test.tweets), predict(ck, test.tweets)
    assert a == b and a.ids == test.ids


def test_saturated_model_reproduces_train_labels():
    _, train, _ = fx_data()
    ck = train_task(train, TrainConfig(seed=0, epochs=60, feature_spec=SPEC))
    assert predict(ck, train.tweets).labels == train.labels
