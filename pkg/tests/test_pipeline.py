import json

import pytest
import yaml

from yaharvest.errors import StageError, ValidationError
from yaharvest.pipeline import PipelineManifest, run_pipeline, validate_manifest
from yaharvest.synthetic import make_workspace


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    return make_workspace(tmp_path_factory.mktemp("ws"), n_lines=800, epochs=3, dim=1 << 12)


def load(path):
    return PipelineManifest.load(path)


def edited(path, tmp_path, fn):
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    fn(raw)
    return PipelineManifest(raw, path.parent)


def test_complete_manifest_is_clean(workspace):
    assert validate_manifest(load(workspace)) == []


def test_prevalence_out_of_range(workspace, tmp_path):
    m = edited(workspace, tmp_path, lambda r: r["balance"].update(prevalence=1.5))
    assert "balance.prevalence: prevalence out of (0,1)" in validate_manifest(m)


def test_missing_seed(workspace, tmp_path):
    m = edited(workspace, tmp_path, lambda r: r["balance"].pop("rng_seed"))
    assert "balance.rng_seed: rng_seed required" in validate_manifest(m)
    m = edited(workspace, tmp_path, lambda r: r["train"].pop("seed"))
    assert "train.seed: rng_seed required" in validate_manifest(m)


def test_missing_corpus_named(workspace, tmp_path):
    m = edited(workspace, tmp_path, lambda r: r["paths"].update(corpus_positive="gone.jsonl"))
    assert validate_manifest(m) == ["paths.corpus_positive: file not found: gone.jsonl"]
    with pytest.raises(ValidationError, match="gone.jsonl"):
        run_pipeline(m, tmp_path / "out")


def test_gate_and_lexica_rules(workspace, tmp_path):
    def bad(r):
        r["gate"] = {"kind": "oracle"}
        r["paths"].pop("hs_lexicon")
        r["paths"].pop("decisions")

    diags = validate_manifest(edited(workspace, tmp_path, bad))
    assert "gate.kind: must be one of stub, checkpoint, external" in diags
    assert "paths: off_lexicon and hs_lexicon must be given together" in diags
    assert "paths.decisions: required when lexica are not provided" in diags


def test_unreadable_manifest(tmp_path):
    (tmp_path / "m.yaml").write_text("a: [\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="not valid YAML"):
        load(tmp_path / "m.yaml")


def test_run_with_lexica_skips_seeds(workspace, tmp_path):
    res = run_pipeline(load(workspace), tmp_path / "out")
    assert res.stages["seeds"] == "skipped (lexica provided)"
    assert all(s.startswith(("ran", "skipped")) for s in res.stages.values())
    log = json.loads((tmp_path / "out" / "run_log.json").read_text(encoding="utf-8"))
    assert set(log["inputs"]) >= {"corpus_positive", "train", "off_lexicon"}
    assert "models/offensive_warm.ckpt" in log["artifacts"]
    assert "error" not in log


def test_run_extracts_and_curates(workspace, tmp_path):
    m = edited(workspace, tmp_path, lambda r: [r["paths"].pop(k) for k in ("off_lexicon", "hs_lexicon")])
    res = run_pipeline(m, tmp_path / "out")
    assert res.stages["seeds"] == "ran"
    assert (tmp_path / "out" / "lexica" / "candidates.tsv").exists()


def test_stage_failure_keeps_partial_artifacts(workspace, tmp_path):
    def empty_hs(r):
        (tmp_path / "hs.txt").write_text("# category: hateful\n", encoding="utf-8")
        r["paths"]["hs_lexicon"] = str(tmp_path / "hs.txt")

    m = edited(workspace, tmp_path, empty_hs)
    with pytest.raises(StageError, match="harvest_positive") as info:
        run_pipeline(m, tmp_path / "out")
    assert info.value.exit_code == 1
    log = json.loads((tmp_path / "out" / "run_log.json").read_text(encoding="utf-8"))
    assert log["stages"]["harvest_positive"] == "failed" and "empty lexicon" in log["error"]
    assert "normalized/positive.jsonl" in log["artifacts"]


def test_rerun_after_delete_reproduces(workspace, tmp_path):
    a = run_pipeline(load(workspace), tmp_path / "a").artifacts
    b = run_pipeline(load(workspace), tmp_path / "a").artifacts
    assert a == b
