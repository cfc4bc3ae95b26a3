"""One-manifest orchestration of the whole harvest + training workflow.

Manifest keys (YAML)::

    trigger: يا                      # optional, default يا
    task: offensive                 # offensive | hate_speech
    paths:
      output_dir: out               # relative paths resolve against the manifest's directory
      corpus_positive: seeded.jsonl # raw tweets for the positive harvest
      corpus_negative: clean.jsonl  # raw tweets for the clean-pool harvest
      train: train.tsv              # gold TRAIN split for ``task``
      dev: dev.tsv                  # optional gold DEV split
      off_lexicon: off.txt          # optional; with hs_lexicon, skips extraction + curation
      hs_lexicon: hs.txt
      decisions: decisions.tsv      # curation verdicts, required without lexica
      sentiment: sentiment.tsv      # optional POS/NEG data -> gate model / warm-start source
      gate_checkpoint: senti.ckpt   # optional pre-trained sentiment checkpoint
      exclude_ids: gold_ids.txt     # optional, one id per line, kept out of both pools
    gate:
      kind: stub | checkpoint | external
      threshold: null               # optional confidence floor
      negative_markers: [...]       # stub only
      command: "scorer {in} {out}"  # external only
      scores: batch_out.tsv         # external only, pre-computed alternative to command
    balance:
      prevalence: 0.55              # or null to take the whole clean pool
      rng_seed: 42
      merge: concat                 # concat | augmented_only
    train:
      seed: 42
      epochs: 10
      learning_rate: 2.0
      batch_size: 32
      warm_start: true
      features: {orders: [2, 3, 4, 5], dim: 262144, seed: 0}
      affect: {seed: 7, epochs: 10}  # sentiment model, when trained from paths.sentiment
"""

from __future__ import annotations

import json
import logging
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import yaml

from .affect_gate import CheckpointGate, ExternalScorer, TokenRuleGate, train_affect
from .augmentor import balance, harvest_negative, harvest_positive, merge_with_gold, pool_dataset
from .corpus_io import (
    POSITIVE_LABEL,
    Dataset,
    JsonlReader,
    Task,
    atomic_write_text,
    file_fingerprint,
    read_labeled_tsv,
    write_dataset,
    write_jsonl,
)
from .errors import StageError, ValidationError, YaharvestError
from .experiment import (
    affect_distribution,
    distribution_report,
    evaluate,
    metrics_json,
    predict,
    results_table,
    top_unigrams,
    train_task,
)
from .features import FeatureSpec
from .lexicon import (
    DEFAULT_TRIGGER,
    Category,
    compile_matcher,
    curate,
    extract_candidates,
    load_lexicon,
    read_decisions,
    save_lexicon,
    write_candidates,
    write_decisions,
)
from .model import TrainConfig, load_checkpoint, save_checkpoint
from .normalizer import NormalizedTweet, normalize_stream

log = logging.getLogger(__name__)

INPUT_PATHS = (
    "corpus_positive",
    "corpus_negative",
    "train",
    "dev",
    "off_lexicon",
    "hs_lexicon",
    "decisions",
    "sentiment",
    "gate_checkpoint",
    "exclude_ids",
)
REQUIRED_PATHS = ("output_dir", "corpus_positive", "corpus_negative", "train")


@dataclass
class PipelineManifest:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineManifest":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ValidationError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
        except yaml.YAMLError as exc:
            raise ValidationError(f"manifest {path} is not valid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError(f"manifest {path} must be a mapping")
        return cls(raw, path.resolve().parent)

    def section(self, name: str) -> dict:
        value = self.raw.get(name) or {}
        return value if isinstance(value, dict) else {}

    def path(self, key: str) -> Path | None:
        value = self.section("paths").get(key)
        if value in (None, ""):
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def trigger(self) -> str:
        return self.raw.get("trigger") or DEFAULT_TRIGGER

    @property
    def task(self) -> Task:
        return Task.parse(self.raw.get("task", "offensive"))


def validate_manifest(manifest: PipelineManifest | dict) -> list[str]:
    """Every problem that would stop ``run_pipeline``; empty means runnable."""
    if isinstance(manifest, dict):
        manifest = PipelineManifest(manifest)
    m = manifest
    diags: list[str] = []
    paths = m.section("paths")
    for key in REQUIRED_PATHS:
        if not paths.get(key):
            diags.append(f"paths.{key}: required")
    for key in INPUT_PATHS:
        p = m.path(key)
        if p is not None and not p.exists():
            diags.append(f"paths.{key}: file not found: {paths[key]}")
    try:
        task = m.task
        if task not in POSITIVE_LABEL:
            diags.append(f"task: must be offensive or hate_speech, got {task.value}")
    except ValidationError as exc:
        diags.append(f"task: {exc}")
    trig = m.trigger
    if not isinstance(trig, str) or len(trig.split()) != 1:
        diags.append("trigger: must be a single token")

    have_off, have_hs = bool(paths.get("off_lexicon")), bool(paths.get("hs_lexicon"))
    if have_off != have_hs:
        diags.append("paths: off_lexicon and hs_lexicon must be given together")
    if not (have_off and have_hs) and not paths.get("decisions"):
        diags.append("paths.decisions: required when lexica are not provided")

    gate = m.section("gate")
    kind = gate.get("kind")
    if kind not in ("stub", "checkpoint", "external"):
        diags.append("gate.kind: must be one of stub, checkpoint, external")
    elif kind == "stub" and not gate.get("negative_markers"):
        diags.append("gate.negative_markers: required for the stub gate")
    elif kind == "checkpoint" and not (paths.get("gate_checkpoint") or paths.get("sentiment")):
        diags.append("gate: checkpoint gate needs paths.gate_checkpoint or paths.sentiment")
    elif kind == "external" and not (gate.get("command") or gate.get("scores")):
        diags.append("gate: external gate needs command or scores")
    thr = gate.get("threshold")
    if thr is not None and not (isinstance(thr, (int, float)) and 0.0 <= thr <= 1.0):
        diags.append("gate.threshold: must be in [0,1]")

    bal = m.section("balance")
    prev = bal.get("prevalence")
    if prev is not None and not (isinstance(prev, (int, float)) and 0.0 < prev < 1.0):
        diags.append("balance.prevalence: prevalence out of (0,1)")
    if not isinstance(bal.get("rng_seed"), int):
        diags.append("balance.rng_seed: rng_seed required")
    if bal.get("merge", "concat") not in ("concat", "augmented_only"):
        diags.append("balance.merge: must be concat or augmented_only")

    train = m.section("train")
    if not isinstance(train.get("seed"), int):
        diags.append("train.seed: rng_seed required")
    needs_affect = paths.get("sentiment") and not paths.get("gate_checkpoint")
    if needs_affect and not isinstance((train.get("affect") or {}).get("seed"), int):
        diags.append("train.affect.seed: rng_seed required")
    try:
        _feature_spec(train)
    except (ValidationError, TypeError, ValueError) as exc:
        diags.append(f"train.features: {exc}")
    return diags


def _feature_spec(train: dict) -> FeatureSpec | None:
    feats = train.get("features")
    if not feats:
        return None
    base = FeatureSpec()
    return FeatureSpec(
        tuple(feats.get("orders", base.orders)),
        int(feats.get("dim", base.dim)),
        int(feats.get("seed", base.seed)),
        feats.get("norm", base.norm),
    )


def _train_config(section: dict, spec: FeatureSpec | None, jobs: int = 1) -> TrainConfig:
    return TrainConfig(
        seed=section["seed"],
        epochs=int(section.get("epochs", 20)),
        learning_rate=float(section.get("learning_rate", 2.0)),
        batch_size=int(section.get("batch_size", 32)),
        l2=float(section.get("l2", 0.0)),
        feature_spec=spec,
        transfer_body=bool(section.get("transfer_body", True)),
        jobs=jobs,
    )


@dataclass
class RunResult:
    output_dir: Path
    stages: dict[str, str]
    artifacts: dict[str, str]


def _dump_json(obj: Any, path: Path) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def run_pipeline(
    manifest: PipelineManifest,
    output_dir: str | os.PathLike | None = None,
    jobs: int = 1,
) -> RunResult:
    """Run every stage, writing all intermediate artifacts and ``run_log.json``.

    Output bytes depend only on the manifest and the input files.
    """
    diags = validate_manifest(manifest)
    if diags:
        raise ValidationError("invalid manifest:\n  " + "\n  ".join(diags))
    m = manifest
    out = Path(output_dir) if output_dir is not None else m.path("output_dir")
    assert out is not None
    for sub in ("normalized", "lexica", "pools", "data", "models", "predictions", "metrics", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    stages: dict[str, str] = {}
    task = m.task
    trigger = m.trigger
    gate_cfg = m.section("gate")
    bal = m.section("balance")
    train_cfg = m.section("train")
    spec = _feature_spec(train_cfg)
    state: dict[str, Any] = {}

    def stage(name: str, fn: Callable[[], str | None]) -> None:
        log.info("stage %s", name)
        try:
            stages[name] = fn() or "ran"
        except YaharvestError as exc:
            _write_log(out, m, stages | {name: "failed"}, error=f"{name}: {exc}")
            raise StageError(name, exc) from exc

    def do_normalize():
        for key in ("corpus_positive", "corpus_negative"):
            dest = out / "normalized" / f"{key.split('_')[1]}.jsonl"
            tweets = normalize_stream(JsonlReader(m.path(key)))
            write_jsonl((t.raw() for t in tweets), dest)
        state["train"] = read_labeled_tsv(m.path("train"), task)
        state["dev"] = read_labeled_tsv(m.path("dev"), task) if m.path("dev") else None

    def do_seeds():
        if m.path("off_lexicon") and m.path("hs_lexicon"):
            state["off"] = load_lexicon(m.path("off_lexicon"), Category.OFFENSIVE)
            state["hs"] = load_lexicon(m.path("hs_lexicon"), Category.HATEFUL)
            save_lexicon(state["off"], out / "lexica" / "offensive.txt")
            save_lexicon(state["hs"], out / "lexica" / "hateful.txt")
            return "skipped (lexica provided)"
        train: Dataset = state["train"]
        positive = POSITIVE_LABEL[task]
        corpus = (NormalizedTweet.from_text(t.id, t.text) for t, lab in train.records if lab == positive)
        cands = extract_candidates(corpus, trigger)
        write_candidates(cands, out / "lexica" / "candidates.tsv")
        result = curate(cands, read_decisions(m.path("decisions")))
        if not result.complete:
            log.warning("%d candidate(s) still pending curation", len(result.pending))
        write_decisions(result, out / "lexica" / "decisions.tsv")
        save_lexicon(result.offensive, out / "lexica" / "offensive.txt")
        save_lexicon(result.hateful, out / "lexica" / "hateful.txt")
        state["off"], state["hs"] = result.offensive, result.hateful
        return None

    def do_gate():
        kind = gate_cfg["kind"]
        ckpt = None
        if m.path("gate_checkpoint"):
            ckpt = load_checkpoint(m.path("gate_checkpoint"))
        elif m.path("sentiment"):
            affect = train_cfg.get("affect") or {}
            senti = read_labeled_tsv(m.path("sentiment"), Task.SENTIMENT)
            ckpt = train_affect(senti, _train_config(affect, spec, jobs))
            save_checkpoint(ckpt, out / "models" / "sentiment.ckpt")
        state["affect_ckpt"] = ckpt
        if kind == "stub":
            state["gate"] = TokenRuleGate(gate_cfg["negative_markers"])
        elif kind == "checkpoint":
            state["gate"] = CheckpointGate(ckpt)
        else:
            scores = gate_cfg.get("scores")
            if scores and not Path(scores).is_absolute():
                scores = m.base_dir / scores
            state["gate"] = ExternalScorer(out / "scorer", gate_cfg.get("command"), scores)
        return f"ran ({kind})"

    def exclude() -> set[str]:
        p = m.path("exclude_ids")
        if p is None:
            return set()
        return {ln.strip() for ln in p.read_text(encoding="utf-8").splitlines() if ln.strip()}

    def normalized(key: str):
        src = out / "normalized" / f"{key}.jsonl"
        return (NormalizedTweet.from_normalized(t.id, t.text) for t in JsonlReader(src))

    def do_harvest_positive():
        matcher = compile_matcher(state["off"], state["hs"], trigger)
        state["matcher"] = matcher
        pools, report = harvest_positive(
            normalized("positive"), matcher, state["gate"], gate_cfg.get("threshold"), exclude()
        )
        _dump_json(report.to_dict(), out / "reports" / "harvest_positive.json")
        for t, recs in pools.items():
            write_dataset(pool_dataset(recs, t), out / "pools" / f"positive_{t.value}.tsv")
            _write_evidence(recs, out / "pools" / f"positive_{t.value}.evidence.jsonl")
        state["pos_pools"] = pools

    def do_harvest_negative():
        pools, report = harvest_negative(
            normalized("negative"), state["matcher"], state["gate"], gate_cfg.get("threshold"), exclude(),
            tasks=(task,),
        )
        _dump_json(report.to_dict(), out / "reports" / "harvest_negative.json")
        recs = pools[task]
        write_dataset(pool_dataset(recs, task), out / "pools" / "negative.tsv")
        _write_evidence(recs, out / "pools" / "negative.evidence.jsonl")
        state["neg_pool"] = recs

    def do_balance():
        positives = pool_dataset(state["pos_pools"][task], task)
        negatives = pool_dataset(state["neg_pool"], task)
        aug = balance(positives, negatives, bal.get("prevalence"), bal["rng_seed"])
        write_dataset(aug, out / "data" / "aug_train.tsv")
        _dump_json(aug.meta, out / "data" / "aug_train.meta.json")
        merged = merge_with_gold(state["train"], aug, bal.get("merge", "concat"))
        write_dataset(merged, out / "data" / "aug_train_merged.tsv")
        state["aug"], state["merged"] = aug, merged

    def do_train():
        cfg = _train_config(train_cfg, spec, jobs)
        warm_src = state.get("affect_ckpt") if train_cfg.get("warm_start", True) else None
        warm_cfg = _train_config(train_cfg, None, jobs)
        models = {"scratch": train_task(state["train"], cfg, dev=state["dev"])}
        if warm_src is not None:
            models["warm"] = train_task(state["train"], warm_cfg, init=warm_src, dev=state["dev"])
            models["warm_aug"] = train_task(state["merged"], warm_cfg, init=warm_src, dev=state["dev"])
        else:
            models["scratch_aug"] = train_task(state["merged"], cfg, dev=state["dev"])
        for name, ckpt in models.items():
            save_checkpoint(ckpt, out / "models" / f"{task.value}_{name}.ckpt")
        state["models"] = models

    def do_eval():
        dev = state["dev"]
        if dev is None:
            return "skipped (no dev split)"
        results = {}
        for name, ckpt in state["models"].items():
            pred = predict(ckpt, dev.tweets)
            write_dataset(pred, out / "predictions" / f"dev_{name}.tsv")
            metrics = evaluate(dev, pred)
            atomic_write_text(out / "metrics" / f"dev_{name}.json", metrics_json(metrics))
            results[name] = {(task.value, "dev"): metrics}
        atomic_write_text(out / "metrics" / "results.txt", results_table(results))
        return None

    def do_reports():
        splits = {"train": state["train"]}
        if state["dev"] is not None:
            splits["dev"] = state["dev"]
        splits["aug_train"] = state["aug"]
        dist = distribution_report(splits)
        atomic_write_text(out / "reports" / "distribution.txt", dist.to_text())
        _dump_json(dist.to_dict(), out / "reports" / "distribution.json")
        affect = affect_distribution(state["train"], state["gate"])
        atomic_write_text(out / "reports" / "affect.txt", affect.to_text())
        _dump_json(affect.to_dict(), out / "reports" / "affect.json")
        top = top_unigrams(state["aug"], [state["off"], state["hs"]], k=int(m.raw.get("top_k", 50)))
        atomic_write_text(
            out / "reports" / "unigrams.tsv", "token\tcount\n" + "".join(f"{t}\t{n}\n" for t, n in top)
        )

    stage("normalize", do_normalize)
    stage("seeds", do_seeds)
    stage("gate", do_gate)
    stage("harvest_positive", do_harvest_positive)
    stage("harvest_negative", do_harvest_negative)
    stage("balance", do_balance)
    stage("train", do_train)
    stage("eval", do_eval)
    stage("reports", do_reports)
    if (out / "scorer").exists():
        shutil.rmtree(out / "scorer")
    artifacts = _write_log(out, m, stages)
    return RunResult(out, stages, artifacts)


def _write_evidence(records, path: Path) -> None:
    lines = [json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for r in records]
    atomic_write_text(path, "".join(lines))


def _write_log(out: Path, m: PipelineManifest, stages: dict[str, str], error: str | None = None) -> dict[str, str]:
    inputs = {}
    for key in INPUT_PATHS:
        p = m.path(key)
        if p is not None and p.exists():
            inputs[key] = {"path": m.section("paths")[key], "sha256": file_fingerprint(p)}
    artifacts = {
        str(p.relative_to(out)): file_fingerprint(p)
        for p in sorted(out.rglob("*"))
        if p.is_file() and p.name != "run_log.json"
    }
    log_obj = {"inputs": inputs, "stages": stages, "artifacts": artifacts}
    if error:
        log_obj["error"] = error
    _dump_json(log_obj, out / "run_log.json")
    return artifacts
