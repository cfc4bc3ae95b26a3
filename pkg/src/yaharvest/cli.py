"""``yaharvest`` command line: one subcommand per pipeline stage plus ``run``.

Exit codes: 0 success, 1 usage or validation error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .affect_gate import CheckpointGate, ExternalScorer, TokenRuleGate, train_affect
from .augmentor import (
    HarvestAborted,
    balance,
    harvest_negative,
    harvest_positive,
    merge_with_gold,
    pool_dataset,
)
from .corpus_io import (
    Dataset,
    JsonlReader,
    Task,
    atomic_write_text,
    read_labeled_tsv,
    write_dataset,
)
from .errors import DataError, ValidationError, YaharvestError
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
    interactive_curate,
    load_lexicon,
    read_candidates,
    read_decisions,
    save_lexicon,
    write_candidates,
    write_decisions,
)
from .model import TrainConfig, load_checkpoint, save_checkpoint
from .normalizer import NormalizedTweet, normalize, normalize_stream
from .pipeline import PipelineManifest, run_pipeline, validate_manifest

log = logging.getLogger("yaharvest")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for bad data."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prevalence(value: str) -> float | None:
    if value == "all":
        return None
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'all', got {value!r}") from None


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _labeled_or_raw(path: str) -> list:
    """Tweets from a JSONL corpus or a labeled TSV (labels dropped)."""
    if path.endswith(".jsonl"):
        return list(JsonlReader(path))
    return read_labeled_tsv(path).tweets


def _read_ids(path: str | None) -> set[str]:
    if not path:
        return set()
    with open(path, encoding="utf-8") as fh:
        return {ln.strip() for ln in fh if ln.strip()}


# --- subcommands ------------------------------------------------------------


def cmd_normalize(args) -> int:
    src = open(args.input, encoding="utf-8") if args.input else sys.stdin
    dst = open(args.output, "w", encoding="utf-8", newline="\n") if args.output else sys.stdout
    try:
        if args.jsonl:
            reader = JsonlReader(args.input or "/dev/stdin", on_error=args.on_error)
            for t in normalize_stream(reader):
                dst.write(json.dumps({"id": t.id, "text": t.text}, ensure_ascii=False) + "\n")
        else:
            for line in src:
                dst.write(" ".join(NormalizedTweet.from_text("", line).tokens) + "\n")
    finally:
        if src is not sys.stdin:
            src.close()
        if dst is not sys.stdout:
            dst.close()
    return EXIT_OK


def cmd_extract_seeds(args) -> int:
    trigger = normalize(args.trigger)
    if args.labels:
        data = read_labeled_tsv(args.labels)
        wanted = set(args.positive_label or [])
        if wanted - set(data.label_set):
            raise ValidationError(f"--positive-label {sorted(wanted)} not in {data.label_set}")
        keep = {t.id for t, lab in data.records if not wanted or lab in wanted}
        tweets = [t for t in (_labeled_or_raw(args.input) if args.input else data.tweets) if t.id in keep]
    elif args.input:
        tweets = _labeled_or_raw(args.input)
    else:
        raise ValidationError("extract-seeds needs --in and/or --labels")
    cands = extract_candidates((NormalizedTweet.from_text(t.id, t.text) for t in tweets), trigger)
    write_candidates(cands, args.out)
    log.info("%d candidate(s) written to %s", len(cands), args.out)
    return EXIT_OK


def cmd_curate(args) -> int:
    cands = read_candidates(args.candidates)
    decisions_path = Path(args.decisions)
    decisions = read_decisions(decisions_path) if decisions_path.exists() else {}
    manual = {}
    if args.add_offensive:
        manual[Category.OFFENSIVE] = args.add_offensive
    if args.add_hateful:
        manual[Category.HATEFUL] = args.add_hateful

    if args.interactive:
        contexts = {}
        if args.corpus:
            wanted = {sid for c in cands for sid in c.sample_ids}
            contexts = {t.id: t.text for t in _labeled_or_raw(args.corpus) if t.id in wanted}
        interactive_curate(cands, decisions, contexts, save=lambda c: write_decisions(c, decisions_path))
        decisions = read_decisions(decisions_path)
    elif not decisions_path.exists():
        raise ValidationError(f"decisions file not found: {decisions_path} (use --interactive to create it)")

    result = curate(cands, decisions, manual)
    write_decisions(result, decisions_path)
    out_dir = Path(args.out_dir)
    save_lexicon(result.offensive, out_dir / "offensive.txt")
    save_lexicon(result.hateful, out_dir / "hateful.txt")
    print(
        f"offensive={len(result.offensive)} hateful={len(result.hateful)} pending={len(result.pending)}",
        file=sys.stderr,
    )
    return EXIT_OK


def _build_gate(args, workdir: Path):
    if args.gate == "stub":
        if not args.markers:
            raise ValidationError("--gate stub needs --markers")
        return TokenRuleGate(args.markers)
    if args.gate == "checkpoint":
        if not args.checkpoint:
            raise ValidationError("--gate checkpoint needs --checkpoint")
        return CheckpointGate(load_checkpoint(args.checkpoint))
    if not (args.scorer_cmd or args.scores):
        raise ValidationError("--gate external needs --scorer-cmd or --scores")
    return ExternalScorer(workdir, args.scorer_cmd, args.scores)


def cmd_harvest(args) -> int:
    off = load_lexicon(args.off_lexicon, Category.OFFENSIVE)
    hs = load_lexicon(args.hs_lexicon, Category.HATEFUL)
    matcher = compile_matcher(off, hs, normalize(args.trigger))
    gate = _build_gate(args, Path(args.out).parent / ".scorer")
    corpus = normalize_stream(JsonlReader(args.corpus, on_error=args.on_error))
    task = Task.parse(args.task)
    if task not in (Task.OFFENSIVE, Task.HATE_SPEECH):
        raise ValidationError(f"--task must be offensive or hate_speech, got {task.value}")
    exclude = _read_ids(args.exclude_ids)
    try:
        if args.mode == "positive":
            pools, report = harvest_positive(corpus, matcher, gate, args.threshold, exclude, args.batch_size)
        else:
            pools, report = harvest_negative(
                corpus, matcher, gate, args.threshold, exclude, args.batch_size, tasks=(task,)
            )
    except HarvestAborted as exc:
        if args.report:
            _dump(exc.report.to_dict(), args.report)
        raise
    write_dataset(pool_dataset(pools[task], task), args.out)
    if args.out_hs:
        if args.mode != "positive" or task is Task.HATE_SPEECH:
            raise ValidationError("--out-hs only applies to positive harvests of the offensive task")
        write_dataset(pool_dataset(pools[Task.HATE_SPEECH], Task.HATE_SPEECH), args.out_hs)
    if args.evidence:
        lines = [json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for r in pools[task]]
        atomic_write_text(args.evidence, "".join(lines))
    _dump(report.to_dict(), args.report)
    return EXIT_OK


def cmd_balance(args) -> int:
    positives = read_labeled_tsv(args.pos)
    if args.neg.endswith(".jsonl"):
        pool = list(JsonlReader(args.neg))
    else:
        pool = read_labeled_tsv(args.neg, positives.task)
    aug = balance(positives, pool, args.prevalence, args.seed)
    if args.gold:
        aug_meta = aug.meta
        aug = merge_with_gold(read_labeled_tsv(args.gold, positives.task), aug, args.merge)
        aug.meta = aug_meta
    write_dataset(aug, args.out)
    _dump(aug.meta, args.out + ".meta.json")
    if aug.meta.get("shortfall"):
        print(
            f"warning: negative pool too small, wanted {aug.meta['requested_negatives']} "
            f"have {aug.meta['pool_size']}",
            file=sys.stderr,
        )
    return EXIT_OK


def _feature_args(args) -> FeatureSpec | None:
    if args.dim is None and args.orders is None and args.hash_seed is None:
        return None
    base = FeatureSpec()
    orders = tuple(int(x) for x in args.orders.split(",")) if args.orders else base.orders
    return FeatureSpec(orders, args.dim or base.dim, base.seed if args.hash_seed is None else args.hash_seed)


def cmd_train(args) -> int:
    data = read_labeled_tsv(args.data, args.task)
    config = TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        l2=args.l2,
        feature_spec=_feature_args(args),
        transfer_body=not args.no_transfer_body,
        jobs=args.jobs,
    )
    if data.task in (Task.SENTIMENT, Task.EMOTION):
        if args.init:
            raise ValidationError("affect models are always trained from scratch")
        ckpt = train_affect(data, config)
    else:
        init = load_checkpoint(args.init) if args.init else None
        dev = read_labeled_tsv(args.dev, data.task) if args.dev else None
        ckpt = train_task(data, config, init=init, dev=dev, checkpoint_dir=args.checkpoint_dir)
    save_checkpoint(ckpt, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.model)
    write_dataset(predict(ckpt, _labeled_or_raw(args.input)), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = read_labeled_tsv(args.gold)
    pred = read_labeled_tsv(args.pred, gold.task)
    metrics = evaluate(gold, pred)
    sys.stdout.write(results_table({args.name: {(gold.task.value, args.split): metrics}}))
    if args.json:
        atomic_write_text(args.json, metrics_json(metrics))
    return EXIT_OK


def cmd_report(args) -> int:
    if args.kind == "dist":
        named = {}
        for spec in args.data:
            name, sep, path = spec.partition("=")
            if not sep:
                name, path = Path(spec).stem, spec
            named[name] = read_labeled_tsv(path)
        report = distribution_report(named)
        sys.stdout.write(report.to_text())
        if args.json:
            _dump(report.to_dict(), args.json)
    elif args.kind == "affect":
        (path,) = args.data
        data = read_labeled_tsv(path)
        breakdown = affect_distribution(data, _build_gate(args, Path(args.json or ".").parent / ".scorer"))
        sys.stdout.write(breakdown.to_text())
        if args.json:
            _dump(breakdown.to_dict(), args.json)
    else:
        (path,) = args.data
        data: Dataset = read_labeled_tsv(path)
        exclude = [load_lexicon(p) for p in args.exclude or ()]
        top = top_unigrams(data, exclude, k=args.k, label=args.label)
        sys.stdout.write("token\tcount\n" + "".join(f"{t}\t{n}\n" for t, n in top))
    return EXIT_OK


def cmd_run(args) -> int:
    manifest = PipelineManifest.load(args.manifest)
    diags = validate_manifest(manifest)
    if diags:
        for d in diags:
            print(f"manifest: {d}", file=sys.stderr)
        return EXIT_USAGE
    if args.validate_only:
        print("manifest ok", file=sys.stderr)
        return EXIT_OK
    result = run_pipeline(manifest, args.out, jobs=args.jobs)
    for name, status in result.stages.items():
        print(f"{name:18s} {status}", file=sys.stderr)
    print(result.output_dir)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _gate_options(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--gate", choices=("stub", "checkpoint", "external"), required=required)
    p.add_argument("--checkpoint", help="sentiment checkpoint for --gate checkpoint")
    p.add_argument("--scorer-cmd", help="external command; {in} and {out} are replaced by the batch files")
    p.add_argument("--scores", help="pre-computed id<TAB>POS|NEG<TAB>score file for --gate external")
    p.add_argument("--markers", nargs="+", help="negative marker tokens for --gate stub")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="yaharvest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--jobs", type=int, default=1, help="worker cap for parallel stages (default 1)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("normalize", help="normalize text from stdin (or --in) to stdout (or --out)")
    p.add_argument("--in", dest="input")
    p.add_argument("--out", dest="output")
    p.add_argument("--jsonl", action="store_true", help="input and output are {id,text} JSONL")
    p.add_argument("--on-error", choices=("fail", "skip"), default="fail")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("extract-seeds", help="rank words that follow the trigger")
    p.add_argument("--trigger", default=DEFAULT_TRIGGER)
    p.add_argument("--in", dest="input", help="JSONL corpus or labeled TSV")
    p.add_argument("--labels", help="labeled TSV used to select positive tweets")
    p.add_argument("--positive-label", action="append", help="repeatable; default: every label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_seeds)

    p = sub.add_parser("curate", help="apply (or interactively record) keep/drop verdicts")
    p.add_argument("--candidates", required=True)
    p.add_argument("--decisions", required=True)
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--corpus", help="tweets shown as context in interactive mode")
    p.add_argument("--add-offensive", nargs="+", metavar="TOKEN")
    p.add_argument("--add-hateful", nargs="+", metavar="TOKEN")
    p.add_argument("--out-dir", default=".", help="where offensive.txt and hateful.txt go")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("harvest", help="build a weakly labeled pool from a raw corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--off-lexicon", required=True)
    p.add_argument("--hs-lexicon", required=True)
    p.add_argument("--trigger", default=DEFAULT_TRIGGER)
    _gate_options(p, required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--mode", choices=("positive", "negative"), required=True)
    p.add_argument("--task", default="offensive", help="pool written to --out (offensive or hate_speech)")
    p.add_argument("--out", required=True)
    p.add_argument("--out-hs", help="positive mode: also write the hate-speech pool here")
    p.add_argument("--evidence", help="per-record evidence JSONL")
    p.add_argument("--report", help="funnel report JSON (stdout if omitted)")
    p.add_argument("--exclude-ids", help="file of ids kept out of the pool")
    p.add_argument("--batch-size", type=int, default=512)
    p.add_argument("--on-error", choices=("fail", "skip"), default="fail")
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("balance", help="sample clean negatives to a target prevalence")
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True, help="negative pool TSV or JSONL")
    p.add_argument("--prevalence", required=True, type=_prevalence, help="target positive share in (0,1), or 'all'")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gold", help="gold TRAIN split to merge with")
    p.add_argument("--merge", choices=("concat", "augmented_only"), default="concat")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("train", help="train a task or affect model")
    p.add_argument("--data", required=True)
    p.add_argument("--task", help="override task inference from the labels")
    p.add_argument("--init", help="affect checkpoint to warm-start from")
    p.add_argument("--dev", help="dev split for best-epoch selection")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--orders", help="comma-separated char n-gram orders, e.g. 2,3,4,5")
    p.add_argument("--dim", type=int)
    p.add_argument("--hash-seed", type=int)
    p.add_argument("--no-transfer-body", action="store_true", help="warm start from weights only")
    p.add_argument("--checkpoint-dir", help="keep one checkpoint per epoch here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--name", default="model")
    p.add_argument("--split", default="dev")
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="dataset reports: dist, affect or unigrams")
    p.add_argument("kind", choices=("dist", "affect", "unigrams"))
    p.add_argument("--data", nargs="+", required=True, help="dist: NAME=PATH pairs; others: one TSV")
    p.add_argument("--json")
    p.add_argument("--exclude", nargs="*", help="unigrams: lexicon files to leave out")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--label")
    _gate_options(p, required=False)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="run the whole workflow from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output directory (overrides paths.output_dir)")
    p.add_argument("--validate-only", action="store_true")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.command == "report" and args.kind == "affect" and not args.gate:
        parser.error("report affect needs --gate")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except YaharvestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
