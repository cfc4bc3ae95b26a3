"""Weakly supervised data augmentation for Arabic offensive and hate speech detection.

Tweets where the vocative trigger is followed by a curated seed word and
that a sentiment gate calls negative become positive training examples;
seedless trigger tweets the gate calls positive form a clean negative pool.
"""

__version__ = "0.1.0"

from ._accel import BACKEND
from .affect_gate import (
    CheckpointGate,
    ExternalScorer,
    Polarity,
    PolarityLabel,
    TokenRuleGate,
    score,
    train_affect,
)
from .augmentor import (
    HarvestRecord,
    HarvestReport,
    balance,
    harvest_negative,
    harvest_positive,
    merge_with_gold,
    required_negatives,
)
from .corpus_io import Dataset, RawTweet, Task, read_jsonl, read_labeled_tsv, write_dataset
from .errors import DataError, ValidationError, YaharvestError
from .experiment import compute_metrics, distribution_report, evaluate, predict, train_task
from .features import FeatureSpec, featurize, featurize_many
from .lexicon import SeedLexicon, compile_matcher, curate, extract_candidates, match
from .model import ModelCheckpoint, TrainConfig, load_checkpoint, save_checkpoint
from .normalizer import NormalizedTweet, normalize, tokenize
from .pipeline import PipelineManifest, run_pipeline, validate_manifest

__all__ = [
    "BACKEND",
    "CheckpointGate",
    "DataError",
    "Dataset",
    "ExternalScorer",
    "FeatureSpec",
    "HarvestRecord",
    "HarvestReport",
    "ModelCheckpoint",
    "NormalizedTweet",
    "PipelineManifest",
    "Polarity",
    "PolarityLabel",
    "RawTweet",
    "SeedLexicon",
    "Task",
    "TokenRuleGate",
    "TrainConfig",
    "ValidationError",
    "YaharvestError",
    "balance",
    "compile_matcher",
    "compute_metrics",
    "curate",
    "distribution_report",
    "evaluate",
    "extract_candidates",
    "featurize",
    "featurize_many",
    "harvest_negative",
    "harvest_positive",
    "load_checkpoint",
    "match",
    "merge_with_gold",
    "normalize",
    "predict",
    "read_jsonl",
    "read_labeled_tsv",
    "required_negatives",
    "run_pipeline",
    "save_checkpoint",
    "score",
    "tokenize",
    "train_affect",
    "train_task",
    "validate_manifest",
    "write_dataset",
]
