"""Multinomial logistic regression over hashed n-grams, with warm-start support.

Checkpoint file layout (little endian)::

    b"YAHCKPT\\0"          8-byte magic
    uint32                format version (1)
    uint64                header length in bytes
    header                UTF-8 JSON, sorted keys
    float64[...]          arrays listed in header["arrays"], in order, C layout

Identical models serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus_io import _atomic_write
from .errors import DataError, ValidationError
from .features import FeatureSpec, featurize_many

MAGIC = b"YAHCKPT\0"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    epochs: int = 20
    learning_rate: float = 2.0
    batch_size: int = 32
    l2: float = 0.0
    init_scale: float = 0.01
    feature_spec: FeatureSpec | None = None  # None: defaults, or the init checkpoint's
    transfer_body: bool = True
    jobs: int = 1  # featurization workers; never changes the result

    def __post_init__(self):
        if self.seed is None:
            raise ValidationError("rng_seed required")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if not 0 < self.learning_rate < math.inf:
            raise ValidationError("learning_rate must be a positive finite number")


@dataclass
class AffectBody:
    """Frozen affect model carried by a warm-started checkpoint.

    Its centred class probabilities are extra inputs to the task head
    through ``head`` (``n_affect x n_classes``).
    """

    source_task: str
    source_labels: tuple[str, ...]
    weights: np.ndarray  # dim x n_affect
    bias: np.ndarray  # n_affect
    head: np.ndarray  # n_affect x n_classes

    def representation(self, x: sp.csr_matrix) -> np.ndarray:
        p = softmax(x @ self.weights + self.bias)
        return p - 1.0 / p.shape[1]


@dataclass
class ModelCheckpoint:
    task: str
    feature_spec: FeatureSpec
    label_set: tuple[str, ...]
    weights: np.ndarray  # dim x n_classes
    bias: np.ndarray
    body: AffectBody | None = None
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.label_set = tuple(self.label_set)
        k = len(self.label_set)
        if self.weights.shape != (self.feature_spec.dim, k):
            raise DataError(
                f"weights shape {self.weights.shape} != ({self.feature_spec.dim}, {k})"
            )
        if self.body is not None and self.body.head.shape[1] != k:
            raise DataError("affect head width does not match label set")

    def features(self, texts: Sequence[str], jobs: int = 1) -> sp.csr_matrix:
        return featurize_many(self.feature_spec, texts, jobs=jobs)

    def logits(self, x: sp.csr_matrix) -> np.ndarray:
        out = np.asarray(x @ self.weights) + self.bias
        if self.body is not None:
            out = out + self.body.representation(x) @ self.body.head
        return out

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        return softmax(self.logits(self.features(texts)))

    def predict(self, texts: Sequence[str]) -> list[str]:
        if not texts:
            return []
        idx = np.argmax(self.logits(self.features(texts)), axis=1)
        return [self.label_set[i] for i in idx]


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _cross_entropy(logits: np.ndarray, y: np.ndarray) -> float:
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(len(y)), y]))


EpochHook = Callable[[int, ModelCheckpoint], None]


def fit(
    task: str,
    texts: Sequence[str],
    labels: Sequence[str],
    label_set: Sequence[str],
    config: TrainConfig,
    init: ModelCheckpoint | None = None,
    on_epoch: EpochHook | None = None,
) -> ModelCheckpoint:
    """Seeded mini-batch gradient descent on softmax cross-entropy.

    Each epoch visits the data in an order drawn from the seeded RNG.
    With ``init``, its feature space is adopted and (if
    ``config.transfer_body``) its whole linear model becomes a frozen
    affect body; the task head is always freshly initialized.
    """
    label_set = tuple(label_set)
    index = {lab: i for i, lab in enumerate(label_set)}
    present = set(labels)
    if len(present) < 2:
        raise DataError(f"need at least 2 classes to train, found {sorted(present)}")
    missing = present - set(index)
    if missing:
        raise DataError(f"labels outside label set: {sorted(missing)}")

    spec = config.feature_spec or FeatureSpec()
    provenance = "scratch"
    if init is not None:
        if config.feature_spec is not None and config.feature_spec != init.feature_spec:
            raise ValidationError(
                "feature_spec override incompatible with init checkpoint "
                f"({config.feature_spec} vs {init.feature_spec})"
            )
        spec = init.feature_spec
        provenance = f"warm:{init.task}"

    rng = np.random.default_rng(config.seed)
    k = len(label_set)
    x = featurize_many(spec, texts, jobs=config.jobs)
    y = np.array([index[lab] for lab in labels], dtype=np.int64)
    n = len(y)
    digest = hashlib.sha256()
    for t, lab in zip(texts, labels):
        digest.update(f"{t}\t{lab}\n".encode("utf-8"))
    fingerprint = digest.hexdigest()

    weights = rng.normal(0.0, config.init_scale, size=(spec.dim, k))
    bias = np.zeros(k)
    body = None
    z = None
    if init is not None and config.transfer_body:
        # a nested body on the source is not carried over; only its n-gram layer
        src_w, src_b = init.weights.copy(), init.bias.copy()
        body = AffectBody(
            init.task,
            init.label_set,
            src_w,
            src_b,
            rng.normal(0.0, config.init_scale, size=(src_w.shape[1], k)),
        )
        z = body.representation(x)

    def snapshot(epoch: int, losses: list[float]) -> ModelCheckpoint:
        b = None
        if body is not None:
            b = AffectBody(body.source_task, body.source_labels, body.weights, body.bias, body.head.copy())
        meta = {
            "epochs": epoch,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "l2": config.l2,
            "seed": config.seed,
            "init": provenance,
            "transfer_body": body is not None,
            "n_train": n,
            "data_fingerprint": fingerprint,
            "losses": losses,
        }
        return ModelCheckpoint(task, spec, label_set, weights.copy(), bias.copy(), b, meta)

    losses: list[float] = []
    onehot = np.eye(k)[y]
    lr = config.learning_rate
    # divergence is reported through the loss check below, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                rows = order[start : start + config.batch_size]
                xb = x[rows]
                cols, local = np.unique(xb.indices, return_inverse=True)
                xs = sp.csr_matrix((xb.data, local.ravel(), xb.indptr), shape=(len(rows), len(cols)))
                logits = np.asarray(xs @ weights[cols]) + bias
                if z is not None:
                    logits += z[rows] @ body.head
                g = (softmax(logits) - onehot[rows]) / len(rows)
                grad_w = np.asarray(xs.T @ g)
                if config.l2:
                    grad_w += config.l2 * weights[cols]
                weights[cols] -= lr * grad_w
                bias -= lr * g.sum(axis=0)
                if z is not None:
                    body.head -= lr * (z[rows].T @ g)
            full = np.asarray(x @ weights) + bias
            if z is not None:
                full += z @ body.head
            loss = _cross_entropy(full, y)
            if not math.isfinite(loss):
                raise DataError(
                    f"non-finite loss {loss} at epoch {epoch} (lr={lr}, n={n}); lower the learning rate"
                )
            losses.append(loss)
            if on_epoch is not None:
                on_epoch(epoch, snapshot(epoch, list(losses)))
    return snapshot(config.epochs, losses)


# --- serialization ----------------------------------------------------------


def _arrays(ckpt: ModelCheckpoint) -> list[tuple[str, np.ndarray]]:
    out = [("weights", ckpt.weights), ("bias", ckpt.bias)]
    if ckpt.body is not None:
        out += [
            ("body_weights", ckpt.body.weights),
            ("body_bias", ckpt.body.bias),
            ("body_head", ckpt.body.head),
        ]
    return out


def checkpoint_bytes(ckpt: ModelCheckpoint) -> bytes:
    arrays = _arrays(ckpt)
    header = {
        "task": ckpt.task,
        "feature_spec": ckpt.feature_spec.to_dict(),
        "label_set": list(ckpt.label_set),
        "training_meta": ckpt.training_meta,
        "arrays": [{"name": name, "shape": list(a.shape)} for name, a in arrays],
    }
    if ckpt.body is not None:
        header["body"] = {
            "source_task": ckpt.body.source_task,
            "source_labels": list(ckpt.body.source_labels),
        }
    hdr = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    parts = [MAGIC, struct.pack("<IQ", FORMAT_VERSION, len(hdr)), hdr]
    parts += [np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in arrays]
    return b"".join(parts)


def save_checkpoint(ckpt: ModelCheckpoint, path: str | os.PathLike) -> None:
    _atomic_write(path, [checkpoint_bytes(ckpt)])


def load_checkpoint(path: str | os.PathLike) -> ModelCheckpoint:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc.strerror or exc}") from exc
    return checkpoint_from_bytes(data, source=str(path))


def checkpoint_from_bytes(data: bytes, source: str = "<bytes>") -> ModelCheckpoint:
    try:
        return _parse_checkpoint(data, source)
    except (struct.error, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{source}: corrupt checkpoint ({type(exc).__name__}: {exc})") from exc


def _parse_checkpoint(data: bytes, source: str) -> ModelCheckpoint:
    if data[:8] != MAGIC:
        raise DataError(f"{source}: not a checkpoint file")
    version, hlen = struct.unpack_from("<IQ", data, 8)
    if version != FORMAT_VERSION:
        raise DataError(f"{source}: unsupported checkpoint version {version}")
    off = 8 + 12
    header = json.loads(data[off : off + hlen].decode("utf-8"))
    off += hlen
    arrays: dict[str, np.ndarray] = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        a = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape)
        arrays[spec["name"]] = a.astype(np.float64)
        off += 8 * count
    if off != len(data):
        raise DataError(f"{source}: trailing or missing bytes in checkpoint")
    body = None
    if "body" in header:
        body = AffectBody(
            header["body"]["source_task"],
            tuple(header["body"]["source_labels"]),
            arrays["body_weights"],
            arrays["body_bias"],
            arrays["body_head"],
        )
    return ModelCheckpoint(
        header["task"],
        FeatureSpec.from_dict(header["feature_spec"]),
        tuple(header["label_set"]),
        arrays["weights"],
        arrays["bias"],
        body,
        header["training_meta"],
    )
