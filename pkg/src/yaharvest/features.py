"""Hashed character n-gram features."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import _accel
from .errors import ValidationError

DEFAULT_ORDERS = (2, 3, 4, 5)
DEFAULT_DIM = 1 << 18


@dataclass(frozen=True)
class FeatureSpec:
    """Everything that determines the feature space.

    Words are padded as ``<word>``; every character window of each order
    is hashed with MurmurHash3 (x86, 32-bit, UTF-8 bytes, ``seed``) and
    reduced modulo ``dim``. ``norm="l2"`` scales each row to unit length
    when building matrices; raw ``featurize`` output is always counts.
    """

    orders: tuple[int, ...] = DEFAULT_ORDERS
    dim: int = DEFAULT_DIM
    seed: int = 0
    norm: str = "l2"

    def __post_init__(self):
        orders = tuple(int(n) for n in self.orders)
        object.__setattr__(self, "orders", orders)
        if not orders or any(n < 1 for n in orders) or len(set(orders)) != len(orders):
            raise ValidationError(f"n-gram orders must be distinct positive ints, got {self.orders}")
        if not 1 <= int(self.dim) <= 2**32:
            raise ValidationError(f"feature dimension must be in [1, 2**32], got {self.dim}")
        if not 0 <= int(self.seed) < 2**32:
            raise ValidationError(f"hash seed must be an unsigned 32-bit int, got {self.seed}")
        if self.norm not in ("l2", "none"):
            raise ValidationError(f"norm must be 'l2' or 'none', got {self.norm!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orders"] = list(self.orders)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(tuple(d["orders"]), int(d["dim"]), int(d["seed"]), d.get("norm", "l2"))


def featurize(spec: FeatureSpec, text: str) -> dict[int, int]:
    """Sparse count vector of ``text`` as ``{bucket: count}``."""
    return _accel.hash_ngrams(text, spec.orders, spec.dim, spec.seed)


def _rows(args: tuple[FeatureSpec, Sequence[str]]) -> list[dict[int, int]]:
    spec, texts = args
    return [featurize(spec, t) for t in texts]


def featurize_many(spec: FeatureSpec, texts: Sequence[str], jobs: int = 1) -> sp.csr_matrix:
    """Feature matrix (one row per text), row-normalized per ``spec.norm``."""
    texts = list(texts)
    if jobs > 1 and len(texts) >= 4096:
        step = -(-len(texts) // jobs)
        chunks = [(spec, texts[i : i + step]) for i in range(0, len(texts), step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = [r for part in pool.map(_rows, chunks) for r in part]
    else:
        rows = _rows((spec, texts))
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    nnz = 0
    for i, r in enumerate(rows):
        nnz += len(r)
        indptr[i + 1] = nnz
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz, dtype=np.float64)
    for i, r in enumerate(rows):
        lo = indptr[i]
        if r:
            keys = np.fromiter(sorted(r), dtype=np.int64, count=len(r))
            indices[lo : lo + len(r)] = keys
            data[lo : lo + len(r)] = [r[k] for k in keys.tolist()]
    if spec.norm == "l2" and nnz:
        sq = np.add.reduceat(data * data, indptr[:-1][np.diff(indptr) > 0])
        norms = np.ones(len(rows))
        norms[np.diff(indptr) > 0] = np.sqrt(sq)
        data /= np.repeat(norms, np.diff(indptr))
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), spec.dim))
