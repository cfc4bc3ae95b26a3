"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``YAHARVEST_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"

if os.environ.get("YAHARVEST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

murmur3_32 = _impl.murmur3_32
hash_ngrams = _impl.hash_ngrams
scan_tokens = _impl.scan_tokens

TRIGGER = _fallback.TRIGGER
OFFENSIVE = _fallback.OFFENSIVE
HATEFUL = _fallback.HATEFUL
