"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--lines N] [--repeat R]

Both backends are imported directly, so one process measures both. The
last column is how many times faster the compiled kernel ran.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

from yaharvest import _fallback
from yaharvest.features import DEFAULT_DIM, DEFAULT_ORDERS
from yaharvest.normalizer import tokenize
from yaharvest.synthetic import make_corpus

try:
    from yaharvest import _kernels
except ImportError:
    sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")


def workloads(lines: int):
    texts = [t.text for t in make_corpus(lines, seed=1, kind="seeded")]
    token_lists = [tokenize(t) for t in texts]
    vocab = sorted({w for toks in token_lists for w in toks})
    rng = random.Random(0)
    table = {w: rng.choice((1, 2, 4)) for w in rng.sample(vocab, min(len(vocab), 40))}
    blobs = [t.encode("utf-8") for t in texts]

    def murmur(mod):
        return lambda: [mod.murmur3_32(b, 0) for b in blobs]

    def ngrams(mod):
        return lambda: [mod.hash_ngrams(t, DEFAULT_ORDERS, DEFAULT_DIM, 0) for t in texts]

    def scan(mod):
        return lambda: [mod.scan_tokens(toks, table) for toks in token_lists]

    return {"murmur3_32": murmur, "hash_ngrams": ngrams, "scan_tokens": scan}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lines", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{args.lines} synthetic lines, best of {args.repeat}")
    print(f"{'kernel':<12} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for name, make in workloads(args.lines).items():
        slow = fast = None
        for mod in (_fallback, _kernels):
            fn = make(mod)
            best = min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1000
            if mod is _fallback:
                slow = best
            else:
                fast = best
        print(f"{name:<12} {slow:>12.1f} {fast:>12.1f} {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
