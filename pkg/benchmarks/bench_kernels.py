"""Compare the compiled kernels with their pure-Python twins.

    python benchmarks/bench_kernels.py [--pairs 2000] [--seed 0] [--json]

Both backends get identical inputs; outputs are compared before any timing is
reported, so a speedup is never quoted for a wrong answer.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

import numpy as np

from biresolve import _pykernels

try:
    from biresolve import _ckernels
except ImportError:
    _ckernels = None


def random_matrix(rng, n, top=2):
    return np.array([[rng.randint(0, top) for _ in range(n)] for _ in range(n)], dtype=np.int64)


def balanced(rng, n, r):
    m = np.zeros((n, n), dtype=np.int64)
    for _ in range(r):
        m[np.arange(n), rng.sample(range(n), n)] += 1
    return m


def thin(rng, m, b):
    m = m.copy()
    n = len(m)
    for _ in range(rng.randint(0, n * b)):
        i, j = rng.randrange(n), rng.randrange(n)
        if m[i, j]:
            m[i, j] -= 1
    return m


def workloads(pairs: int, seed: int):
    rng = random.Random(seed)
    search = [(random_matrix(rng, rng.randint(2, 4)), random_matrix(rng, rng.randint(1, 3)),
               rng.random() < 0.5) for _ in range(pairs)]
    exists = [(g, h, not le) for g, h, le in search]
    fam_g = [random_matrix(rng, rng.randint(1, 3)) for _ in range(60)]
    fam_h = [random_matrix(rng, rng.randint(1, 3)) for _ in range(60)]
    dec = []
    for _ in range(pairs // 4):
        n, r = rng.randint(2, 8), rng.randint(1, 6)
        dec.append((balanced(rng, n, r).tolist(), r))
    pad = [(thin(rng, balanced(rng, n, b), b).tolist(), b)
           for n, b in ((rng.randint(2, 8), rng.randint(1, 6)) for _ in range(pairs // 4))]
    return {
        "search_subamalgamation": lambda k: [k.search_subamalgamation(g, h, le)
                                             for g, h, le in search],
        "homomorphism_exists": lambda k: [k.homomorphism_exists(g, h, c) for g, h, c in exists],
        "family_agreement": lambda k: _family(k, fam_g, fam_h),
        "decompose_permutations": lambda k: [[list(p) for p in k.decompose_permutations(m, r)]
                                             for m, r in dec],
        "pad_to_balanced": lambda k: [_pad(k, m, b) for m, b in pad],
    }


def _family(k, gs, hs):
    maps, bad = k.family_agreement(gs, hs, True)
    return np.asarray(maps).tolist(), [tuple(x) for x in bad]


def _pad(k, m, b):
    out, adds = k.pad_to_balanced(m, b)
    return [list(r) for r in out], [tuple(a) for a in adds]


def timed(fn, backend):
    t0 = time.perf_counter()
    out = fn(backend)
    return time.perf_counter() - t0, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=2000, help="search/exists instances")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled kernels are not built; run `pip install --no-build-isolation -e .`",
              file=sys.stderr)
        return 1

    rows = []
    for name, fn in workloads(args.pairs, args.seed).items():
        tp, out_p = timed(fn, _pykernels)
        tc, out_c = timed(fn, _ckernels)
        if out_p != out_c:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        rows.append({"kernel": name, "python_s": tp, "cython_s": tc,
                     "speedup": tp / tc if tc > 0 else float("inf")})

    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'kernel':<26}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<26}{r['python_s']:>12.4f}{r['cython_s']:>12.4f}{r['speedup']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
