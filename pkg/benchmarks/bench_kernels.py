"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from vtsim import kernels
from vtsim.geometry import EPS, build_tiling


def cases(rng):
    t = build_tiling(500, 60, "ball")
    pts = rng.uniform(-550, 550, (200_000, 3))
    pos = rng.uniform(-50, 50, (12, 3))
    cred = np.sort(rng.uniform(0, 1, 12))[::-1].copy()
    big = rng.uniform(-200, 200, (400, 3))
    yield "locate_many 200k pts", lambda k: k.locate_many(pts, t.side, t.lut, t.lut_offset, t.mins, t.maxs, EPS)
    yield "distance_matrix 400 nodes", lambda k: k.distance_matrix(big)
    interf = (kernels.distance_matrix(pos) <= 30).astype(np.uint8)
    yield "greedy_select 12 x1000", lambda k: [k.greedy_select(cred, interf, 12, 0.5) for _ in range(1000)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = kernels.backends()
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in impls) + ("     speedup" if len(impls) > 1 else ""))
    for name, fn in cases(np.random.default_rng(0)):
        best = {n: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for n, m in impls.items()}
        row = f"{name:28s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in impls)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
