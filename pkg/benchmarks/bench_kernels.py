"""Time the numba and numpy block kernels on identical input and check they agree bit for bit.

    python3 benchmarks/bench_kernels.py [--blocks 4096] [--repeat 5] [--pair DCT]
"""

import argparse
import time

import numpy as np

from orthosteg import _accel, kernels
from orthosteg.basis import build_kernel, parse_pair
from orthosteg.keyschedule import PERM_TABLE
from orthosteg.transform import quant_table


def make_input(n, seed=0):
    rng = np.random.default_rng(seed)
    smooth = np.cumsum(rng.normal(0, 8, (n, 8, 8)), axis=2) + rng.uniform(0, 255, (n, 1, 1))
    blocks = np.clip(np.round(smooth), 0, 255)
    return blocks, PERM_TABLE[rng.integers(0, 256, n)], rng.integers(0, 2, (n, 8)), np.full(n, 8)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--blocks", type=int, default=4096, help="sub-blocks per run (4096 = one 512x512 channel)")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pair", default="DCT", help="basis pair label, e.g. DCT, qMT, 4,7")
    args = ap.parse_args(argv)

    bx, by = parse_pair(args.pair)
    A, C = (np.asarray(build_kernel(b).entries) for b in (bx, by))
    Q = quant_table(75).entries
    blocks, perms, bits, nbits = make_input(args.blocks)
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])

    results = {}
    print(f"{'backend':<8} {'embed_s':>10} {'extract_s':>10}")
    for b in backends:
        te, emb = best_of(lambda: kernels.embed_blocks(blocks, A, C, Q, perms, bits, nbits, 16, b), args.repeat)
        tx, ext = best_of(lambda: kernels.extract_blocks(emb[0], A, C, Q, perms, b), args.repeat)
        results[b] = (emb, ext)
        print(f"{b:<8} {te:>10.4f} {tx:>10.4f}")

    if len(results) == 2:
        (ea, xa), (eb, xb) = results["numpy"], results["numba"]
        same = all(np.array_equal(x, y) for x, y in zip(ea, eb)) and np.array_equal(xa, xb)
        print(f"outputs identical: {'yes' if same else 'no'}")
        return 0 if same else 1
    print("numba not installed; only the numpy backend was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
