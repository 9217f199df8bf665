"""Time every hot kernel under the numba and the numpy backend.

    python3 benchmarks/bench_backends.py [--repeat 3]

Prints TSV: kernel, case, numpy_ms, numba_ms, speedup, same_result.  The brute-force
row compares the pruned depth-first search (numba) with the chunked scan (numpy).
"""
import argparse
import time

import numpy as np

from nalin import _kernels as K
from nalin.dictatorship import noise_weights
from nalin.fourier import random_folded
from nalin.group import catalog_group
from nalin.lin import generate_planted


def cases():
    s3, q8, a4 = catalog_group("S3"), catalog_group("Q8"), catalog_group("A4")
    rng = np.random.default_rng(0)

    f = rng.standard_normal(a4.order ** 2) + 0j
    h = rng.standard_normal(a4.order ** 2) + 0j
    yield "convolve", "A4 n=2", lambda: K.convolve(a4.cayley, a4.inverse, f, h, 2, a4.order)

    ff = random_folded(s3, 3, rng).values
    yield "dict_hist_pairs", "S3 n=3", lambda: K.dict_hist_pairs(s3.cayley, s3.inverse, ff, 3, 6)

    f2 = random_folded(s3, 2, rng).values
    on, _, _ = noise_weights(s3, 0.1)
    yield "dict_hist_noisy", "S3 n=2", lambda: K.dict_hist_noisy(s3.cayley, f2, 2, 6, on)

    inst, _ = generate_planted(q8, 8, 40, 3, seed=1)
    p = inst.packed
    assigns = rng.integers(0, q8.order, size=(20000, 8))
    yield "word_values", "Q8 m=40 B=20000", lambda: K.word_values(
        q8.cayley, q8.inverse, p.consts, p.tvars, p.texps, p.ks, assigns)

    inst, _ = generate_planted(s3, 7, 30, 3, seed=2)
    p = inst.packed
    yield "search", "S3 n=7 m=30 planted", lambda: K.search_assignments(
        s3.cayley, s3.inverse, p.consts, p.tvars, p.texps, p.ks, p.rhs, p.weights, 7, 6,
        1 - 1e-12)


def timed(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return bool(np.allclose(np.asarray(a), np.asarray(b), atol=1e-12))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print("kernel\tcase\tnumpy_ms\tnumba_ms\tspeedup\tsame_result")
    prev = K.get_backend()
    try:
        for name, case, fn in cases():
            K.set_backend("numpy")
            t_np, r_np = timed(fn, args.repeat)
            K.set_backend("numba")
            fn()  # compile outside the timing
            t_nb, r_nb = timed(fn, args.repeat)
            print(f"{name}\t{case}\t{t_np:.2f}\t{t_nb:.2f}\t{t_np / t_nb:.1f}\t"
                  f"{'yes' if same(r_np, r_nb) else 'no'}")
    finally:
        K.set_backend(prev)


if __name__ == "__main__":
    main()
