"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--code ldpc_16_8] [--batch 120] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from syndloss import _backend
from syndloss.linear_code import load_code


def bench(kern, L, llr, w, c, repeat):
    s, v, c2v, wit = kern.forward(L, llr, w)
    syn, ce, gs = kern.loss_terms(L, s, c, 0.5)
    cases = {
        "forward": lambda: kern.forward(L, llr, w),
        "decode_final": lambda: kern.decode_final(L, llr, w, False),
        "loss_terms": lambda: kern.loss_terms(L, s, c, 0.5),
        "backward": lambda: kern.backward(L, gs, v, c2v, wit, w),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--code", default="ldpc_16_8")
    ap.add_argument("--batch", type=int, default=120)
    ap.add_argument("--iterations", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    code = load_code(args.code)
    L = code.tanner.layout
    rng = np.random.default_rng(0)
    llr = rng.normal(2.0, 2.5, (args.batch, code.n))
    w = rng.uniform(0.5, 1.5, (args.iterations, L.edges))
    c = np.zeros((args.batch, code.n))

    results = {name: bench(_backend.get_kernels(name), L, llr, w, c, args.repeat)
               for name in _backend.available_backends()}
    print(f"{args.code}: batch {args.batch}, T={args.iterations}, best of {args.repeat}")
    names = list(results)
    print(f"{'kernel':<14}" + "".join(f"{n + ' (ms)':>16}" for n in names)
          + ("     speedup" if len(names) == 2 else ""))
    for k in results[names[0]]:
        row = f"{k:<14}" + "".join(f"{results[n][k] * 1e3:16.3f}" for n in names)
        if len(names) == 2:
            row += f"{results['numpy'][k] / results['cython'][k]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
