"""Regenerate the bundled alist files in src/syndloss/data/.

    python scripts/make_codes.py

Hamming (7,4) uses the standard H below. The (16,8) LDPC matrix is a
(3,6)-regular matrix drawn with a fixed seed, keeping the candidate with the
fewest length-4 cycles among full-rank draws. The BCH matrices are the cyclic
parity-check matrices built from the parity polynomial h(x) = (x^63 + 1) / g(x).
"""

from itertools import combinations
from pathlib import Path

import numpy as np

from syndloss.linear_code import ParityCheckMatrix, RankDeficientError, derive_generator, emit_alist

OUT = Path(__file__).resolve().parents[1] / "src" / "syndloss" / "data"

HAMMING = [[1, 1, 0, 1, 1, 0, 0],
           [1, 0, 1, 1, 0, 1, 0],
           [0, 1, 1, 1, 0, 0, 1]]


def four_cycles(h):
    overlap = h.astype(int) @ h.T.astype(int)
    return sum(int(overlap[a, b] * (overlap[a, b] - 1) // 2)
               for a, b in combinations(range(h.shape[0]), 2))


def regular_ldpc(n, m, wc, wr, seed, draws=2000):
    rng = np.random.default_rng(seed)
    best, best_cycles = None, None
    sockets = np.repeat(np.arange(n), wc)
    for _ in range(draws):
        perm = rng.permutation(sockets)
        h = np.zeros((m, n), dtype=np.uint8)
        ok = True
        for i in range(m):
            cols = perm[i * wr:(i + 1) * wr]
            if len(set(cols)) != wr:
                ok = False
                break
            h[i, cols] = 1
        if not ok:
            continue
        try:
            derive_generator(ParityCheckMatrix.from_dense(h))
        except RankDeficientError:
            continue
        cyc = four_cycles(h)
        if best is None or cyc < best_cycles:
            best, best_cycles = h, cyc
    return best


def _gf64():
    exp = [0] * 126
    log = [0] * 64
    x = 1
    for i in range(63):
        exp[i] = exp[i + 63] = x
        log[x] = i
        x <<= 1
        if x & 64:
            x ^= 0b1000011  # x^6 + x + 1
    return exp, log


def _minimal_poly(i, exp, log):
    coset = sorted({(i * 2 ** j) % 63 for j in range(6)})
    poly = [1]  # coefficients in GF(64), lowest degree first
    for c in coset:
        root = exp[c]
        new = [0] * (len(poly) + 1)
        for d, a in enumerate(poly):
            new[d + 1] ^= a
            if a:
                new[d] ^= exp[log[a] + log[root]]
        poly = new
    assert all(a in (0, 1) for a in poly)
    return poly


def _polymul2(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] ^= y
    return out


def _polydiv2(num, den):
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for s in range(len(q) - 1, -1, -1):
        if num[s + len(den) - 1]:
            q[s] = 1
            for j, d in enumerate(den):
                num[s + j] ^= d
    assert not any(num), "inexact division"
    return q


def bch63(designed_t):
    exp, log = _gf64()
    g, seen = [1], set()
    for i in range(1, 2 * designed_t, 2):
        coset = frozenset((i * 2 ** j) % 63 for j in range(6))
        if coset in seen:
            continue
        seen.add(coset)
        g = _polymul2(g, _minimal_poly(i, exp, log))
    k = 63 - (len(g) - 1)
    xn1 = [1] + [0] * 62 + [1]
    hpoly = _polydiv2(xn1, g)
    hrev = hpoly[::-1]
    H = np.zeros((63 - k, 63), dtype=np.uint8)
    for r in range(63 - k):
        H[r, r:r + k + 1] = hrev
    return H, k


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    codes = {
        "hamming_7_4": np.array(HAMMING, dtype=np.uint8),
        "ldpc_16_8": regular_ldpc(16, 8, 3, 6, seed=20190101),
    }
    for t, k in ((3, 45), (5, 36)):
        H, kk = bch63(t)
        assert kk == k
        codes[f"bch_63_{k}"] = H
    for name, h in codes.items():
        pcm = ParityCheckMatrix.from_dense(h, name=name)
        derive_generator(pcm)
        (OUT / f"{name}.alist").write_text(emit_alist(pcm))
        print(f"{name}: n={pcm.n} k={pcm.k} edges={int(h.sum())} 4-cycles={four_cycles(h)}")


if __name__ == "__main__":
    main()
