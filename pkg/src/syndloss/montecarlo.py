"""Monte Carlo FER/BER estimation with minimum-error / minimum-frame stopping.

Frames are simulated in fixed-size blocks. Block ``b`` of SNR point ``i``
draws from ``substream(seed, STREAM_EVAL, i, b)``, and blocks are merged in
index order with the stopping rule checked after each merge, so totals do
not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import STREAM_EVAL, ebn0_to_sigma, llr_from_channel, substream
from .decoder import WeightSet, decode, hard_decide
from .linear_code import ParityCheckMatrix, derive_generator

BLOCK_FRAMES = 1000
MIN_FRAMES = 100_000
MIN_FRAME_ERRORS = 100
DEFAULT_FRAME_CAP = 10_000_000

RESULT_FIELDS = ["ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "capped"]


@dataclass(frozen=True)
class EvalPoint:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    n: int
    capped: bool = False

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n) if self.frames else float("nan")

    @property
    def fer_stderr(self) -> float:
        p = self.fer
        return math.sqrt(p * (1.0 - p) / self.frames)


def _simulate_point(snr_index, ebn0_db, n, k, rate, encode_batch, decide, seed, frame_cap,
                    min_frames, min_errors, workers):
    sigma = ebn0_to_sigma(ebn0_db, rate)

    def run_block(b):
        rng = substream(seed, STREAM_EVAL, snr_index, b)
        if encode_batch is None:
            c = rng.integers(0, 2, size=(BLOCK_FRAMES, n), dtype=np.uint8)
        else:
            c = encode_batch(rng.integers(0, 2, size=(BLOCK_FRAMES, k), dtype=np.uint8))
        y = (1.0 - 2.0 * c) + sigma * rng.standard_normal((BLOCK_FRAMES, n))
        bits_wrong = np.count_nonzero(decide(llr_from_channel(y, sigma)) != c, axis=1)
        return bits_wrong

    frames = frame_errors = bit_errors = 0
    capped = False

    def merge(bits_wrong):
        nonlocal frames, frame_errors, bit_errors, capped
        take = min(len(bits_wrong), frame_cap - frames)
        bw = bits_wrong[:take]
        frames += take
        frame_errors += int(np.count_nonzero(bw))
        bit_errors += int(bw.sum())
        if frames >= min_frames and frame_errors >= min_errors:
            return True
        if frames >= frame_cap:
            capped = True
            return True
        return False

    if workers <= 1:
        b = 0
        while not merge(run_block(b)):
            b += 1
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            pending = deque()
            nxt = 0
            while True:
                while len(pending) < 2 * workers:
                    pending.append(ex.submit(run_block, nxt))
                    nxt += 1
                if merge(pending.popleft().result()):
                    for f in pending:
                        f.cancel()
                    break
    return EvalPoint(float(ebn0_db), frames, frame_errors, bit_errors, n, capped)


def _check_stopping(frame_cap, min_frames, min_errors):
    if min_frames < 1 or min_errors < 0:
        raise ValueError("min_frames must be >= 1 and min_errors >= 0")
    if frame_cap < min_frames:
        raise ValueError(f"frame_cap ({frame_cap}) must be >= min_frames ({min_frames})")


def evaluate(code: ParityCheckMatrix, weights: WeightSet | None, snr_list, seed: int = 0,
             frame_cap: int = DEFAULT_FRAME_CAP, min_frames: int = MIN_FRAMES,
             min_errors: int = MIN_FRAME_ERRORS, workers: int = 1,
             early_exit: bool = False) -> list[EvalPoint]:
    """FER/BER of the NNMS decoder on random codewords at each Eb/N0 in ``snr_list``.

    ``weights=None`` evaluates plain min-sum (all weights 1, default iteration count).
    Decisions are taken on the last iteration's soft output.
    """
    snr_list = [float(v) for v in snr_list]
    if not snr_list:
        raise ValueError("snr_list is empty")
    _check_stopping(frame_cap, min_frames, min_errors)
    graph = code.tanner
    if weights is None:
        weights = WeightSet.initial(graph, code_name=code.name, k=code.k)
    weights.check_graph(graph)
    gen = derive_generator(code)

    def decide(llr):
        return hard_decide(decode(llr, graph, weights, early_exit=early_exit))

    return [_simulate_point(i, snr, code.n, code.k, code.rate, gen.encode_batch, decide, seed,
                            frame_cap, min_frames, min_errors, workers)
            for i, snr in enumerate(snr_list)]


def evaluate_uncoded(n: int, snr_list, seed: int = 0, frame_cap: int = DEFAULT_FRAME_CAP,
                     min_frames: int = MIN_FRAMES, min_errors: int = MIN_FRAME_ERRORS,
                     workers: int = 1) -> list[EvalPoint]:
    """Rate-1 uncoded BPSK with sign decisions on the channel LLR (estimator check)."""
    _check_stopping(frame_cap, min_frames, min_errors)
    return [_simulate_point(i, float(snr), n, n, 1.0, None, hard_decide, seed, frame_cap,
                            min_frames, min_errors, workers)
            for i, snr in enumerate(snr_list)]


@dataclass(frozen=True)
class Comparison:
    ebn0_db: float
    fer_a: float
    fer_b: float
    ratio: float
    a_better: bool


def compare(points_a, points_b) -> list[Comparison]:
    """Per-SNR FER ratio ``a / b`` over the Eb/N0 values both runs share."""
    by_b = {p.ebn0_db: p for p in points_b}
    common = [p for p in points_a if p.ebn0_db in by_b]
    if not common:
        raise ValueError("SNR grids do not overlap: "
                         f"{[p.ebn0_db for p in points_a]} vs {[p.ebn0_db for p in points_b]}")
    out = []
    for a in common:
        b = by_b[a.ebn0_db]
        if b.fer > 0:
            ratio = a.fer / b.fer
        else:
            ratio = 1.0 if a.fer == 0 else math.inf
        out.append(Comparison(a.ebn0_db, a.fer, b.fer, ratio, a.fer < b.fer))
    return out


def write_results(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_FIELDS + ["n"])
        for p in points:
            w.writerow([repr(p.ebn0_db), p.frames, p.frame_errors, p.bit_errors,
                        repr(p.fer), repr(p.ber), str(p.capped).lower(), p.n])


def read_results(path) -> list[EvalPoint]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    missing = [f for f in RESULT_FIELDS if rows and f not in rows[0]]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    pts = []
    for r in rows:
        frames = int(r["frames"])
        n = int(r["n"]) if r.get("n") else (
            round(int(r["bit_errors"]) / (float(r["ber"]) * frames)) if float(r["ber"]) else 1)
        pts.append(EvalPoint(float(r["ebn0_db"]), frames, int(r["frame_errors"]),
                             int(r["bit_errors"]), n, r["capped"].strip().lower() == "true"))
    return pts


def write_comparison(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ebn0_db", "fer_a", "fer_b", "ratio", "a_better"])
        for r in rows:
            w.writerow([repr(r.ebn0_db), repr(r.fer_a), repr(r.fer_b), repr(r.ratio),
                        str(r.a_better).lower()])
