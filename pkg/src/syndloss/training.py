"""Minibatch training of NNMS weights with Adam and the combined multi-iteration loss."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import STREAM_PROBE, STREAM_TRAIN, ebn0_to_sigma, llr_from_channel, substream
from .decoder import (DEFAULT_ITERATIONS, PARAMETRIZATIONS, WeightSet, decode, hard_decide,
                      nnms_forward)
from .linear_code import GeneratorMatrix, ParityCheckMatrix, derive_generator
from .losses import multi_loss_and_gradient

log = logging.getLogger(__name__)

CODEWORD_MODES = ("all_zeros", "random")
PROBE_FRAMES = 1000
DEGENERATE_FER = 0.5


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lam: float = 0.5
    learning_rate: float = 0.01
    minibatch_size: int = 120
    num_minibatches: int = 10_000
    snr_range_db: tuple[float, float] = (1.0, 8.0)
    codeword_mode: str | None = None  # None: random when lam == 0, else all_zeros
    parametrization: str = "identity"
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0

    def __post_init__(self):
        self.snr_range_db = tuple(float(v) for v in self.snr_range_db)
        if self.codeword_mode is None:
            self.codeword_mode = "random" if self.lam == 0.0 else "all_zeros"
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.minibatch_size < 1 or self.num_minibatches < 0 or self.iterations < 1:
            raise ValueError("minibatch_size and iterations must be >= 1, num_minibatches >= 0")
        lo, hi = self.snr_range_db
        if len(self.snr_range_db) != 2 or lo > hi:
            raise ValueError(f"snr_range_db must be [low, high], got {self.snr_range_db}")
        if self.codeword_mode not in CODEWORD_MODES:
            raise ValueError(f"codeword_mode must be one of {CODEWORD_MODES}")
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(f"parametrization must be one of {PARAMETRIZATIONS}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_range_db"] = list(self.snr_range_db)
        return d


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, shape, **kw) -> AdamState:
        return cls(np.zeros(shape), np.zeros(shape), **kw)


def adam_step(raw: np.ndarray, grad: np.ndarray, state: AdamState, lr: float) -> np.ndarray:
    """One bias-corrected Adam update. Advances ``state`` in place; returns the new weights."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != raw.shape or state.first_moment.shape != raw.shape:
        raise ValueError(f"shape mismatch: weights {raw.shape}, gradient {grad.shape}, "
                         f"state {state.first_moment.shape}")
    b1, b2 = state.beta1, state.beta2
    state.step_count += 1
    state.first_moment = b1 * state.first_moment + (1.0 - b1) * grad
    state.second_moment = b2 * state.second_moment + (1.0 - b2) * grad * grad
    m_hat = state.first_moment / (1.0 - b1 ** state.step_count)
    v_hat = state.second_moment / (1.0 - b2 ** state.step_count)
    return raw - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


@dataclass
class Minibatch:
    codewords: np.ndarray  # (B, n) uint8
    llr: np.ndarray        # (B, n)
    ebn0_db: np.ndarray    # (B,)


def make_minibatch(code: ParityCheckMatrix, config: TrainConfig, rng: np.random.Generator,
                   generator: GeneratorMatrix | None = None) -> Minibatch:
    """Draw per-sample Eb/N0 uniformly over the configured range, then codewords, then noise."""
    B, n = config.minibatch_size, code.n
    lo, hi = config.snr_range_db
    ebn0 = rng.uniform(lo, hi, size=B)
    if config.codeword_mode == "random":
        if generator is None:
            generator = derive_generator(code)
        c = generator.encode_batch(rng.integers(0, 2, size=(B, code.k), dtype=np.uint8))
    else:
        c = np.zeros((B, n), dtype=np.uint8)
    sigma = ebn0_to_sigma(ebn0, code.rate)
    y = (1.0 - 2.0 * c) + sigma[:, None] * rng.standard_normal((B, n))
    return Minibatch(codewords=c, llr=llr_from_channel(y, sigma), ebn0_db=ebn0)


@dataclass
class TrainingLog:
    minibatch_index: list[int] = field(default_factory=list)
    total_loss: list[float] = field(default_factory=list)
    syndrome_part: list[float] = field(default_factory=list)
    cross_entropy_part: list[float] = field(default_factory=list)
    probe_fer: float = float("nan")
    degenerate: bool = False

    def append(self, index, breakdown):
        self.minibatch_index.append(index)
        self.total_loss.append(breakdown.total)
        self.syndrome_part.append(breakdown.syndrome_part)
        self.cross_entropy_part.append(breakdown.cross_entropy_part)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# probe_fer={self.probe_fer!r} degenerate={str(self.degenerate).lower()}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["minibatch_index", "total_loss", "syndrome_part", "cross_entropy_part"])
            for row in zip(self.minibatch_index, self.total_loss, self.syndrome_part,
                           self.cross_entropy_part):
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


@dataclass
class TrainResult:
    weights: WeightSet
    log: TrainingLog


def sanity_probe(code: ParityCheckMatrix, weights: WeightSet, seed: int,
                 frames: int = PROBE_FRAMES, generator: GeneratorMatrix | None = None) -> float:
    """FER on noiseless random codewords.

    A value near 1 means training settled on a valid-but-wrong fixed mapping.
    """
    generator = generator or derive_generator(code)
    rng = substream(seed, STREAM_PROBE)
    c = generator.encode_batch(rng.integers(0, 2, size=(frames, code.k), dtype=np.uint8))
    s = decode(2.0 * (1.0 - 2.0 * c), code.tanner, weights)
    return float(np.mean(np.any(hard_decide(s) != c, axis=1)))


def train(code: ParityCheckMatrix, config: TrainConfig, progress=None) -> TrainResult:
    """Train from the all-ones (plain min-sum) starting point.

    ``progress`` is called as ``progress(index, breakdown)`` after each step.
    """
    graph = code.tanner
    gen = derive_generator(code)
    weights = WeightSet.initial(graph, config.iterations, config.parametrization,
                                code_name=code.name, k=code.k)
    state = AdamState.zeros(weights.raw.shape)
    tlog = TrainingLog()
    for b in range(config.num_minibatches):
        mb = make_minibatch(code, config, substream(config.seed, STREAM_TRAIN, b), gen)
        trace = nnms_forward(mb.llr, graph, weights)
        # lam == 0: the codewords never reach the loss
        target = mb.codewords if config.lam > 0.0 else None
        br, grad = multi_loss_and_gradient(trace, target, graph, config.lam, weights)
        if not np.isfinite(br.total) or not np.all(np.isfinite(grad)):
            raise TrainingDiverged(
                f"non-finite loss or gradient at minibatch {b}: total={br.total}, "
                f"max |raw weight|={np.abs(weights.raw).max():.3g}")
        weights.raw = adam_step(weights.raw, grad, state, config.learning_rate)
        tlog.append(b, br)
        if progress is not None:
            progress(b, br)

    tlog.probe_fer = sanity_probe(code, weights, config.seed, generator=gen)
    tlog.degenerate = tlog.probe_fer > DEGENERATE_FER
    if tlog.degenerate:
        log.warning("training produced a degenerate decoder (noiseless probe FER %.3f)",
                    tlog.probe_fer)
    return TrainResult(weights=weights, log=tlog)
