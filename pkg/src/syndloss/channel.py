"""BPSK over AWGN, LLR computation, and seeded random substreams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Named substreams hanging off the single top-level seed.
STREAM_TRAIN = 1
STREAM_EVAL = 2
STREAM_PROBE = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, *key)``.

    Every consumer derives its generator from a fixed key path, so results
    do not depend on the order in which streams are created.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ChannelSample:
    c: np.ndarray
    x: np.ndarray
    y: np.ndarray
    llr: np.ndarray
    sigma: float
    ebn0_db: float
    stream: tuple = ()

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def modulate(c) -> np.ndarray:
    """Bit 0 -> +1, bit 1 -> -1."""
    c = np.asarray(c)
    if np.any((c != 0) & (c != 1)):
        raise ValueError("codeword entries must be 0 or 1")
    return 1.0 - 2.0 * c.astype(np.float64)


def ebn0_to_sigma(ebn0_db, rate: float):
    """Noise standard deviation for unit-energy BPSK at the given Eb/N0 (dB) and code rate."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=np.float64) / 10.0)
    sigma = np.sqrt(1.0 / (2.0 * rate * ebn0))
    return float(sigma) if sigma.ndim == 0 else sigma


def add_awgn(x, sigma, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    if sigma.ndim:
        sigma = sigma.reshape(sigma.shape + (1,) * (x.ndim - sigma.ndim))
    return x + sigma * rng.standard_normal(x.shape)


def llr_from_channel(y, sigma) -> np.ndarray:
    """Channel LLR ``2y/sigma^2``; positive favours bit 0."""
    y = np.asarray(y, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim:
        sigma = sigma.reshape(sigma.shape + (1,) * (y.ndim - sigma.ndim))
    return 2.0 * y / (sigma * sigma)


def transmit(c, ebn0_db: float, rate: float, rng: np.random.Generator,
             stream: tuple = ()) -> ChannelSample:
    c = np.asarray(c, dtype=np.uint8)
    sigma = ebn0_to_sigma(ebn0_db, rate)
    x = modulate(c)
    y = add_awgn(x, sigma, rng)
    return ChannelSample(c=c, x=x, y=y, llr=llr_from_channel(y, sigma), sigma=sigma,
                         ebn0_db=float(ebn0_db), stream=tuple(stream))


def q_function(x: float) -> float:
    """Gaussian tail probability P(Z > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))
