"""Neural normalized min-sum decoders trained with the syndrome loss."""

from ._backend import BACKEND
from .channel import ebn0_to_sigma, llr_from_channel, modulate
from .decoder import DecodeTrace, WeightSet, decode, hard_decide, nnms_forward
from .linear_code import (ParityCheckMatrix, TannerGraph, build_tanner, derive_generator,
                          encode, hard_syndrome, is_codeword, load_code, parse_alist)
from .losses import (combined_loss, cross_entropy, loss_gradient, multi_loss, soft_syndrome,
                     syndrome_loss)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DecodeTrace", "ParityCheckMatrix", "TannerGraph", "WeightSet", "build_tanner",
    "combined_loss", "cross_entropy", "decode", "derive_generator", "ebn0_to_sigma", "encode",
    "hard_decide", "hard_syndrome", "is_codeword", "llr_from_channel", "load_code",
    "loss_gradient", "modulate", "multi_loss", "nnms_forward", "parse_alist", "soft_syndrome",
    "syndrome_loss",
]
