"""Syndrome loss, cross-entropy, their combination over decoder iterations, and gradients.

Soft outputs follow the decoder convention: positive means bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .decoder import DecodeTrace, WeightSet, sigmoid
from .linear_code import TannerGraph


@dataclass
class LossBreakdown:
    """Loss parts summed over iterations (and averaged over a batch, if any).

    ``syndrome_part`` and ``cross_entropy_part`` are unweighted; ``total``
    applies ``(1 - lam)`` and ``lam``. With ``lam == 0`` the cross-entropy is
    never evaluated and reported as 0.
    """

    syndrome_part: float
    cross_entropy_part: float
    lam: float
    total: float
    per_iteration: list[float] = field(default_factory=list)


def _check_lambda(lam):
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def _soft_syndrome_parts(s, graph: TannerGraph):
    """Soft syndrome (..., m), sign product (..., m) and witness variable (..., m)."""
    L = graph.layout
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != graph.n:
        raise ValueError(f"expected soft output of length {graph.n}, got {s.shape[-1]}")
    pad_shape = s.shape[:-1] + (1,)
    absx = np.concatenate([np.abs(s), np.full(pad_shape, np.inf)], axis=-1)
    neg = np.concatenate([s < 0.0, np.zeros(pad_shape, dtype=bool)], axis=-1)
    mags = absx[..., L.check_var_pad]
    idx = np.argmin(mags, axis=-1)
    mn = np.take_along_axis(mags, idx[..., None], axis=-1)[..., 0]
    sign = 1.0 - 2.0 * (neg[..., L.check_var_pad].sum(axis=-1) & 1)
    witness = L.check_var_pad[np.arange(L.m), idx]
    return sign * mn, sign, witness


def soft_syndrome(s, graph: TannerGraph, return_witness: bool = False):
    """Per check: ``min |s_j| * prod sign(s_j)`` over the check's variables."""
    ss, _, witness = _soft_syndrome_parts(s, graph)
    return (ss, witness) if return_witness else ss


def syndrome_loss(s, graph: TannerGraph):
    """Mean hinge ``max(1 - softsynd_i, 0)`` over checks; batched over leading axes."""
    ss = soft_syndrome(s, graph)
    return np.maximum(1.0 - ss, 0.0).mean(axis=-1)


def cross_entropy(c, s):
    """Mean binary cross-entropy of bits ``c`` under soft output ``s`` (log-sigmoid form)."""
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if c.shape[-1] != s.shape[-1]:
        raise ValueError(f"length mismatch: c has {c.shape[-1]}, s has {s.shape[-1]}")
    # -log g(-s) = softplus(s); -log(1 - g(-s)) = softplus(-s)
    per_bit = c * np.logaddexp(0.0, s) + (1.0 - c) * np.logaddexp(0.0, -s)
    return per_bit.mean(axis=-1)


def combined_loss(c, s, graph: TannerGraph, lam: float) -> LossBreakdown:
    _check_lambda(lam)
    syn = float(np.mean(syndrome_loss(s, graph)))
    ce = float(np.mean(cross_entropy(c, s))) if lam > 0.0 else 0.0
    total = (1.0 - lam) * syn + lam * ce
    return LossBreakdown(syn, ce, lam, total, [total])


def multi_loss(trace: DecodeTrace, c, graph: TannerGraph, lam: float) -> LossBreakdown:
    """Combined loss summed over every iteration's soft output (mean over a batch)."""
    _check_lambda(lam)
    s = trace.soft_outputs                          # (..., T, n)
    syn = syndrome_loss(s, graph)                   # (..., T)
    if lam > 0.0:
        c = np.asarray(c, dtype=np.float64)
        ce = cross_entropy(c[..., None, :], s)
    else:
        ce = np.zeros_like(syn)
    per_t = (1.0 - lam) * syn + lam * ce
    if trace.batched:
        syn, ce, per_t = syn.mean(axis=0), ce.mean(axis=0), per_t.mean(axis=0)
    return LossBreakdown(float(syn.sum()), float(ce.sum()), lam, float(per_t.sum()),
                         [float(v) for v in per_t])


def soft_output_gradient(s, c, graph: TannerGraph, lam: float) -> np.ndarray:
    """d(loss)/ds for each soft output, with ``s`` shaped (..., n).

    Hinge subgradient is -1 strictly below 1 and 0 elsewhere; the soft
    syndrome routes its gradient to the minimum-magnitude witness only.
    """
    _check_lambda(lam)
    s = np.asarray(s, dtype=np.float64)
    n, m = graph.n, graph.m
    grad = np.zeros(s.shape[:-1] + (n + 1,))
    if lam < 1.0:
        ss, sign, witness = _soft_syndrome_parts(s, graph)
        active = ss < 1.0
        s_pad = np.concatenate([s, np.zeros(s.shape[:-1] + (1,))], axis=-1)
        s_w = np.take_along_axis(s_pad, witness, axis=-1)
        coeff = np.where(active, -(1.0 - lam) / m, 0.0) * sign * np.where(s_w < 0.0, -1.0, 1.0)
        flat = coeff.reshape(-1, m)
        rows = np.arange(flat.shape[0])[:, None] * (n + 1)
        grad = np.bincount((rows + witness.reshape(-1, m)).ravel(), weights=flat.ravel(),
                           minlength=flat.shape[0] * (n + 1)).reshape(grad.shape)
    grad = grad[..., :n]
    if lam > 0.0:
        c = np.asarray(c, dtype=np.float64)
        grad = grad + (lam / n) * (c * sigmoid(s) - (1.0 - c) * sigmoid(-s))
    return grad


def _backprop(trace: DecodeTrace, grad_s, graph: TannerGraph, weights: WeightSet,
              per_sample: bool):
    w = trace.weights
    if w.shape != weights.raw.shape:
        raise ValueError(f"trace was recorded with weights {w.shape}, got {weights.raw.shape}")
    g = kernels.backward(graph.layout, grad_s, trace.v2c, trace.c2v, trace.witnesses, w)
    if weights.parametrization == "softplus":
        g = g * sigmoid(weights.raw)
    return g if per_sample else g.mean(axis=0)


def _as_batch(trace: DecodeTrace) -> DecodeTrace:
    if trace.batched:
        return trace
    return DecodeTrace(trace.soft_outputs[None], trace.v2c[None], trace.c2v[None],
                       trace.witnesses[None], trace.input_llr[None], trace.weights)


def multi_loss_and_gradient(trace: DecodeTrace, c, graph: TannerGraph, lam: float,
                            weights: WeightSet, per_sample: bool = False):
    """:func:`multi_loss` and :func:`loss_gradient` in one pass over the trace."""
    _check_lambda(lam)
    weights.check_graph(graph)
    batched = trace.batched
    trace = _as_batch(trace)
    if lam > 0.0:
        c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    else:
        c = None
    syn, ce, grad_s = kernels.loss_terms(graph.layout, trace.soft_outputs, c, lam)
    per_t = (1.0 - lam) * syn + lam * ce
    syn_m, ce_m, per_t_m = syn.mean(axis=0), ce.mean(axis=0), per_t.mean(axis=0)
    br = LossBreakdown(float(syn_m.sum()), float(ce_m.sum()), lam, float(per_t_m.sum()),
                       [float(v) for v in per_t_m])
    g = _backprop(trace, grad_s, graph, weights, per_sample)
    if per_sample and not batched:
        g = g[0]
    return br, g


def loss_gradient(trace: DecodeTrace, c, graph: TannerGraph, lam: float,
                  weights: WeightSet, per_sample: bool = False) -> np.ndarray:
    """Gradient of :func:`multi_loss` w.r.t. ``weights.raw``.

    For a batched trace the result is the batch mean (or one gradient per
    sample with ``per_sample=True``).
    """
    return multi_loss_and_gradient(trace, c, graph, lam, weights, per_sample)[1]
