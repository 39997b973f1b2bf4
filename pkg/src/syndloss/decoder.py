"""Unrolled neural normalized min-sum (NNMS) decoding.

Iteration ``t`` of the flooding schedule, with ``msg`` the weighted
check-to-variable messages of the previous iteration (zero before the first):

    v2c[e]  = llr[j] + sum(msg[e'] for e' at variable j, e' != e)
    c2v[e]  = min |v2c| * prod sign(v2c) over the other edges of e's check
    msg[e]  = w[t, e] * c2v[e]
    s[t, j] = llr[j] + sum(msg[e] for e at variable j)

Each weight multiplies its check-to-variable message wherever that message
is consumed: in the marginal ``s[t]`` and in the next iteration's
variable-to-check update.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .linear_code import TannerGraph

DEFAULT_ITERATIONS = 5
PARAMETRIZATIONS = ("identity", "softplus")
EDGE_ORDER = "check-major ascending"
SOFTPLUS_INV_ONE = float(np.log(np.e - 1.0))


def softplus(x):
    x = np.asarray(x, dtype=np.float64)
    return np.logaddexp(0.0, x)


def softplus_inv(y):
    y = np.asarray(y, dtype=np.float64)
    # log(exp(y) - 1) = y + log(1 - exp(-y))
    return y + np.log(-np.expm1(-y))


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


class WeightShapeError(ValueError):
    pass


@dataclass
class WeightSet:
    """Per-iteration, per-edge decoder weights.

    ``raw`` holds the trainable parameters; the decoder uses
    :func:`effective_weights` (identity, or softplus to keep weights positive).
    """

    raw: np.ndarray
    parametrization: str = "identity"
    code_name: str = ""
    n: int = 0
    k: int = 0

    def __post_init__(self):
        self.raw = np.array(self.raw, dtype=np.float64)
        if self.raw.ndim != 2:
            raise WeightShapeError(f"raw weights must be 2-D (T, E), got {self.raw.shape}")
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(f"unknown parametrization {self.parametrization!r}")

    @classmethod
    def initial(cls, graph: TannerGraph, iterations: int = DEFAULT_ITERATIONS,
                parametrization: str = "identity", code_name: str = "", k: int = 0) -> WeightSet:
        """Weights whose effective value is exactly 1 (plain min-sum)."""
        if iterations < 1:
            raise ValueError("need at least one iteration")
        fill = 1.0 if parametrization == "identity" else SOFTPLUS_INV_ONE
        raw = np.full((iterations, graph.edge_count), fill)
        return cls(raw=raw, parametrization=parametrization, code_name=code_name,
                   n=graph.n, k=k)

    @property
    def iterations(self) -> int:
        return self.raw.shape[0]

    @property
    def edge_count(self) -> int:
        return self.raw.shape[1]

    @property
    def values(self) -> np.ndarray:
        return effective_weights(self)

    def copy(self) -> WeightSet:
        return WeightSet(raw=self.raw.copy(), parametrization=self.parametrization,
                         code_name=self.code_name, n=self.n, k=self.k)

    def check_graph(self, graph: TannerGraph):
        if self.edge_count != graph.edge_count or (self.n and self.n != graph.n):
            raise WeightShapeError(
                f"weights are shaped (T={self.iterations}, E={self.edge_count}, n={self.n}) "
                f"but the code has E={graph.edge_count}, n={graph.n}")

    # -- text serialization ------------------------------------------------

    def dumps(self) -> str:
        head = [
            "# syndloss weight file",
            f"code,{self.code_name}",
            f"n,{self.n}",
            f"k,{self.k}",
            f"iterations,{self.iterations}",
            f"edge_count,{self.edge_count}",
            f"parametrization,{self.parametrization}",
            f"edge_order,{EDGE_ORDER}",
            "raw",
        ]
        return "\n".join(head + [repr(float(v)) for v in self.raw.ravel()]) + "\n"

    @classmethod
    def loads(cls, text: str) -> WeightSet:
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        meta = {}
        try:
            split = lines.index("raw")
        except ValueError:
            raise ValueError("weight file has no 'raw' section") from None
        for ln in lines[:split]:
            key, _, val = ln.partition(",")
            meta[key] = val
        if meta.get("edge_order") != EDGE_ORDER:
            raise ValueError(f"unsupported edge ordering {meta.get('edge_order')!r}")
        T, E = int(meta["iterations"]), int(meta["edge_count"])
        vals = np.array([float(v) for v in lines[split + 1:]])
        if vals.size != T * E:
            raise WeightShapeError(f"expected {T * E} raw values, found {vals.size}")
        return cls(raw=vals.reshape(T, E), parametrization=meta["parametrization"],
                   code_name=meta.get("code", ""), n=int(meta.get("n", 0)),
                   k=int(meta.get("k", 0)))

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> WeightSet:
        return cls.loads(Path(path).read_text())


def effective_weights(w: WeightSet) -> np.ndarray:
    if w.parametrization == "softplus":
        return softplus(w.raw)
    return w.raw.copy()


@dataclass
class DecodeTrace:
    """Everything recorded by :func:`nnms_forward`.

    Arrays carry an optional leading batch axis: ``soft_outputs`` is
    ``(..., T, n)`` and the per-edge arrays are ``(..., T, E)``. ``c2v`` holds
    the check-node outputs before weighting; ``witnesses`` holds, per edge,
    the edge whose magnitude was the extrinsic minimum.
    """

    soft_outputs: np.ndarray
    v2c: np.ndarray
    c2v: np.ndarray
    witnesses: np.ndarray
    input_llr: np.ndarray
    weights: np.ndarray

    @property
    def iterations(self) -> int:
        return self.soft_outputs.shape[-2]

    @property
    def batched(self) -> bool:
        return self.soft_outputs.ndim == 3

    @property
    def final(self) -> np.ndarray:
        return self.soft_outputs[..., -1, :]


def min_sum_check(inputs) -> tuple[float, int]:
    """Min-sum check node: ``min|x| * prod sign(x)``, plus the argmin (lowest index on ties)."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.size == 0:
        raise ValueError("check node needs at least one input")
    idx = int(np.argmin(np.abs(x)))
    neg = int(np.count_nonzero(x < 0.0)) & 1
    mag = float(abs(x[idx]))
    return (-mag if neg else mag), idx


def _prepare(llr, graph: TannerGraph, weights: WeightSet):
    weights.check_graph(graph)
    L = graph.layout
    if L.min_check_degree < 2:
        raise ValueError("min-sum decoding needs every check to have degree >= 2")
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape[-1] != graph.n or llr.ndim not in (1, 2):
        raise ValueError(f"llr must have shape (n,) or (B, n) with n={graph.n}, got {llr.shape}")
    return L, np.atleast_2d(llr), effective_weights(weights)


def nnms_forward(llr, graph: TannerGraph, weights: WeightSet) -> DecodeTrace:
    """Run all ``T`` iterations and keep the full trace (for losses and backprop)."""
    L, llr2, w = _prepare(llr, graph, weights)
    s, v, c, wit = kernels.forward(L, llr2, w)
    if np.ndim(llr) == 1:
        s, v, c, wit = s[0], v[0], c[0], wit[0]
    return DecodeTrace(soft_outputs=s, v2c=v, c2v=c, witnesses=wit,
                       input_llr=np.asarray(llr, dtype=np.float64), weights=w)


def decode(llr, graph: TannerGraph, weights: WeightSet, early_exit: bool = False) -> np.ndarray:
    """Final soft output only; the fast path used for evaluation."""
    L, llr2, w = _prepare(llr, graph, weights)
    out = kernels.decode_final(L, llr2, w, early_exit)
    return out[0] if np.ndim(llr) == 1 else out


def hard_decide(s) -> np.ndarray:
    """Bit estimate ``0.5 - 0.5 * sign(s)`` with ``sign(0) = +1``."""
    return (np.asarray(s) < 0).astype(np.uint8)
