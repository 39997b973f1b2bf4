"""Vectorized numpy kernels; reference backend and fallback for the Cython build.

Every floating-point sum is accumulated in the same order as the compiled
kernels (channel value first, then edges by ascending check index), so the
forward pass agrees bit for bit across backends.
"""

import numpy as np

BACKEND = "numpy"


def _check_node(L, v):
    """Extrinsic min-sum over every check for a batch of edge messages ``v`` (B, E)."""
    B = v.shape[0]
    E = L.edges
    absv = np.empty((B, E + 1))
    np.abs(v, out=absv[:, :E])
    absv[:, E] = np.inf
    neg = np.zeros((B, E + 1), dtype=bool)
    np.less(v, 0.0, out=neg[:, :E])

    mags = absv[:, L.check_pad]                       # (B, m, dc)
    parity = neg[:, L.check_pad].sum(axis=-1) & 1     # (B, m)
    idx1 = np.argmin(mags, axis=-1)                   # first occurrence = lowest index
    min1 = np.take_along_axis(mags, idx1[..., None], axis=-1)[..., 0]
    np.put_along_axis(mags, idx1[..., None], np.inf, axis=-1)
    idx2 = np.argmin(mags, axis=-1)
    min2 = np.take_along_axis(mags, idx2[..., None], axis=-1)[..., 0]

    ec = L.edge_check
    first = idx1[:, ec] == L.edge_pos
    mag = np.where(first, min2[:, ec], min1[:, ec])
    wit = L.check_ptr[ec] + np.where(first, idx2[:, ec], idx1[:, ec])
    flip = (parity[:, ec] ^ neg[:, :E]).astype(bool)
    c = np.where(flip, -mag, mag)
    return c, wit, flip


def _marginal(L, llr, msg_pad):
    s = llr.copy()
    for k in range(L.var_pad.shape[1]):
        s += msg_pad[:, L.var_pad[:, k]]
    return s


def _var_node(L, llr, msg_pad):
    v = llr[:, L.edge_var]
    for k in range(L.ext_pad.shape[1]):
        v += msg_pad[:, L.ext_pad[:, k]]
    return v


def forward(L, llr, w):
    """Full trace: soft outputs (B,T,n), v2c, unweighted c2v (B,T,E), witness edges."""
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    B = llr.shape[0]
    T, E = w.shape
    s_all = np.empty((B, T, L.n))
    v2c = np.empty((B, T, E))
    c2v = np.empty((B, T, E))
    wit = np.empty((B, T, E), dtype=np.int64)
    msg = np.zeros((B, E + 1))
    for t in range(T):
        v = _var_node(L, llr, msg)
        c, wt, _ = _check_node(L, v)
        msg[:, :E] = w[t] * c
        s_all[:, t] = _marginal(L, llr, msg)
        v2c[:, t] = v
        c2v[:, t] = c
        wit[:, t] = wt
    return s_all, v2c, c2v, wit


def _satisfied(L, s):
    neg = np.zeros((s.shape[0], L.n + 1), dtype=bool)
    np.less(s, 0.0, out=neg[:, :L.n])
    return ~np.any(neg[:, L.check_var_pad].sum(axis=-1) & 1, axis=1)


def decode_final(L, llr, w, early_exit=False):
    """Soft output of the last iteration only (or of the first iteration whose
    hard decision satisfies every check, when ``early_exit``)."""
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    B = llr.shape[0]
    T, E = w.shape
    msg = np.zeros((B, E + 1))
    out = np.empty((B, L.n))
    active = np.ones(B, dtype=bool)
    for t in range(T):
        v = _var_node(L, llr, msg)
        c, _, _ = _check_node(L, v)
        msg[:, :E] = w[t] * c
        s = _marginal(L, llr, msg)
        out[active] = s[active]
        if early_exit:
            active &= ~_satisfied(L, s)
            if not active.any():
                break
    return out


def backward(L, grad_s, v2c, c2v, wit, w):
    """Per-sample gradient (B,T,E) w.r.t. effective weights given dLoss/ds (B,T,n)."""
    B, T, E = c2v.shape
    grad_w = np.empty((B, T, E))
    gv_pad = np.zeros((B, E + 1))
    rows = np.arange(B)[:, None] * E
    ev = L.edge_var
    for t in range(T - 1, -1, -1):
        g_m = grad_s[:, t, ev].copy()
        if t < T - 1:
            for k in range(L.ext_pad.shape[1]):
                g_m += gv_pad[:, L.ext_pad[:, k]]
        grad_w[:, t] = g_m * c2v[:, t]
        g_c = g_m * w[t]
        v = v2c[:, t]
        _, _, flip = _check_node(L, v)
        wt = wit[:, t]
        va_neg = np.take_along_axis(v, wt, axis=1) < 0.0
        contrib = np.where(flip ^ va_neg, -g_c, g_c)
        gv_pad[:, :E] = np.bincount((rows + wt).ravel(), weights=contrib.ravel(),
                                    minlength=B * E).reshape(B, E)
    return grad_w


def loss_terms(L, s, c, lam):
    """Per (sample, iteration): syndrome loss, cross-entropy, and d(combined)/ds."""
    from . import losses

    graph = L.graph
    syn = losses.syndrome_loss(s, graph)
    if lam > 0.0:
        c = np.asarray(c, dtype=np.float64)[:, None, :]
        ce = losses.cross_entropy(c, s)
    else:
        ce = np.zeros_like(syn)
    return syn, ce, losses.soft_output_gradient(s, c, graph, lam)
