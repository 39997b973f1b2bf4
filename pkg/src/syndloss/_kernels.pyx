# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled min-sum kernels. Same call signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, log1p

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.int64_t idx_t


cdef inline void _iteration(
    const idx_t[::1] edge_var, const idx_t[::1] check_ptr, const idx_t[::1] var_ptr,
    const idx_t[::1] var_edges, const double[::1] llr, const double[::1] w_t,
    double[::1] msg, double[::1] v, double[::1] c, idx_t[::1] wit, double[::1] s,
    Py_ssize_t n, Py_ssize_t m,
) noexcept nogil:
    cdef Py_ssize_t i, j, e, e2, p, q, i1, i2
    cdef double acc, a, m1, m2
    cdef int parity, neg

    # variable-to-check, extrinsic sums in ascending check order
    for j in range(n):
        for p in range(var_ptr[j], var_ptr[j + 1]):
            e = var_edges[p]
            acc = llr[j]
            for q in range(var_ptr[j], var_ptr[j + 1]):
                e2 = var_edges[q]
                if e2 != e:
                    acc = acc + msg[e2]
            v[e] = acc

    # check-to-variable: two smallest magnitudes, lowest index wins ties
    for i in range(m):
        m1 = INFINITY
        m2 = INFINITY
        i1 = -1
        i2 = -1
        parity = 0
        for e in range(check_ptr[i], check_ptr[i + 1]):
            a = fabs(v[e])
            if v[e] < 0.0:
                parity ^= 1
            if a < m1:
                m2 = m1
                i2 = i1
                m1 = a
                i1 = e
            elif a < m2:
                m2 = a
                i2 = e
        for e in range(check_ptr[i], check_ptr[i + 1]):
            neg = parity ^ (v[e] < 0.0)
            if e == i1:
                a = m2
                wit[e] = i2
            else:
                a = m1
                wit[e] = i1
            c[e] = -a if neg else a
            msg[e] = w_t[e] * c[e]

    for j in range(n):
        acc = llr[j]
        for p in range(var_ptr[j], var_ptr[j + 1]):
            acc = acc + msg[var_edges[p]]
        s[j] = acc


def forward(L, llr_in, w_in):
    cdef const double[:, ::1] llr = np.ascontiguousarray(llr_in, dtype=np.float64)
    cdef const double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const idx_t[::1] edge_var = L.edge_var
    cdef const idx_t[::1] check_ptr = L.check_ptr
    cdef const idx_t[::1] var_ptr = L.var_ptr
    cdef const idx_t[::1] var_edges = L.var_edges
    cdef Py_ssize_t B = llr.shape[0], T = w.shape[0], E = w.shape[1]
    cdef Py_ssize_t n = L.n, m = L.m, b, t

    s_arr = np.empty((B, T, n))
    v_arr = np.empty((B, T, E))
    c_arr = np.empty((B, T, E))
    wit_arr = np.empty((B, T, E), dtype=np.int64)
    cdef double[:, :, ::1] s_all = s_arr
    cdef double[:, :, ::1] v2c = v_arr
    cdef double[:, :, ::1] c2v = c_arr
    cdef idx_t[:, :, ::1] wit = wit_arr
    cdef double[::1] msg = np.zeros(E)

    with nogil:
        for b in range(B):
            msg[:] = 0.0
            for t in range(T):
                _iteration(edge_var, check_ptr, var_ptr, var_edges, llr[b], w[t],
                           msg, v2c[b, t], c2v[b, t], wit[b, t], s_all[b, t], n, m)
    return s_arr, v_arr, c_arr, wit_arr


def decode_final(L, llr_in, w_in, bint early_exit=False):
    cdef const double[:, ::1] llr = np.ascontiguousarray(llr_in, dtype=np.float64)
    cdef const double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const idx_t[::1] edge_var = L.edge_var
    cdef const idx_t[::1] check_ptr = L.check_ptr
    cdef const idx_t[::1] var_ptr = L.var_ptr
    cdef const idx_t[::1] var_edges = L.var_edges
    cdef const idx_t[::1] edge_check = L.edge_check
    cdef Py_ssize_t B = llr.shape[0], T = w.shape[0], E = w.shape[1]
    cdef Py_ssize_t n = L.n, m = L.m, b, t, i, e
    cdef int parity, ok

    out_arr = np.empty((B, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] msg = np.zeros(E)
    cdef double[::1] v = np.empty(E)
    cdef double[::1] c = np.empty(E)
    cdef idx_t[::1] wit = np.empty(E, dtype=np.int64)

    with nogil:
        for b in range(B):
            msg[:] = 0.0
            for t in range(T):
                _iteration(edge_var, check_ptr, var_ptr, var_edges, llr[b], w[t],
                           msg, v, c, wit, out[b], n, m)
                if early_exit:
                    ok = 1
                    for i in range(m):
                        parity = 0
                        for e in range(check_ptr[i], check_ptr[i + 1]):
                            if out[b, edge_var[e]] < 0.0:
                                parity ^= 1
                        if parity:
                            ok = 0
                            break
                    if ok:
                        break
    return out_arr


def backward(L, grad_s_in, v2c_in, c2v_in, wit_in, w_in):
    cdef const double[:, :, ::1] grad_s = np.ascontiguousarray(grad_s_in, dtype=np.float64)
    cdef const double[:, :, ::1] v2c = np.ascontiguousarray(v2c_in, dtype=np.float64)
    cdef const double[:, :, ::1] c2v = np.ascontiguousarray(c2v_in, dtype=np.float64)
    cdef const idx_t[:, :, ::1] wit = np.ascontiguousarray(wit_in, dtype=np.int64)
    cdef const double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const idx_t[::1] edge_var = L.edge_var
    cdef const idx_t[::1] check_ptr = L.check_ptr
    cdef const idx_t[::1] var_ptr = L.var_ptr
    cdef const idx_t[::1] var_edges = L.var_edges
    cdef Py_ssize_t B = c2v.shape[0], T = c2v.shape[1], E = c2v.shape[2]
    cdef Py_ssize_t n = L.n, m = L.m, b, t, i, j, e, e2, p, q, a
    cdef double acc, gc
    cdef int parity, neg

    gw_arr = np.empty((B, T, E))
    cdef double[:, :, ::1] grad_w = gw_arr
    cdef double[::1] g_m = np.empty(E)
    cdef double[::1] g_v = np.zeros(E)

    with nogil:
        for b in range(B):
            g_v[:] = 0.0
            for t in range(T - 1, -1, -1):
                for j in range(n):
                    for p in range(var_ptr[j], var_ptr[j + 1]):
                        e = var_edges[p]
                        acc = grad_s[b, t, j]
                        if t < T - 1:
                            for q in range(var_ptr[j], var_ptr[j + 1]):
                                e2 = var_edges[q]
                                if e2 != e:
                                    acc = acc + g_v[e2]
                        g_m[e] = acc
                for e in range(E):
                    grad_w[b, t, e] = g_m[e] * c2v[b, t, e]
                g_v[:] = 0.0
                for i in range(m):
                    parity = 0
                    for e in range(check_ptr[i], check_ptr[i + 1]):
                        if v2c[b, t, e] < 0.0:
                            parity ^= 1
                    for e in range(check_ptr[i], check_ptr[i + 1]):
                        a = wit[b, t, e]
                        gc = g_m[e] * w[t, e]
                        neg = parity ^ (v2c[b, t, e] < 0.0) ^ (v2c[b, t, a] < 0.0)
                        g_v[a] = g_v[a] + (-gc if neg else gc)
    return gw_arr


cdef inline double _softplus(double x) noexcept nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def loss_terms(L, s_in, c_in, double lam):
    """Per (sample, iteration): syndrome loss, cross-entropy, and d(combined)/ds."""
    cdef const double[:, :, ::1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef const idx_t[::1] check_ptr = L.check_ptr
    cdef const idx_t[::1] edge_var = L.edge_var
    cdef Py_ssize_t B = s.shape[0], T = s.shape[1], n = s.shape[2], m = L.m
    cdef Py_ssize_t b, t, i, e, j, wj
    cdef double mn, a, ss, sign, acc, coeff, cj, sj
    cdef int parity
    cdef bint use_ce = lam > 0.0
    cdef const double[:, ::1] c
    if use_ce:
        c = np.ascontiguousarray(c_in, dtype=np.float64)
    else:
        c = np.zeros((1, 1))

    syn_arr = np.empty((B, T))
    ce_arr = np.zeros((B, T))
    grad_arr = np.zeros((B, T, n))
    cdef double[:, ::1] syn = syn_arr
    cdef double[:, ::1] ce = ce_arr
    cdef double[:, :, ::1] grad = grad_arr
    cdef double hinge_scale = (1.0 - lam) / m
    cdef double ce_scale = lam / n

    with nogil:
        for b in range(B):
            for t in range(T):
                acc = 0.0
                for i in range(m):
                    mn = INFINITY
                    wj = -1
                    parity = 0
                    for e in range(check_ptr[i], check_ptr[i + 1]):
                        j = edge_var[e]
                        a = fabs(s[b, t, j])
                        if s[b, t, j] < 0.0:
                            parity ^= 1
                        if a < mn:
                            mn = a
                            wj = j
                    sign = -1.0 if parity else 1.0
                    ss = sign * mn
                    if ss < 1.0:
                        acc = acc + (1.0 - ss)
                        if lam < 1.0:
                            coeff = -hinge_scale * sign
                            if s[b, t, wj] < 0.0:
                                coeff = -coeff
                            grad[b, t, wj] += coeff
                syn[b, t] = acc / m
                if use_ce:
                    acc = 0.0
                    for j in range(n):
                        cj = c[b, j]
                        sj = s[b, t, j]
                        acc = acc + cj * _softplus(sj) + (1.0 - cj) * _softplus(-sj)
                        grad[b, t, j] += ce_scale * (cj * _sigmoid(sj) - (1.0 - cj) * _sigmoid(-sj))
                    ce[b, t] = acc / n
    return syn_arr, ce_arr, grad_arr
