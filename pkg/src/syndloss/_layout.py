"""Flat integer arrays describing a Tanner graph, shared by both kernel backends."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class KernelLayout:
    n: int
    m: int
    edges: int
    edge_var: np.ndarray     # (E,)
    edge_check: np.ndarray   # (E,)
    edge_pos: np.ndarray     # (E,) position of the edge inside its check
    check_ptr: np.ndarray    # (m+1,) edges of check i are check_ptr[i]:check_ptr[i+1]
    var_ptr: np.ndarray      # (n+1,)
    var_edges: np.ndarray    # (E,) edges grouped by variable, ascending check index
    # Padded forms for the vectorized backend; the pad value is ``edges``.
    check_pad: np.ndarray    # (m, max check degree)
    var_pad: np.ndarray      # (n, max variable degree)
    ext_pad: np.ndarray      # (E, max variable degree - 1) other edges of the same variable
    check_var_pad: np.ndarray  # (m, max check degree) variable indices, pad value n
    graph: object = field(default=None, repr=False)

    @classmethod
    def from_graph(cls, graph) -> KernelLayout:
        n, m, E = graph.n, graph.m, graph.edge_count
        i64 = np.int64
        edge_var = np.asarray(graph.edge_var, dtype=i64)
        edge_check = np.asarray(graph.edge_check, dtype=i64)
        check_deg = np.array([len(c) for c in graph.check_neighbors], dtype=i64)
        check_ptr = np.concatenate([[0], np.cumsum(check_deg)]).astype(i64)
        edge_pos = np.arange(E, dtype=i64) - check_ptr[edge_check]

        var_lists = [[graph.edge_ids[(i, j)] for i in graph.var_neighbors[j]] for j in range(n)]
        var_deg = np.array([len(v) for v in var_lists], dtype=i64)
        var_ptr = np.concatenate([[0], np.cumsum(var_deg)]).astype(i64)
        var_edges = np.array([e for v in var_lists for e in v], dtype=i64)

        dc = int(check_deg.max())
        dv = int(var_deg.max()) if n else 0
        check_pad = np.full((m, dc), E, dtype=i64)
        check_var_pad = np.full((m, dc), n, dtype=i64)
        for i in range(m):
            check_pad[i, :check_deg[i]] = np.arange(check_ptr[i], check_ptr[i + 1])
            check_var_pad[i, :check_deg[i]] = graph.check_neighbors[i]
        var_pad = np.full((n, dv), E, dtype=i64)
        for j, v in enumerate(var_lists):
            var_pad[j, :len(v)] = v
        ext_pad = np.full((E, max(dv - 1, 0)), E, dtype=i64)
        for v in var_lists:
            for e in v:
                others = [x for x in v if x != e]
                ext_pad[e, :len(others)] = others

        arrays = dict(edge_var=edge_var, edge_check=edge_check, edge_pos=edge_pos,
                      check_ptr=check_ptr, var_ptr=var_ptr, var_edges=var_edges,
                      check_pad=check_pad, var_pad=var_pad, ext_pad=ext_pad,
                      check_var_pad=check_var_pad)
        for a in arrays.values():
            a.setflags(write=False)
        return cls(n=n, m=m, edges=E, graph=graph, **arrays)

    @property
    def min_check_degree(self) -> int:
        return int(np.diff(self.check_ptr).min())
