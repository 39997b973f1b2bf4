"""Binary linear codes: parity-check matrices, Tanner graphs, alist I/O and encoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class AlistError(ValueError):
    """Malformed alist input. ``lineno`` is 1-based (0 when unknown)."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


class RankDeficientError(ValueError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(
            f"parity-check matrix is rank deficient: row {row} (0-based) "
            "is a GF(2) combination of earlier rows"
        )


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Dense binary parity-check matrix H with ``n - k`` rows and ``n`` columns."""

    n: int
    k: int
    rows: np.ndarray
    name: str = ""

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.uint8, copy=True)
        if rows.ndim != 2 or rows.shape[1] != self.n:
            raise ValueError(f"rows must have shape (n-k, {self.n}), got {rows.shape}")
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got n={self.n} k={self.k}")
        if rows.shape[0] != self.n - self.k:
            raise ValueError(f"expected {self.n - self.k} rows, got {rows.shape[0]}")
        if np.any(rows > 1):
            raise ValueError("entries must be 0 or 1")
        empty = np.flatnonzero(rows.sum(axis=1) == 0)
        if empty.size:
            raise ValueError(f"row {int(empty[0])} has no 1 entries")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_dense(cls, h, name: str = "") -> ParityCheckMatrix:
        h = np.asarray(h)
        m, n = h.shape
        return cls(n=n, k=n - m, rows=h, name=name)

    @property
    def m(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    def __eq__(self, other):
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.n == other.n and self.k == other.k and np.array_equal(self.rows, other.rows)

    __hash__ = None

    @cached_property
    def tanner(self) -> TannerGraph:
        return build_tanner(self)


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Bipartite adjacency of H.

    Edges are numbered check-major with ascending variable index inside each
    check, so edge ``e`` of check ``i`` occupies ``check_ptr[i] <= e < check_ptr[i+1]``.
    """

    n: int
    check_neighbors: tuple[tuple[int, ...], ...]
    var_neighbors: tuple[tuple[int, ...], ...]
    edge_ids: dict[tuple[int, int], int] = field(repr=False)
    edge_count: int

    @property
    def m(self) -> int:
        return len(self.check_neighbors)

    @cached_property
    def edge_check(self) -> np.ndarray:
        return np.repeat(np.arange(self.m), [len(c) for c in self.check_neighbors])

    @cached_property
    def edge_var(self) -> np.ndarray:
        return np.fromiter((j for c in self.check_neighbors for j in c), dtype=np.int64,
                           count=self.edge_count)

    @cached_property
    def layout(self):
        from ._layout import KernelLayout

        return KernelLayout.from_graph(self)

    def same_adjacency(self, other: TannerGraph) -> bool:
        return (self.n == other.n and self.check_neighbors == other.check_neighbors
                and self.var_neighbors == other.var_neighbors)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Systematic generator in permuted coordinates.

    ``systematic`` is ``n x k`` with the identity on top; the codeword in the
    original bit order is ``c[column_permutation] = systematic @ u``.
    """

    systematic: np.ndarray
    column_permutation: np.ndarray

    @property
    def n(self) -> int:
        return self.systematic.shape[0]

    @property
    def k(self) -> int:
        return self.systematic.shape[1]

    @cached_property
    def columns(self) -> np.ndarray:
        """G in the original bit order (``n x k``)."""
        g = np.empty_like(self.systematic)
        g[self.column_permutation] = self.systematic
        return g

    def encode_batch(self, u: np.ndarray) -> np.ndarray:
        """Encode each row of ``u`` (``B x k``); returns ``B x n`` uint8."""
        u = np.asarray(u, dtype=np.uint8)
        if u.ndim != 2 or u.shape[1] != self.k:
            raise ValueError(f"messages must have shape (B, {self.k}), got {u.shape}")
        # Integer matmul; parity of the count.
        return ((u.astype(np.int64) @ self.columns.T.astype(np.int64)) & 1).astype(np.uint8)


def _tokens(line: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in line.split()]
    except ValueError:
        raise AlistError(lineno, f"non-integer token in {line.strip()!r}") from None


def parse_alist(text: str, name: str = "") -> ParityCheckMatrix:
    """Parse the alist sparse-matrix format into a :class:`ParityCheckMatrix`.

    Zero padding of adjacency rows is accepted. The variable and check
    adjacency sections must describe the same matrix.
    """
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if len(lines) < 4:
        raise AlistError(len(lines), "truncated header: expected at least 4 non-empty lines")

    lineno, ln = lines[0]
    head = _tokens(ln, lineno)
    if len(head) != 2:
        raise AlistError(lineno, f"header must be 'n m', got {ln.strip()!r}")
    n, m = head
    if n <= 0 or m <= 0 or m >= n:
        raise AlistError(lineno, f"need 0 < m < n, got n={n} m={m}")

    lineno, ln = lines[1]
    maxdeg = _tokens(ln, lineno)
    if len(maxdeg) != 2:
        raise AlistError(lineno, "expected two maximum degrees")
    max_dv, max_dc = maxdeg

    lineno, ln = lines[2]
    dv = _tokens(ln, lineno)
    if len(dv) != n:
        raise AlistError(lineno, f"expected {n} variable degrees, got {len(dv)}")
    lineno, ln = lines[3]
    dc = _tokens(ln, lineno)
    if len(dc) != m:
        raise AlistError(lineno, f"expected {m} check degrees, got {len(dc)}")
    if any(d > max_dv for d in dv):
        raise AlistError(lines[2][0], f"variable degree exceeds stated maximum {max_dv}")
    if any(d > max_dc for d in dc):
        raise AlistError(lines[3][0], f"check degree exceeds stated maximum {max_dc}")

    body = lines[4:]
    if len(body) < n + m:
        at = body[-1][0] if body else lines[3][0]
        raise AlistError(at, f"expected {n + m} adjacency lines, found {len(body)}")

    def read_block(block, count, limit, degrees, what):
        out = []
        for idx, (lineno, ln) in enumerate(block[:count]):
            vals = _tokens(ln, lineno)
            nz = [v for v in vals if v != 0]
            if vals[len(nz):] != [0] * (len(vals) - len(nz)):
                raise AlistError(lineno, "zero padding must be trailing")
            if len(nz) != degrees[idx]:
                raise AlistError(lineno, f"{what} {idx + 1} lists {len(nz)} entries, "
                                         f"degree says {degrees[idx]}")
            for v in nz:
                if not 1 <= v <= limit:
                    raise AlistError(lineno, f"index {v} out of range 1..{limit}")
            if len(set(nz)) != len(nz):
                raise AlistError(lineno, "repeated index")
            out.append([v - 1 for v in nz])
        return out

    var_adj = read_block(body[:n], n, m, dv, "variable")
    chk_adj = read_block(body[n:n + m], m, n, dc, "check")

    h = np.zeros((m, n), dtype=np.uint8)
    for i, nb in enumerate(chk_adj):
        h[i, nb] = 1
    hv = np.zeros((m, n), dtype=np.uint8)
    for j, nb in enumerate(var_adj):
        hv[nb, j] = 1
    if not np.array_equal(h, hv):
        i, j = np.argwhere(h != hv)[0]
        raise AlistError(body[n + i][0], f"check {i + 1} / variable {j + 1} adjacency "
                                         "disagrees with the variable section")
    for i in range(m):
        if not chk_adj[i]:
            raise AlistError(body[n + i][0], f"check {i + 1} is empty")
    try:
        return ParityCheckMatrix(n=n, k=n - m, rows=h, name=name)
    except ValueError as exc:
        raise AlistError(0, str(exc)) from None


def read_alist(path) -> ParityCheckMatrix:
    path = Path(path)
    return parse_alist(path.read_text(), name=path.stem)


def emit_alist(h: ParityCheckMatrix) -> str:
    """Serialize H in alist format, zero-padding adjacency rows to the maximum degree."""
    rows = h.rows
    cols = [np.flatnonzero(rows[:, j]) + 1 for j in range(h.n)]
    chks = [np.flatnonzero(rows[i]) + 1 for i in range(h.m)]
    max_dv = max(len(c) for c in cols)
    max_dc = max(len(c) for c in chks)

    def pad(v, width):
        return " ".join(str(int(x)) for x in list(v) + [0] * (width - len(v)))

    out = [f"{h.n} {h.m}", f"{max_dv} {max_dc}",
           " ".join(str(len(c)) for c in cols), " ".join(str(len(c)) for c in chks)]
    out += [pad(c, max_dv) for c in cols]
    out += [pad(c, max_dc) for c in chks]
    return "\n".join(out) + "\n"


def build_tanner(h: ParityCheckMatrix) -> TannerGraph:
    check_nb = tuple(tuple(int(j) for j in np.flatnonzero(h.rows[i])) for i in range(h.m))
    var_nb = tuple(tuple(int(i) for i in np.flatnonzero(h.rows[:, j])) for j in range(h.n))
    edge_ids = {}
    for i, nb in enumerate(check_nb):
        for j in nb:
            edge_ids[(i, j)] = len(edge_ids)
    return TannerGraph(n=h.n, check_neighbors=check_nb, var_neighbors=var_nb,
                       edge_ids=edge_ids, edge_count=len(edge_ids))


def derive_generator(h: ParityCheckMatrix) -> GeneratorMatrix:
    """Systematic generator from H by GF(2) elimination with column pivoting.

    Rows are reduced in their original order, so a row that vanishes is
    reported as dependent on the rows above it.
    """
    m, n = h.m, h.n
    reduced = []  # (pivot column, row) kept in reduced row echelon form
    for r in range(m):
        row = h.rows[r].copy()
        for col, prow in reduced:
            if row[col]:
                row ^= prow
        nz = np.flatnonzero(row)
        if nz.size == 0:
            raise RankDeficientError(r)
        col = int(nz[0])
        for idx, (c2, prow) in enumerate(reduced):
            if prow[col]:
                reduced[idx] = (c2, prow ^ row)
        reduced.append((col, row))

    pivots = [c for c, _ in reduced]
    pivot_set = set(pivots)
    free = [j for j in range(n) if j not in pivot_set]
    rref = np.array([row for _, row in reduced], dtype=np.uint8)
    systematic = np.vstack([np.eye(len(free), dtype=np.uint8), rref[:, free]])
    perm = np.array(free + pivots, dtype=np.int64)
    systematic.setflags(write=False)
    perm.setflags(write=False)
    return GeneratorMatrix(systematic=systematic, column_permutation=perm)


def encode(g: GeneratorMatrix, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    if u.shape != (g.k,):
        raise ValueError(f"message must have length {g.k}, got shape {u.shape}")
    c = np.empty(g.n, dtype=np.uint8)
    c[g.column_permutation] = (g.systematic.astype(np.int64) @ u) & 1
    return c


def hard_syndrome(h: ParityCheckMatrix, s) -> np.ndarray:
    """Bipolar syndrome: per-check product of ``sign(s_j)`` with ``sign(0) = +1``."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (h.n,):
        raise ValueError(f"expected vector of length {h.n}, got shape {s.shape}")
    neg = (s < 0).astype(np.int64)
    parity = (h.rows.astype(np.int64) @ neg) & 1
    return (1 - 2 * parity).astype(np.int8)


def is_codeword(h: ParityCheckMatrix, c) -> bool:
    c = np.asarray(c)
    if c.shape != (h.n,):
        raise ValueError(f"expected word of length {h.n}, got shape {c.shape}")
    return not np.any((h.rows.astype(np.int64) @ c.astype(np.int64)) & 1)


def load_code(name_or_path) -> ParityCheckMatrix:
    """Load a bundled code by name (e.g. ``"hamming_7_4"``) or an alist file path."""
    p = Path(name_or_path)
    if p.suffix == ".alist" or p.exists():
        return read_alist(p)
    bundled = Path(__file__).parent / "data" / f"{name_or_path}.alist"
    if not bundled.exists():
        raise FileNotFoundError(f"no alist file or bundled code named {name_or_path!r}")
    return read_alist(bundled)


def bundled_codes() -> list[str]:
    return sorted(p.stem for p in (Path(__file__).parent / "data").glob("*.alist"))
