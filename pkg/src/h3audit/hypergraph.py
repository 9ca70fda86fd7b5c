"""3-uniform hypergraphs with pair-indexed neighbourhood bitsets.

Vertices are ``0..n-1``. Unordered pairs ``{u, v}`` (``u < v``) are numbered
lexicographically, so pair ``(0, 1)`` is 0, ``(0, 2)`` is 1, ... and
``(n-2, n-1)`` is ``C(n, 2) - 1``. Every neighbourhood ``N({u, v})`` is stored
as a row of little-endian 64-bit words (bit ``w`` of the row is vertex ``w``).

Incidences are counted with multiplicity: ``e(X, Y)`` is the number of
(pair, vertex) combinations ``(S, v)`` with ``S in X``, ``v in Y`` and
``S | {v}`` an edge. With this convention a hypergraph and its pair-vertex
bipartite incidence graph have identical discrepancies.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import H3Error

WORD = 64


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def n_words(n: int) -> int:
    return max(1, (n + WORD - 1) // WORD)


def pair_index(u: int, v: int, n: int) -> int:
    """Lexicographic index of the unordered pair {u, v}; symmetric in u, v."""
    if u == v:
        raise H3Error("DEGENERATE_PAIR", f"pair ({u}, {v}) repeats a vertex")
    if u > v:
        u, v = v, u
    if u < 0 or v >= n:
        raise H3Error("OUT_OF_RANGE", f"pair ({u}, {v}) outside 0..{n - 1}")
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def pair_from_index(i: int, n: int) -> tuple[int, int]:
    if not 0 <= i < n_pairs(n):
        raise H3Error("OUT_OF_RANGE", f"pair index {i} outside 0..{n_pairs(n) - 1}")
    u = 0
    row = n - 1
    while i >= row:
        i -= row
        u += 1
        row -= 1
    return u, u + 1 + i


def pair_table(n: int) -> np.ndarray:
    """``(C(n,2), 2)`` array whose row ``i`` is the pair with index ``i``."""
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    u, v = np.triu_indices(n, k=1)
    return np.stack([u, v], axis=1).astype(np.int64)


def pair_indices(u, v, n: int) -> np.ndarray:
    """Vectorised :func:`pair_index` for arrays with ``u < v`` elementwise."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


# ---------------------------------------------------------------------------
# set types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _BitSet:
    universe: int
    bits: int = 0
    size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.universe:
            raise H3Error("OUT_OF_RANGE", f"bitset has elements outside 0..{self.universe - 1}")
        object.__setattr__(self, "size", self.bits.bit_count())

    @classmethod
    def _from_elements(cls, universe: int, elements: Iterable[int], **kw):
        bits = 0
        for x in elements:
            x = int(x)
            if not 0 <= x < universe:
                raise H3Error("OUT_OF_RANGE", f"element {x} outside 0..{universe - 1}")
            bits |= 1 << x
        return cls(universe=universe, bits=bits, **kw)

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return self.bits != 0

    def __iter__(self) -> Iterator[int]:
        b = self.bits
        while b:
            low = b & -b
            yield low.bit_length() - 1
            b ^= low

    def __contains__(self, x: int) -> bool:
        return 0 <= x < self.universe and (self.bits >> x) & 1 == 1

    def _check(self, other: "_BitSet"):
        if type(other) is not type(self) or other.universe != self.universe:
            raise H3Error("UNIVERSE_MISMATCH", "set operation on sets over different universes")

    def __and__(self, other):
        self._check(other)
        return self._replace(self.bits & other.bits)

    def __or__(self, other):
        self._check(other)
        return self._replace(self.bits | other.bits)

    def __sub__(self, other):
        self._check(other)
        return self._replace(self.bits & ~other.bits)

    def issubset(self, other) -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def _replace(self, bits: int):
        return type(self)(universe=self.universe, bits=bits)

    def to_list(self) -> list[int]:
        return list(self)

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.int64, count=self.size)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.universe, dtype=bool)
        m[self.to_array()] = True
        return m


@dataclass(frozen=True)
class VertexSet(_BitSet):
    """Subset of ``V = {0..n-1}``; ``universe`` is ``n``."""

    @classmethod
    def of(cls, n: int, vertices: Iterable[int] = ()) -> "VertexSet":
        return cls._from_elements(n, vertices)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(universe=n, bits=(1 << n) - 1)

    @classmethod
    def from_mask(cls, mask) -> "VertexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls.of(len(mask), np.flatnonzero(mask))


@dataclass(frozen=True)
class PairSet(_BitSet):
    """Subset of ``(V choose 2)`` stored over pair indices; ``universe`` is ``C(n,2)``."""

    n: int = 0

    def _replace(self, bits: int):
        return PairSet(universe=self.universe, bits=bits, n=self.n)

    @classmethod
    def of(cls, n: int, indices: Iterable[int] = ()) -> "PairSet":
        return cls._from_elements(n_pairs(n), indices, n=n)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Sequence[int]]) -> "PairSet":
        return cls.of(n, (pair_index(u, v, n) for u, v in pairs))

    @classmethod
    def full(cls, n: int) -> "PairSet":
        return cls(universe=n_pairs(n), bits=(1 << n_pairs(n)) - 1, n=n)

    @classmethod
    def within(cls, vertices: VertexSet) -> "PairSet":
        """All pairs inside a vertex set, i.e. ``(X choose 2)``."""
        n = vertices.universe
        return cls.from_pairs(n, combinations(vertices.to_list(), 2))

    @classmethod
    def from_mask(cls, n: int, mask) -> "PairSet":
        return cls.of(n, np.flatnonzero(np.asarray(mask, dtype=bool)))

    def pairs(self) -> list[tuple[int, int]]:
        table = pair_table(self.n)
        return [(int(table[i, 0]), int(table[i, 1])) for i in self]


# ---------------------------------------------------------------------------
# hypergraph
# ---------------------------------------------------------------------------


def _words_to_int(row: np.ndarray) -> int:
    out = 0
    for i, w in enumerate(row.tolist()):
        out |= int(w) << (WORD * i)
    return out


@dataclass(frozen=True, eq=False)
class Hypergraph3:
    """Immutable 3-uniform hypergraph on vertices ``0..n-1``.

    ``edges`` is canonicalised on construction: every triple is sorted and
    the list is deduplicated and sorted lexicographically.
    """

    n: int
    edges: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise H3Error("OUT_OF_RANGE", f"negative vertex count {self.n}")
        raw = self.edges
        if isinstance(raw, np.ndarray):
            E = raw.astype(np.int64, copy=False).reshape(-1, raw.shape[-1] if raw.ndim == 2 else 3)
        else:
            rows = [tuple(e) for e in raw]
            for e in rows:
                if len(e) != 3:
                    raise H3Error("DEGENERATE_EDGE", f"edge {e} is not a triple")
            E = np.asarray(rows, dtype=np.int64).reshape(-1, 3)
        if E.shape[1] != 3:
            raise H3Error("DEGENERATE_EDGE", "edges must be triples")
        E = np.sort(E, axis=1)
        bad = (E[:, 0] == E[:, 1]) | (E[:, 1] == E[:, 2])
        if bad.any():
            raise H3Error("DEGENERATE_EDGE", f"edge {tuple(E[bad][0].tolist())} repeats a vertex")
        out = (E[:, 0] < 0) | (E[:, 2] >= self.n)
        if out.any():
            raise H3Error("OUT_OF_RANGE", f"edge {tuple(E[out][0].tolist())} has a vertex outside 0..{self.n - 1}")
        if len(E):
            E = np.unique(E, axis=0)
        object.__setattr__(self, "edges", tuple(map(tuple, E.tolist())))

    def __eq__(self, other) -> bool:
        return isinstance(other, Hypergraph3) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Hypergraph3(n={self.n}, m={self.m})"

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def num_pairs(self) -> int:
        return n_pairs(self.n)

    @property
    def density(self) -> float:
        total = comb(self.n, 3)
        return self.m / total if total else 0.0

    @cached_property
    def edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def pair_nbhd(self) -> np.ndarray:
        """``(C(n,2), W)`` uint64 bitsets; row ``S`` is ``N(S)``."""
        W = n_words(self.n)
        out = np.zeros((self.num_pairs, W), dtype=np.uint64)
        if self.m:
            E = self.edge_array
            a, b, c = E[:, 0], E[:, 1], E[:, 2]
            for (x, y, z) in ((a, b, c), (a, c, b), (b, c, a)):
                rows = pair_indices(x, y, self.n)
                np.bitwise_or.at(out, (rows, z // WORD), np.left_shift(np.uint64(1), (z % WORD).astype(np.uint64)))
        out.setflags(write=False)
        return out

    @cached_property
    def incidence(self) -> np.ndarray:
        """Dense ``(C(n,2), n)`` 0/1 matrix of the pair-vertex incidence graph."""
        out = np.zeros((self.num_pairs, self.n), dtype=np.uint8)
        if self.m:
            E = self.edge_array
            a, b, c = E[:, 0], E[:, 1], E[:, 2]
            for (x, y, z) in ((a, b, c), (a, c, b), (b, c, a)):
                out[pair_indices(x, y, self.n), z] = 1
        out.setflags(write=False)
        return out

    @cached_property
    def pair_degrees(self) -> np.ndarray:
        """``|N(S)|`` for every pair index."""
        return self.incidence.sum(axis=1, dtype=np.int64)

    @cached_property
    def vertex_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.edge_array.ravel(), 1)
        return deg

    def has_edge(self, a: int, b: int, c: int) -> bool:
        return tuple(sorted((a, b, c))) in self.edge_set

    def _row(self, S: int) -> int:
        if not 0 <= S < self.num_pairs:
            raise H3Error("OUT_OF_RANGE", f"pair index {S} outside 0..{self.num_pairs - 1}")
        return _words_to_int(self.pair_nbhd[S])

    def neighborhood(self, S: int, Y: VertexSet | None = None) -> VertexSet:
        """``N(S) ∩ Y`` for the pair with index ``S`` (``Y`` defaults to ``V``)."""
        bits = self._row(S)
        if Y is not None:
            bits &= Y.bits
        return VertexSet(universe=self.n, bits=bits)

    def co_neighborhood(self, S1: int, S2: int, Y: VertexSet | None = None) -> VertexSet:
        """``N(S1) ∩ N(S2) ∩ Y``; with ``S1 == S2`` this is ``neighborhood(S1, Y)``."""
        bits = self._row(S1) & self._row(S2)
        if Y is not None:
            bits &= Y.bits
        return VertexSet(universe=self.n, bits=bits)

    # file IO ---------------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{a} {b} {c}" for a, b, c in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Hypergraph3":
        rows = []
        for lineno, raw in enumerate(text.split("\n"), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append((lineno, [int(tok) for tok in line.split()]))
            except ValueError:
                raise H3Error("PARSE_ERROR", f"line {lineno}: non-integer token in {raw!r}") from None
        if not rows:
            raise H3Error("PARSE_ERROR", "missing 'n m' header")
        lineno, header = rows[0]
        if len(header) != 2:
            raise H3Error("PARSE_ERROR", f"line {lineno}: header must be 'n m'")
        n, m = header
        edges = []
        for lineno, toks in rows[1:]:
            if len(toks) != 3:
                raise H3Error("PARSE_ERROR", f"line {lineno}: expected 3 vertices")
            edges.append(tuple(toks))
        if len(edges) != m:
            raise H3Error("PARSE_ERROR", f"header declares {m} edges, found {len(edges)}")
        return cls(n, edges)


def build(n: int, edges: Iterable[Sequence[int]]) -> Hypergraph3:
    return Hypergraph3(n, tuple(tuple(e) for e in edges))


def read_h3(path: str | os.PathLike) -> Hypergraph3:
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise H3Error("IO_ERROR", f"cannot read {path}: {exc.strerror}") from exc
    return Hypergraph3.loads(text)


def write_h3(G: Hypergraph3, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(G.dumps())


# ---------------------------------------------------------------------------
# counting primitives
# ---------------------------------------------------------------------------


def neighborhood(G: Hypergraph3, S: int, Y: VertexSet | None = None) -> VertexSet:
    return G.neighborhood(S, Y)


def co_neighborhood(G: Hypergraph3, S1: int, S2: int, Y: VertexSet | None = None) -> VertexSet:
    return G.co_neighborhood(S1, S2, Y)


def incidence_count(G: Hypergraph3, X: PairSet, Y: VertexSet) -> int:
    """``e(X, Y) = sum over S in X of |N(S) ∩ Y|``."""
    if not X or not Y:
        return 0
    rows = G.incidence[X.to_array()]
    return int(rows[:, Y.to_array()].sum(dtype=np.int64))


def q_density(G: Hypergraph3, A: PairSet, B: VertexSet, q: float) -> float:
    if q <= 0:
        raise H3Error("NONPOSITIVE_Q", f"q must be positive, got {q}")
    if not A or not B:
        raise H3Error("EMPTY_SIDE", "q-density needs non-empty A and B")
    return incidence_count(G, A, B) / (q * len(A) * len(B))


@dataclass(frozen=True, eq=False)
class BipartiteIncidence:
    """Pair-vertex bipartite graph: row ``S``, column ``v``, edge iff ``S | {v}`` is an edge."""

    n: int
    matrix: sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def num_edges(self) -> int:
        return int(self.matrix.nnz)

    def row_support(self, S: int) -> list[int]:
        lo, hi = self.matrix.indptr[S], self.matrix.indptr[S + 1]
        return sorted(int(v) for v in self.matrix.indices[lo:hi])

    def edge_count(self, X: PairSet, Y: VertexSet) -> int:
        if not X or not Y:
            return 0
        sub = self.matrix[X.to_array()][:, Y.to_array()]
        return int(sub.sum())


def to_bipartite(G: Hypergraph3) -> BipartiteIncidence:
    rows, cols = [], []
    if G.m:
        E = G.edge_array
        a, b, c = E[:, 0], E[:, 1], E[:, 2]
        for (x, y, z) in ((a, b, c), (a, c, b), (b, c, a)):
            rows.append(pair_indices(x, y, G.n))
            cols.append(z)
        r = np.concatenate(rows)
        c_ = np.concatenate(cols)
    else:
        r = c_ = np.zeros(0, dtype=np.int64)
    data = np.ones(len(r), dtype=np.float64)
    mat = sp.csr_matrix((data, (r, c_)), shape=(G.num_pairs, G.n))
    mat.sum_duplicates()
    mat.sort_indices()
    return BipartiteIncidence(G.n, mat)
