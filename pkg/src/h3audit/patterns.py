"""Small pattern hypergraphs: classification and labelled embedding counts."""
from __future__ import annotations

import json
import threading
from importlib import resources
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from math import perm
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import H3Error
from .hypergraph import Hypergraph3, n_words, read_h3

MAX_PATTERN_VERTICES = 16
MAX_AUT_VERTICES = 10
ORACLE_MAX_N = 12
ORACLE_MAX_K = 6
_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class PatternStats:
    is_linear: bool
    connector_edges: tuple[tuple[int, int, int], ...] | None
    d_H: int
    D_H: int
    max_degree: int
    aut_count: int | None

    @property
    def connector_free(self) -> bool | None:
        if self.connector_edges is None:
            return None
        return not self.connector_edges


@dataclass(frozen=True, eq=False)
class PatternH:
    """A fixed small 3-uniform hypergraph on ``k`` vertices (``k <= 16``)."""

    k: int
    edges: tuple[tuple[int, int, int], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.k > MAX_PATTERN_VERTICES:
            raise H3Error("PATTERN_TOO_LARGE", f"patterns are limited to {MAX_PATTERN_VERTICES} vertices, got {self.k}")
        hg = Hypergraph3(self.k, self.edges)
        object.__setattr__(self, "edges", hg.edges)
        object.__setattr__(self, "_lock", threading.Lock())

    @classmethod
    def from_hypergraph(cls, H: Hypergraph3, name: str = "") -> "PatternH":
        return cls(H.n, H.edges, name)

    def as_hypergraph(self) -> Hypergraph3:
        return Hypergraph3(self.k, self.edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.k
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return deg

    @property
    def stats(self) -> PatternStats:
        # computed once per pattern even under concurrent access
        with self._lock:
            if "_stats" not in self.__dict__:
                linear = is_linear(self)
                d = degeneracy_dH(self)
                delta = max(self.degrees(), default=0)
                object.__setattr__(self, "_stats", PatternStats(
                    is_linear=linear,
                    connector_edges=tuple(connector_edges(self)) if linear else None,
                    d_H=d,
                    D_H=min(3 * d, delta),
                    max_degree=delta,
                    aut_count=automorphism_count(self) if self.k <= MAX_AUT_VERTICES else None,
                ))
            return self.__dict__["_stats"]


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def is_linear(H: PatternH) -> bool:
    """True iff every two edges share at most one vertex."""
    return all(len(set(e) & set(f)) <= 1 for e, f in combinations(H.edges, 2))


def _connectors(edges: Sequence[Sequence[int]], vertices: Iterable[int], ell: int) -> list[tuple]:
    """Edges e with an outside vertex v lying on ``ell`` edges that each meet e in one vertex."""
    out = []
    verts = list(vertices)
    for e in edges:
        es = set(e)
        for v in verts:
            if v in es:
                continue
            touching = [f for f in edges if v in f and len(es & set(f)) == 1]
            if len(touching) >= ell:
                out.append(tuple(e))
                break
    return out


def connector_edges(H: PatternH) -> list[tuple[int, int, int]]:
    if not is_linear(H):
        raise H3Error("NOT_LINEAR", "connectors are only defined for linear hypergraphs")
    return _connectors(H.edges, range(H.k), 3)


def degeneracy_dH(H: PatternH) -> int:
    """Largest minimum degree over all subhypergraphs, by min-degree peeling."""
    alive = set(range(H.k))
    edges = [set(e) for e in H.edges]
    best = 0
    while alive:
        deg = {v: 0 for v in alive}
        for e in edges:
            for v in e:
                deg[v] += 1
        v = min(alive, key=lambda x: (deg[x], x))
        best = max(best, deg[v])
        alive.discard(v)
        edges = [e for e in edges if v not in e]
    return best


def big_DH(H: PatternH) -> int:
    return min(3 * degeneracy_dH(H), max(H.degrees(), default=0))


def classify(H: PatternH) -> dict:
    s = H.stats
    return {
        "k": H.k,
        "m": H.m,
        "linear": s.is_linear,
        "connectors": [list(e) for e in s.connector_edges] if s.connector_edges is not None else None,
        "d_H": s.d_H,
        "D_H": s.D_H,
        "max_degree": s.max_degree,
        "aut": s.aut_count,
    }


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingCount:
    count: int
    expected: float
    relative_error: float

    @classmethod
    def make(cls, count: int, n: int, H: PatternH, q: float) -> "EmbeddingCount":
        expected = float(n) ** H.k * float(q) ** H.m
        rel = (count - expected) / expected if expected > 0 else float("nan")
        return cls(int(count), expected, rel)


@dataclass(frozen=True)
class CountingPlan:
    """Static variable order for :func:`count_embeddings`.

    ``levels`` lists pattern vertices in enumeration order; ``closing[i]``
    holds, for each pattern edge completed at level ``i``, the level indices
    of its two other vertices. The last (at most two) pendant edges are left
    to the closed-form tail: ``tail`` holds the level index of each pendant's
    attachment vertex.
    """

    levels: tuple[int, ...]
    closing: tuple[tuple[tuple[int, int], ...], ...]
    tail: tuple[int, ...]
    isolated: int

    @property
    def tail_vertices(self) -> int:
        return 2 * len(self.tail)


def make_plan(H: PatternH) -> CountingPlan:
    deg = H.degrees()
    active = [v for v in range(H.k) if deg[v] > 0]
    isolated = H.k - len(active)
    # pendant: two endpoints of degree 1, attached through a vertex of degree >= 2
    pendants = []
    for e in H.edges:
        ones = [v for v in e if deg[v] == 1]
        if len(ones) == 2:
            attach = next(v for v in e if deg[v] >= 2)
            pendants.append((attach, ones[0], ones[1]))
    pendant_leaves = {x for _, a, b in pendants for x in (a, b)}
    pendant_edges = {tuple(sorted(p)) for p in pendants}
    core = [v for v in active if v not in pendant_leaves]
    core_edges = [e for e in H.edges if e not in pendant_edges]

    # greedy order: close as many edges as early as possible, stay connected
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(core)
    while remaining:
        def score(v):
            closes = sum(1 for e in core_edges if v in e and all(u in placed for u in e if u != v))
            touches = sum(1 for e in core_edges if v in e and any(u in placed for u in e))
            cdeg = sum(1 for e in core_edges if v in e)
            return (closes, touches, cdeg, -v)
        v = max(remaining, key=score)
        order.append(v)
        placed.add(v)
        remaining.discard(v)

    tail = pendants[-2:] if len(pendants) >= 1 else []
    enumerated = pendants[: len(pendants) - len(tail)]
    for attach, x, y in enumerated:
        order.extend([x, y])
    pos = {v: i for i, v in enumerate(order)}
    closing = []
    for v in order:
        here = []
        for e in H.edges:
            if v in e and all(u in pos and pos[u] < pos[v] for u in e if u != v):
                a, b = (pos[u] for u in e if u != v)
                here.append((a, b))
        closing.append(tuple(here))
    return CountingPlan(tuple(order), tuple(closing), tuple(pos[a] for a, _, _ in tail), isolated)


def _falling(n: int, k: int) -> int:
    return perm(n, k) if 0 <= k <= n else 0


def count_embeddings(G: Hypergraph3, H: PatternH, q: float | None = None, threads: int = 1) -> EmbeddingCount:
    """Exact number of injective maps V(H) -> V(G) sending every edge of H to an edge of G."""
    if H.k > G.n:
        raise H3Error("PATTERN_TOO_LARGE", f"pattern has {H.k} vertices, host only {G.n}")
    if q is None:
        q = G.density
    if perm(G.n, H.k) > _INT64_MAX:
        raise H3Error("PATTERN_TOO_LARGE", "embedding count could overflow 64-bit accumulators")
    plan = make_plan(H)
    n = G.n
    active = H.k - plan.isolated
    if active == 0:
        return EmbeddingCount.make(_falling(n, H.k), n, H, q)
    if G.m == 0:
        return EmbeddingCount.make(0, n, H, q)

    nlev = len(plan.levels)
    close_ptr = np.zeros(nlev + 1, dtype=np.int64)
    ca, cb = [], []
    for i, cl in enumerate(plan.closing):
        close_ptr[i + 1] = close_ptr[i] + len(cl)
        for a, b in cl:
            ca.append(a)
            cb.append(b)
    close_a = np.asarray(ca, dtype=np.int64)
    close_b = np.asarray(cb, dtype=np.int64)
    t = len(plan.tail)
    a0 = plan.tail[0] if t else 0
    a1 = plan.tail[1] if t == 2 else a0
    nbhd = G.pair_nbhd
    W = n_words(n)

    def run(lo, hi):
        return int(_kernels.count_injective(nbhd, n, W, nlev, close_ptr, close_a, close_b, t, a0, a1, lo, hi))

    threads = max(1, int(threads))
    if threads == 1:
        core_count = run(0, n)
    else:
        bounds = np.linspace(0, n, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            core_count = sum(pool.map(run, bounds[:-1], bounds[1:]))
    total = core_count * _falling(n - active, plan.isolated)
    return EmbeddingCount.make(total, n, H, q)


def count_embeddings_oracle(G: Hypergraph3, H: PatternH, q: float | None = None) -> EmbeddingCount:
    """Reference count: enumerate every injection and test every pattern edge."""
    if G.n > ORACLE_MAX_N or H.k > ORACLE_MAX_K:
        raise H3Error("ORACLE_TOO_LARGE", f"oracle limited to n <= {ORACLE_MAX_N}, k <= {ORACLE_MAX_K}")
    if H.k > G.n:
        raise H3Error("PATTERN_TOO_LARGE", f"pattern has {H.k} vertices, host only {G.n}")
    if q is None:
        q = G.density
    n = G.n
    A = np.zeros((n, n, n), dtype=bool)
    for a, b, c in G.edges:
        for x, y, z in permutations((a, b, c)):
            A[x, y, z] = True
    maps = np.array(list(permutations(range(n), H.k)), dtype=np.int64).reshape(-1, H.k)
    ok = np.ones(len(maps), dtype=bool)
    for a, b, c in H.edges:
        ok &= A[maps[:, a], maps[:, b], maps[:, c]]
    return EmbeddingCount.make(int(ok.sum()), n, H, q)


def automorphism_count(H: PatternH) -> int:
    """Number of edge-preserving bijections of V(H) (their inverses preserve edges too)."""
    if H.k > MAX_AUT_VERTICES:
        raise H3Error("PATTERN_TOO_LARGE", f"automorphisms limited to k <= {MAX_AUT_VERTICES}")
    if H.k == 0:
        return 1
    return count_embeddings(H.as_hypergraph(), H, q=1.0).count


# ---------------------------------------------------------------------------
# named patterns
# ---------------------------------------------------------------------------


def loose_path(length: int) -> PatternH:
    """Loose path with ``length`` edges; consecutive edges share one vertex."""
    edges = [(2 * i, 2 * i + 1, 2 * i + 2) for i in range(length)]
    return PatternH(2 * length + 1, tuple(edges), f"loose_path_{length}")


def loose_cycle(length: int) -> PatternH:
    k = 2 * length
    edges = [(2 * i, 2 * i + 1, (2 * i + 2) % k) for i in range(length)]
    return PatternH(k, tuple(edges), f"loose_cycle_{length}")


def load_pattern(path) -> PatternH:
    return PatternH.from_hypergraph(read_h3(path), name=Path(path).stem)


def corpus_dir() -> Path:
    """Directory of the shipped pattern corpus."""
    return Path(str(resources.files("h3audit") / "data" / "patterns"))


def corpus_patterns() -> dict[str, PatternH]:
    return {p.stem: load_pattern(p) for p in sorted(corpus_dir().glob("*.h3"))}


def corpus_truth() -> dict:
    """Ground-truth classification of the corpus, derived by exhaustive checks."""
    return json.loads((resources.files("h3audit") / "data" / "pattern_truth.json").read_text())
