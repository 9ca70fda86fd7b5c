"""Seeded instance generators.

Every candidate triple gets its own uniform variate from a counter-based
generator keyed on ``(seed, stream, rank)`` where ``rank`` is the triple's
lexicographic position among all ``C(n, 3)`` triples. The output therefore does
not depend on iteration order or on how the rank range is split into chunks.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from .errors import H3Error
from .hypergraph import Hypergraph3

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# stream tags keep the variates of different generators independent
STREAM_RANDOM = 1
STREAM_SUBSAMPLE = 2

KINDS = ("RANDOM", "COMPLETE", "SUBSAMPLE", "PLANTED_DENSE", "PLANTED_STAR")


def _mix(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, stream: int, ranks: np.ndarray) -> np.ndarray:
    """Uniform variates in [0, 1), one per rank, reproducible from (seed, stream)."""
    key_int = ((seed & _MASK64) * 0x2545F4914F6CDD1D + stream * 0x9E3779B97F4A7C15) & _MASK64
    with np.errstate(over="ignore"):
        key = _mix(np.array([key_int], dtype=np.uint64))[0]
        x = key ^ (np.asarray(ranks, dtype=np.uint64) * _GOLDEN)
        x = _mix(x + _GOLDEN)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def triple_ranks(n: int, E: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each sorted triple row of ``E`` among all C(n,3) triples."""
    E = np.asarray(E, dtype=np.int64)
    if len(E) == 0:
        return np.zeros(0, dtype=np.int64)
    a, b, c = E[:, 0], E[:, 1], E[:, 2]

    def c3(x):
        return x * (x - 1) * (x - 2) // 6

    def c2(x):
        return x * (x - 1) // 2

    return comb(n, 3) - c3(n - a) + c2(n - a - 1) - c2(n - b) + (c - b - 1)


def _triples_by_first(n: int):
    """Yield ``(first_rank, triples)`` blocks, one per first vertex, in rank order."""
    offset = 0
    for a in range(n - 2):
        r = n - a - 1
        b, c = np.triu_indices(r, k=1)
        block = np.empty((len(b), 3), dtype=np.int64)
        block[:, 0] = a
        block[:, 1] = b + a + 1
        block[:, 2] = c + a + 1
        yield offset, block
        offset += len(b)


def _check_prob(name: str, p: float):
    if not 0.0 <= p <= 1.0:
        raise H3Error("BAD_PROBABILITY", f"{name}={p} outside [0, 1]")


def _threshold_sample(n: int, seed: int, prob_of) -> Hypergraph3:
    kept = []
    for offset, block in _triples_by_first(n):
        u = keyed_uniform(seed, STREAM_RANDOM, np.arange(offset, offset + len(block)))
        kept.append(block[u < prob_of(block)])
    E = np.concatenate(kept) if kept else np.zeros((0, 3), dtype=np.int64)
    return Hypergraph3(n, E)


def gen_random(n: int, p: float, seed: int) -> Hypergraph3:
    """Binomial random 3-uniform hypergraph: each triple present with probability ``p``."""
    _check_prob("p", p)
    return _threshold_sample(n, seed, lambda block: p)


def gen_complete(n: int) -> Hypergraph3:
    if n < 3:
        raise H3Error("OUT_OF_RANGE", f"complete hypergraph needs n >= 3, got {n}")
    blocks = [b for _, b in _triples_by_first(n)]
    return Hypergraph3(n, np.concatenate(blocks))


def subsample(host: Hypergraph3, keep: float, seed: int) -> Hypergraph3:
    """Spanning subhypergraph keeping each host edge independently with probability ``keep``."""
    _check_prob("keep", keep)
    if host.m == 0:
        return Hypergraph3(host.n)
    E = host.edge_array
    u = keyed_uniform(seed, STREAM_SUBSAMPLE, triple_ranks(host.n, E))
    return Hypergraph3(host.n, E[u < keep])


def gen_planted_dense(n: int, p: float, s: int, p_in: float, seed: int) -> Hypergraph3:
    """Triples inside ``{0..s-1}`` appear with probability ``p_in``, all others with ``p``."""
    _check_prob("p", p)
    _check_prob("p_in", p_in)
    if not 0 <= s <= n:
        raise H3Error("OUT_OF_RANGE", f"planted size s={s} outside 0..{n}")
    if p_in < p:
        raise H3Error("BAD_PROBABILITY", f"p_in={p_in} must be at least p={p}")
    return _threshold_sample(n, seed, lambda block: np.where(block[:, 2] < s, p_in, p))


def gen_planted_star(n: int, p: float, seed: int) -> Hypergraph3:
    """Every triple through vertex 0, plus background triples with probability ``p``."""
    _check_prob("p", p)
    return _threshold_sample(n, seed, lambda block: np.where(block[:, 0] == 0, 1.0, p))


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    p: float = 0.0
    seed: int = 0
    s: int = 0
    p_in: float = 0.0
    keep: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise H3Error("CONFIG_INVALID", f"unknown generator kind {self.kind!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def generate(spec: GenSpec, host: Hypergraph3 | None = None) -> Hypergraph3:
    if spec.kind == "RANDOM":
        return gen_random(spec.n, spec.p, spec.seed)
    if spec.kind == "COMPLETE":
        return gen_complete(spec.n)
    if spec.kind == "PLANTED_DENSE":
        return gen_planted_dense(spec.n, spec.p, spec.s, spec.p_in, spec.seed)
    if spec.kind == "PLANTED_STAR":
        return gen_planted_star(spec.n, spec.p, spec.seed)
    # SUBSAMPLE: of the given host, or of a random host with density p
    if host is None:
        host = gen_random(spec.n, spec.p, spec.seed)
    return subsample(host, spec.keep, spec.seed)


def sidecar(spec: GenSpec, G: Hypergraph3) -> str:
    record = spec.to_dict()
    record["m"] = G.m
    return json.dumps(record, sort_keys=False) + "\n"
