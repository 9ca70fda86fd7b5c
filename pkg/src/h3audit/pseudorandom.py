"""Checkers for Q', DISC, PAIR, TUPLE, BDD and two-sided jumbledness estimates.

Every checker returns a :class:`PropertyReport`. ``VERIFIED_EXACT`` is only
ever produced by an exhaustive (or provably extremal) evaluation; a search
that fails to find a violation reports ``NO_VIOLATION_FOUND``. A ``VIOLATED``
report always carries a witness that can be recounted from scratch.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, sqrt
from typing import Any

import numpy as np

from . import _exact, _kernels
from .errors import H3Error
from .hypergraph import Hypergraph3, PairSet, VertexSet, incidence_count, n_words, pair_table, to_bipartite

EXACT = "EXACT"
SEARCH = "SEARCH"
SPECTRAL = "SPECTRAL"
MODES = (EXACT, SEARCH, SPECTRAL)

VERIFIED_EXACT = "VERIFIED_EXACT"
NO_VIOLATION_FOUND = "NO_VIOLATION_FOUND"
VIOLATED = "VIOLATED"

QPRIME_EXACT_MAX_N = 6
DISC_EXACT_MAX_Y = 20
BDD_DEFAULT_BUDGET = 10**8


def _mode(mode: str | None, default: str) -> str:
    m = (mode or default).upper()
    if m not in MODES:
        raise H3Error("CONFIG_INVALID", f"unknown mode {mode!r}")
    return m


def _jsonable(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class PropertyParams:
    q: Any = None
    p: Any = None
    eta: Any = 0.5
    delta: Any = 0.1
    eps: Any = 0.1
    C: Any = 2.0
    k: int = 2
    alpha: Any = None

    def __post_init__(self):
        if self.q is not None and self.q <= 0:
            raise H3Error("NONPOSITIVE_Q", f"q must be positive, got {self.q}")
        for name in ("q", "p"):
            v = getattr(self, name)
            if v is not None and v > 1:
                raise H3Error("CONFIG_INVALID", f"{name}={v} must lie in (0, 1]")
        if self.p is not None and self.p < 0:
            raise H3Error("CONFIG_INVALID", f"p={self.p} is negative")
        if not 0 < self.eta <= 1:
            raise H3Error("CONFIG_INVALID", f"eta={self.eta} must lie in (0, 1]")
        if self.delta < 0 or self.eps < 0:
            raise H3Error("CONFIG_INVALID", "delta and eps must be non-negative")
        if self.C <= 1:
            raise H3Error("CONFIG_INVALID", f"C={self.C} must exceed 1")
        if self.k < 1:
            raise H3Error("CONFIG_INVALID", f"k={self.k} must be at least 1")
        if self.q is not None and self.p is not None and self.q > self.p:
            raise H3Error("CONFIG_INVALID", f"q={self.q} exceeds p={self.p}")
        if self.alpha is not None:
            if not 0 < self.alpha <= 1:
                raise H3Error("CONFIG_INVALID", f"alpha={self.alpha} must lie in (0, 1]")
            if self.p is not None and self.q is not None and _exact.num(self.alpha) * _exact.num(self.p) > _exact.num(self.q):
                raise H3Error("CONFIG_INVALID", f"alpha*p exceeds q (alpha={self.alpha}, p={self.p}, q={self.q})")

    def need(self, *names):
        for n in names:
            if getattr(self, n) is None:
                raise H3Error("CONFIG_INVALID", f"parameter {n} is required")

    def to_dict(self) -> dict:
        return {k: _jsonable(getattr(self, k)) for k in ("q", "p", "eta", "delta", "eps", "C", "k", "alpha")}


@dataclass
class Witness:
    X: list
    Y: list
    value: Any
    bound: Any

    def to_dict(self) -> dict:
        return {"X": _jsonable(self.X), "Y": _jsonable(self.Y), "value": _jsonable(self.value), "bound": _jsonable(self.bound)}


@dataclass
class PropertyReport:
    property: str
    mode: str
    params: dict
    status: str
    witness: Witness | None = None
    margins: dict = field(default_factory=dict)
    work: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == VIOLATED and self.witness is None:
            raise H3Error("INTERNAL", "a violation must carry a witness")
        if self.status == VERIFIED_EXACT and self.mode != EXACT:
            raise H3Error("INTERNAL", "VERIFIED_EXACT requires EXACT mode")

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED

    @property
    def passed(self) -> bool:
        return self.status != VIOLATED

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "mode": self.mode,
            "params": self.params,
            "status": self.status,
            "witness": self.witness.to_dict() if self.witness else None,
            "margins": _jsonable(self.margins),
            "work": _jsonable(self.work),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _pairs_list(n: int, idx) -> list[list[int]]:
    table = pair_table(n)
    return [[int(table[i, 0]), int(table[i, 1])] for i in sorted(int(j) for j in idx)]


def _codegree_blocks(A: np.ndarray, block: int = 1024):
    """Yield ``(row0, C)`` with ``C = A[row0:row0+b] @ A.T`` as int64 (exact)."""
    Af = np.ascontiguousarray(A, dtype=np.float32)
    for i in range(0, Af.shape[0], block):
        yield i, np.rint(Af[i:i + block] @ Af.T).astype(np.int64)


def _map_codegree_blocks(A: np.ndarray, fn, threads: int = 1, block: int = 1024) -> list:
    """``[fn(row0, C) ...]`` over the codegree blocks, in block order.

    Block boundaries do not depend on ``threads``, so any reduction over the
    returned list is identical for every worker count.
    """
    Af = np.ascontiguousarray(A, dtype=np.float32)
    starts = range(0, Af.shape[0], block)

    def one(i):
        return fn(i, np.rint(Af[i:i + block] @ Af.T).astype(np.int64))

    if threads <= 1 or len(starts) <= 1:
        return [one(i) for i in starts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, starts))


# ---------------------------------------------------------------------------
# Q'
# ---------------------------------------------------------------------------


def _qprime_violation(e: int, x: int, y: int, q, delta):
    """``(side, bound)`` if ``e`` breaks (1±δ)q x y, else ``None``."""
    base = q * x * y
    hi = (1 + delta) * base
    lo = (1 - delta) * base
    if not _exact.le(e, hi):
        return "upper", hi
    if not _exact.le(lo, e):
        return "lower", lo
    return None


def check_qprime(G: Hypergraph3, params: PropertyParams, mode: str | None = None,
                 restarts: int = 8, seed: int = 0) -> PropertyReport:
    """Two-sided density control for every |X| >= ηC(n,2), |Y| >= ηn."""
    params.need("q")
    mode = _mode(mode, SEARCH)
    n, P = G.n, G.num_pairs
    q, delta, eta = _exact.num(params.q), _exact.num(params.delta), _exact.num(params.eta)
    tX = max(1, ceil(eta * P))
    tY = max(1, ceil(eta * n))
    A = G.incidence.astype(np.int64)
    work = {"subsets": 0, "restarts": 0, "iterations": 0}
    worst = 0.0
    found = None  # (reldev, X idx, Y idx, e, bound)

    def consider(Xi, Yi, e):
        nonlocal worst, found
        x, y = len(Xi), len(Yi)
        rel = abs(e / (float(q) * x * y) - 1.0)
        worst = max(worst, rel)
        v = _qprime_violation(int(e), x, y, q, delta)
        if v is not None and (found is None or rel > found[0]):
            found = (rel, np.sort(Xi), np.sort(Yi), int(e), v[1])

    if mode == EXACT:
        if n > QPRIME_EXACT_MAX_N:
            raise H3Error("MODE_TOO_LARGE", f"exact Q' limited to n <= {QPRIME_EXACT_MAX_N}, got n={n}")
        verts = np.arange(n)
        for ybits in range(1 << n):
            Yi = verts[[(ybits >> v) & 1 == 1 for v in range(n)]]
            if len(Yi) < tY:
                continue
            c = A[:, Yi].sum(axis=1)
            # for fixed |X| the extremes are the top / bottom |X| pairs
            desc = np.argsort(-c, kind="stable")
            asc = np.argsort(c, kind="stable")
            cd, ca = np.cumsum(c[desc]), np.cumsum(c[asc])
            for x in range(tX, P + 1):
                work["subsets"] += 2
                consider(desc[:x], Yi, cd[x - 1])
                consider(asc[:x], Yi, ca[x - 1])
    elif mode == SEARCH:
        vdeg = A.sum(axis=0)
        probes = []
        for mult in (1, 2, 4):
            pr = (min(P, mult * tX), min(n, mult * tY))
            if pr not in probes:
                probes.append(pr)
        for pi, (x, y) in enumerate(probes):
            for si, side in enumerate(("upper", "lower")):
                sign = -1 if side == "upper" else 1
                for r in range(restarts):
                    work["restarts"] += 1
                    if r == 0:
                        Yi = np.argsort(sign * vdeg, kind="stable")[:y]
                    else:
                        rng = np.random.default_rng([seed, pi, si, r])
                        Yi = rng.choice(n, size=y, replace=False)
                    best_e = None
                    while True:
                        work["iterations"] += 1
                        c = A[:, Yi].sum(axis=1)
                        Xi = np.argsort(sign * c, kind="stable")[:x]
                        col = A[Xi].sum(axis=0)
                        Yi = np.argsort(sign * col, kind="stable")[:y]
                        e = int(col[Yi].sum())
                        work["subsets"] += 1
                        if best_e is not None and (e <= best_e if side == "upper" else e >= best_e):
                            break
                        best_e = e
                        consider(Xi, Yi, e)
    else:
        raise H3Error("CONFIG_INVALID", "Q' supports EXACT or SEARCH mode")

    margins = {"worst_relative_deviation": worst, "slack": float(delta) - worst, "threshold_X": tX, "threshold_Y": tY}
    if found is not None:
        _, Xi, Yi, e, bound = found
        w = Witness(_pairs_list(n, Xi), [int(v) for v in Yi], e, bound)
        return PropertyReport("QPRIME", mode, params.to_dict(), VIOLATED, w, margins, work)
    status = VERIFIED_EXACT if mode == EXACT else NO_VIOLATION_FOUND
    return PropertyReport("QPRIME", mode, params.to_dict(), status, None, margins, work)


# ---------------------------------------------------------------------------
# DISC
# ---------------------------------------------------------------------------


def disc_value(G: Hypergraph3, Xp: PairSet, Yp: VertexSet, q) -> Fraction | float:
    """``|e(X', Y') - q|X'||Y'||`` recounted directly."""
    q = _exact.num(q)
    return abs(incidence_count(G, Xp, Yp) - q * len(Xp) * len(Yp))


def check_disc(G: Hypergraph3, X: VertexSet, Y: VertexSet, params: PropertyParams,
               mode: str | None = None, restarts: int = 8, seed: int = 0) -> PropertyReport:
    """Discrepancy of ``(X, Y)`` over all ``X' ⊆ (X choose 2)``, ``Y' ⊆ Y``.

    For a fixed ``Y'`` the extremal ``X'`` is explicit (all pairs whose count
    exceeds, resp. falls short of, ``q|Y'|``), so only ``Y'`` is enumerated
    or searched.
    """
    params.need("q", "p")
    mode = _mode(mode, SEARCH)
    n = G.n
    q, p, eps = _exact.num(params.q), _exact.num(params.p), _exact.num(params.eps)
    pairs = PairSet.within(X).to_array()
    ycols = Y.to_array()
    y = len(ycols)
    bound = eps * p * comb(len(X), 2) * y
    A = G.incidence[np.ix_(pairs, ycols)].astype(np.int64) if len(pairs) and y else np.zeros((len(pairs), y), np.int64)
    work = {"subsets": 0, "restarts": 0, "iterations": 0}
    best = (-1.0, None, None)  # (float value, ymask, side)

    def take(counts, masks):
        nonlocal best
        sizes = masks.sum(axis=0)
        up, down = _exact.positive_part_sums(counts, [q * int(s) for s in sizes])
        for j in range(masks.shape[1]):
            for side, val in (("upper", up[j]), ("lower", down[j])):
                if float(val) > best[0]:
                    best = (float(val), masks[:, j].copy(), side)

    if mode == EXACT:
        if y > DISC_EXACT_MAX_Y:
            raise H3Error("MODE_TOO_LARGE", f"exact DISC limited to |Y| <= {DISC_EXACT_MAX_Y}, got {y}")
        total = 1 << y
        bits = np.arange(y)
        for lo in range(0, total, 4096):
            ids = np.arange(lo, min(total, lo + 4096))
            masks = ((ids[None, :] >> bits[:, None]) & 1).astype(np.int64)
            take(A @ masks if len(pairs) else np.zeros((0, len(ids)), np.int64), masks)
            work["subsets"] += len(ids)
    elif mode == SEARCH:
        qf = float(q)

        def objective(counts, size):
            d = counts - qf * size
            return max(np.clip(d, 0, None).sum(), np.clip(-d, 0, None).sum())

        Aq = A - qf
        colq = Aq.sum(axis=0)
        for r in range(max(1, restarts)):
            work["restarts"] += 1
            rng = np.random.default_rng([seed, r])
            if r == 0:
                mask = np.ones(y, dtype=np.int64)
            else:
                mask = (rng.random(y) < rng.uniform(0.2, 0.8)).astype(np.int64)
            counts = A @ mask
            cur = objective(counts, mask.sum())
            while y:
                work["iterations"] += 1
                # value of every single-vertex flip; the negative part follows
                # from the positive part and the column total
                sign = 1 - 2 * mask
                d0 = counts - qf * mask.sum()
                D = d0[:, None] + (Aq * sign[None, :])
                up = np.maximum(D, 0.0).sum(axis=0)
                down = up - (d0.sum() + sign * colq)
                vals = np.maximum(up, down)
                work["subsets"] += y
                j = int(np.argmax(vals))
                if vals[j] <= cur + 1e-9:
                    break
                mask[j] ^= 1
                counts = counts + sign[j] * A[:, j]
                cur = vals[j]
            take(counts[:, None], mask[:, None])
    else:
        raise H3Error("CONFIG_INVALID", "DISC supports EXACT or SEARCH mode")

    margins = {"bound": bound, "best_value": best[0] if best[0] >= 0 else 0.0}
    if best[1] is not None:
        ymask, side = best[1], best[2]
        Yp = ycols[ymask.astype(bool)]
        level = q * len(Yp)
        c = A[:, ymask.astype(bool)].sum(axis=1) if len(pairs) else np.zeros(0, np.int64)
        sel = np.array([_exact.lt(level, int(v)) if side == "upper" else _exact.lt(int(v), level) for v in c], dtype=bool)
        Xp = PairSet.of(n, pairs[sel]) if len(pairs) else PairSet.of(n)
        Ypset = VertexSet.of(n, Yp)
        value = disc_value(G, Xp, Ypset, q)
        margins["best_value"] = value
        margins["slack"] = bound - value if _exact.is_exact(bound, value) else float(bound) - float(value)
        if not _exact.le(value, bound):
            w = Witness(Xp.pairs(), Ypset.to_list(), value, bound)
            return PropertyReport("DISC", mode, params.to_dict(), VIOLATED, w, margins, work)
    status = VERIFIED_EXACT if mode == EXACT else NO_VIOLATION_FOUND
    return PropertyReport("DISC", mode, params.to_dict(), status, None, margins, work)


# ---------------------------------------------------------------------------
# PAIR
# ---------------------------------------------------------------------------


def pair_sums(G: Hypergraph3, X: VertexSet, Y: VertexSet, q, threads: int = 1) -> dict:
    """Degree and ordered codegree deviation sums over pairs inside ``X``.

    ``double`` ranges over ordered ``(S1, S2)`` including ``S1 == S2``;
    ``diagonal`` is the ``S1 == S2`` part of it.
    """
    q = _exact.num(q)
    pairs = PairSet.within(X).to_array()
    ycols = Y.to_array()
    y = len(ycols)
    if len(pairs) == 0:
        return {"single": Fraction(0), "double": Fraction(0), "diagonal": Fraction(0), "num_pairs": 0}
    A = G.incidence[np.ix_(pairs, ycols)]
    deg = A.sum(axis=1, dtype=np.int64)
    single = _exact.sum_abs_dev(deg, q * y)
    diagonal = _exact.sum_abs_dev(deg, q * q * y)
    parts = _map_codegree_blocks(A, lambda _, C: _exact.sum_abs_dev(C.ravel(), q * q * y), threads)
    double = 0
    for part in parts:
        double = double + part
    return {"single": single, "double": double, "diagonal": diagonal, "num_pairs": len(pairs)}


def check_pair(G: Hypergraph3, X: VertexSet, Y: VertexSet, params: PropertyParams, threads: int = 1) -> PropertyReport:
    params.need("q", "p")
    q, p, delta = _exact.num(params.q), _exact.num(params.p), _exact.num(params.delta)
    s = pair_sums(G, X, Y, q, threads)
    P = comb(len(X), 2)
    y = len(Y)
    bound1 = delta * p * P * y
    bound2 = delta * p * p * P * P * y
    ok1 = _exact.le(s["single"], bound1)
    ok2 = _exact.le(s["double"], bound2)
    margins = {
        "single_sum": s["single"], "single_bound": bound1,
        "double_sum": s["double"], "double_bound": bound2,
        "diagonal_sum": s["diagonal"],
        "single_ratio": float(s["single"]) / float(bound1) if bound1 else float("inf"),
        "double_ratio": float(s["double"]) / float(bound2) if bound2 else float("inf"),
    }
    work = {"pairs": s["num_pairs"], "pair_pairs": s["num_pairs"] ** 2}
    if ok1 and ok2:
        return PropertyReport("PAIR", EXACT, params.to_dict(), VERIFIED_EXACT, None, margins, work)
    value, bound = (s["single"], bound1) if not ok1 else (s["double"], bound2)
    w = Witness(X.to_list(), Y.to_list(), value, bound)
    return PropertyReport("PAIR", EXACT, params.to_dict(), VIOLATED, w, margins, work)


# ---------------------------------------------------------------------------
# TUPLE
# ---------------------------------------------------------------------------


def tuple_exceptions(G: Hypergraph3, delta, q, threads: int = 1) -> dict:
    """Exceptional pair counts for the degree and codegree conditions."""
    if q is None or q <= 0:
        raise H3Error("NONPOSITIVE_Q", f"q must be positive, got {q}")
    delta, q = _exact.num(delta), _exact.num(q)
    n = G.n
    deg = G.pair_degrees
    P = len(deg)
    ok_deg = _exact.count_within(deg, n * q, delta * n * q)
    exc_deg = P - ok_deg

    def ok_in_block(i0, C):
        upper = np.arange(P)[None, :] > np.arange(i0, i0 + C.shape[0])[:, None]
        return _exact.count_within(C[upper], n * q * q, delta * n * q * q)

    ok_co = sum(_map_codegree_blocks(G.incidence, ok_in_block, threads))
    total_co = comb(P, 2)
    return {
        "degree_exceptions": int(exc_deg),
        "codegree_exceptions": int(total_co - ok_co),
        "num_pairs": P,
        "num_pair_pairs": total_co,
    }


def check_tuple(G: Hypergraph3, delta, q, threads: int = 1) -> PropertyReport:
    t = tuple_exceptions(G, delta, q, threads)
    dn, qn = _exact.num(delta), _exact.num(q)
    budget1 = dn * t["num_pairs"]
    budget2 = dn * t["num_pair_pairs"]
    ok1 = _exact.le(t["degree_exceptions"], budget1)
    ok2 = _exact.le(t["codegree_exceptions"], budget2)
    P, PP = t["num_pairs"], t["num_pair_pairs"]
    margins = {
        "degree_exceptions": t["degree_exceptions"], "degree_budget": budget1,
        "degree_fraction": t["degree_exceptions"] / P if P else 0.0,
        "codegree_exceptions": t["codegree_exceptions"], "codegree_budget": budget2,
        "codegree_fraction": t["codegree_exceptions"] / PP if PP else 0.0,
    }
    params = {"delta": _jsonable(dn), "q": _jsonable(qn)}
    work = {"pairs": P, "pair_pairs": PP}
    if ok1 and ok2:
        return PropertyReport("TUPLE", EXACT, params, VERIFIED_EXACT, None, margins, work)
    if not ok1:
        bad = np.flatnonzero(np.abs(G.pair_degrees - float(G.n * qn)) >= float(dn * G.n * qn) - _exact.SLACK)
        w = Witness(_pairs_list(G.n, bad[:10]), [], t["degree_exceptions"], budget1)
    else:
        w = Witness(_first_bad_codegree(G, float(G.n * qn * qn), float(dn * G.n * qn * qn)), [],
                    t["codegree_exceptions"], budget2)
    return PropertyReport("TUPLE", EXACT, params, VIOLATED, w, margins, work)


def _first_bad_codegree(G: Hypergraph3, center: float, radius: float) -> list:
    """Lexicographically first pair of pairs whose codegree is exceptional."""
    P = G.num_pairs
    for i0, block in _codegree_blocks(G.incidence, block=256):
        rows = np.arange(i0, i0 + block.shape[0])
        bad = (np.abs(block - center) >= radius - _exact.SLACK) & (np.arange(P)[None, :] > rows[:, None])
        hit = np.argwhere(bad)
        if len(hit):
            a, b = hit[0]
            return _pairs_list(G.n, [i0 + a, b])
    return []


# ---------------------------------------------------------------------------
# BDD
# ---------------------------------------------------------------------------


def max_joint_codegree_exact(G: Hypergraph3, r: int) -> tuple[int, list[int]]:
    """Exact maximum of ``|N(S_1) ∩ ... ∩ N(S_r)|`` over r distinct pairs, with witness."""
    P = G.num_pairs
    if r > P:
        return 0, []
    nb = G.pair_nbhd
    best, wit = _kernels.max_joint_codegree(nb, n_words(G.n), r, 0, P, -1)
    return int(best), [int(i) for i in wit]


def max_joint_codegree_greedy(G: Hypergraph3, k: int, restarts: int = 16, seed: int = 0) -> dict[int, tuple[int, list[int]]]:
    """Greedy lower bounds for every depth ``r <= k``.

    Each restart starts from one pair and repeatedly adds the pair that keeps
    the running common neighbourhood largest.
    """
    A = G.incidence.astype(np.float32)
    P = A.shape[0]
    deg = G.pair_degrees
    starts = list(np.argsort(-deg, kind="stable")[:max(1, restarts // 2)])
    rng = np.random.default_rng(seed)
    starts += list(rng.choice(P, size=min(P, max(0, restarts - len(starts))), replace=False))
    best: dict[int, tuple[int, list[int]]] = {}
    for s0 in starts:
        chosen = [int(s0)]
        running = A[s0] > 0
        val = int(running.sum())
        if val > best.get(1, (-1,))[0]:
            best[1] = (val, list(chosen))
        for r in range(2, k + 1):
            scores = A @ running.astype(np.float32)
            scores[chosen] = -1
            nxt = int(np.argmax(scores))
            if scores[nxt] < 0:
                break
            chosen.append(nxt)
            running = running & (A[nxt] > 0)
            val = int(running.sum())
            if val > best.get(r, (-1,))[0]:
                best[r] = (val, sorted(chosen))
    return best


def check_bdd(G: Hypergraph3, params: PropertyParams, mode: str | None = None,
              budget: int = BDD_DEFAULT_BUDGET, restarts: int = 16, seed: int = 0) -> PropertyReport:
    """Bounded joint codegrees: ``|N(S_1) ∩ ... ∩ N(S_r)| <= C n q^r`` for r <= k."""
    params.need("q")
    q, C = _exact.num(params.q), _exact.num(params.C)
    n, P, k = G.n, G.num_pairs, params.k
    per_r = {}
    first_bad = None
    all_exact = True
    greedy = None
    for r in range(1, k + 1):
        bound = C * n * q**r
        if r > P:
            per_r[r] = {"mode": EXACT, "value": 0, "bound": bound, "status": VERIFIED_EXACT, "pairs": []}
            continue
        if r <= 2 or comb(P, r) <= budget:
            val, wit = max_joint_codegree_exact(G, r)
            rmode = EXACT
        else:
            if greedy is None:
                greedy = max_joint_codegree_greedy(G, k, restarts, seed)
            val, wit = greedy.get(r, (0, []))
            rmode = SEARCH
            all_exact = False
        ok = _exact.le(val, bound)
        status = (VERIFIED_EXACT if rmode == EXACT else NO_VIOLATION_FOUND) if ok else VIOLATED
        per_r[r] = {"mode": rmode, "value": val, "bound": bound, "status": status, "pairs": _pairs_list(n, wit)}
        if not ok and first_bad is None:
            first_bad = r
    mode = EXACT if all_exact else SEARCH
    margins = {"per_r": {str(r): v for r, v in per_r.items()}}
    work = {"budget": budget, "restarts": restarts}
    if first_bad is not None:
        d = per_r[first_bad]
        common = VertexSet.full(n)
        for S in d["pairs"]:
            common = common & G.neighborhood(PairSet.from_pairs(n, [S]).to_list()[0])
        w = Witness(d["pairs"], common.to_list(), d["value"], d["bound"])
        return PropertyReport("BDD", mode, params.to_dict(), VIOLATED, w, margins, work)
    status = VERIFIED_EXACT if mode == EXACT else NO_VIOLATION_FOUND
    return PropertyReport("BDD", mode, params.to_dict(), status, None, margins, work)


# ---------------------------------------------------------------------------
# jumbledness
# ---------------------------------------------------------------------------


@dataclass
class JumbledEstimate:
    p: float
    beta_lower: float | None = None
    witness_X: list = field(default_factory=list)
    witness_Y: list = field(default_factory=list)
    beta_upper: float | None = None
    gamma_ratio: float | None = None
    n: int = 0

    def to_dict(self) -> dict:
        return {
            "p": self.p, "beta_lower": self.beta_lower, "beta_upper": self.beta_upper,
            "gamma_ratio": self.gamma_ratio, "witness": {"X": self.witness_X, "Y": self.witness_Y},
        }


def _start_vector(n: int, shift: int = 0) -> np.ndarray:
    x = np.random.default_rng(0x5EED + shift).standard_normal(n)
    return x / np.linalg.norm(x)


def centered_gram(G: Hypergraph3, p: float) -> np.ndarray:
    """``(B - pJ)^T (B - pJ)`` for the pair-vertex incidence matrix ``B``."""
    B = to_bipartite(G).matrix
    P = G.num_pairs
    BtB = (B.T @ B).toarray()
    col = np.asarray(B.sum(axis=0)).ravel()
    return BtB - p * (col[:, None] + col[None, :]) + p * p * P


def certify_beta_spectral(G: Hypergraph3, p: float, tol: float = 1e-6, max_iter: int = 200_000) -> float:
    """Largest singular value of ``B - pJ``; G is then (p, value)-jumbled.

    Power iteration on the (n x n) Gram operator from a fixed start vector,
    stopped once the eigen-residual is below ``tol`` relative to the Rayleigh
    quotient.
    """
    if not 0 <= p <= 1:
        raise H3Error("CONFIG_INVALID", f"p={p} must lie in [0, 1]")
    if tol <= 0:
        raise H3Error("CONFIG_INVALID", "tol must be positive")
    n = G.n
    if n == 0 or G.num_pairs == 0:
        return 0.0
    M = centered_gram(G, p)
    scale = np.abs(M).max()
    if scale == 0:
        return 0.0
    for shift in range(3):
        x = _start_vector(n, shift)
        prev_res = np.inf
        stall = 0
        for _ in range(max_iter):
            y = M @ x
            rho = float(x @ y)
            res = float(np.linalg.norm(y - rho * x))
            if rho <= 0:
                break
            if res <= tol * 1e-2 * rho:
                return sqrt(rho)
            norm = np.linalg.norm(y)
            x = y / norm
            if res >= prev_res * (1 - 1e-12):
                stall += 1
                if stall > 1000:
                    break
            else:
                stall = 0
            prev_res = res
        else:
            raise H3Error("NO_CONVERGENCE", f"power iteration did not reach tol={tol} in {max_iter} steps")
        if rho <= 0 and res == 0:
            return 0.0
    raise H3Error("NO_CONVERGENCE", "power iteration stagnated from every start vector")


def jumbled_value(G: Hypergraph3, p, X: PairSet, Y: VertexSet) -> float:
    """``|e(X, Y) - p|X||Y|| / sqrt(|X||Y|)`` recounted directly."""
    if not X or not Y:
        return 0.0
    return abs(incidence_count(G, X, Y) - float(p) * len(X) * len(Y)) / sqrt(len(X) * len(Y))


def _best_threshold_set(resid: np.ndarray, other: int):
    """Best subset by exact size sweep: maximise |sum of chosen residuals| / sqrt(t * other)."""
    order = np.argsort(-resid, kind="stable")
    pref = np.cumsum(resid[order])
    t = np.arange(1, len(resid) + 1)
    top = pref / np.sqrt(t * other)
    order_lo = order[::-1]
    pref_lo = np.cumsum(resid[order_lo])
    bot = -pref_lo / np.sqrt(t * other)
    i, j = int(np.argmax(top)), int(np.argmax(bot))
    if top[i] >= bot[j]:
        return order[: i + 1], float(top[i])
    return order_lo[: j + 1], float(bot[j])


def search_beta_lower(G: Hypergraph3, p: float, restarts: int = 8, seed: int = 0) -> JumbledEstimate:
    """Adversarial lower bound on the jumbledness β by alternating exact maximisation."""
    if restarts < 1:
        raise H3Error("CONFIG_INVALID", "restarts must be at least 1")
    n, P = G.n, G.num_pairs
    est = JumbledEstimate(p=float(p), beta_lower=0.0, n=n)
    if P == 0 or n == 0:
        return est
    A = G.incidence.astype(np.float64)
    pf = float(p)
    best = (-1.0, None, None)
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        if r == 0:
            Ymask = np.ones(n, dtype=bool)
        else:
            Ymask = rng.random(n) < rng.uniform(0.1, 0.9)
            if not Ymask.any():
                Ymask[rng.integers(n)] = True
        cur = -1.0
        while True:
            y = int(Ymask.sum())
            resid = A[:, Ymask].sum(axis=1) - pf * y
            Xi, _ = _best_threshold_set(resid, y)
            Xmask = np.zeros(P, dtype=bool)
            Xmask[Xi] = True
            x = int(Xmask.sum())
            cres = A[Xmask].sum(axis=0) - pf * x
            Yi, val = _best_threshold_set(cres, x)
            Ymask = np.zeros(n, dtype=bool)
            Ymask[Yi] = True
            if val <= cur + 1e-12:
                break
            cur = val
            if val > best[0]:
                best = (val, Xmask.copy(), Ymask.copy())
    Xs = PairSet.from_mask(n, best[1])
    Ys = VertexSet.from_mask(best[2])
    est.beta_lower = jumbled_value(G, p, Xs, Ys)
    est.witness_X = Xs.pairs()
    est.witness_Y = Ys.to_list()
    return est


def estimate_jumbledness(G: Hypergraph3, p: float, restarts: int = 8, seed: int = 0, tol: float = 1e-6) -> JumbledEstimate:
    est = search_beta_lower(G, p, restarts, seed)
    est.beta_upper = certify_beta_spectral(G, p, tol)
    denom = float(p) ** 2 * G.n ** 1.5
    est.gamma_ratio = est.beta_upper / denom if denom > 0 else None
    return est


def check_jumbled(G: Hypergraph3, p: float, beta: float, restarts: int = 8, seed: int = 0, tol: float = 1e-6) -> PropertyReport:
    """(p, β)-jumbledness: refuted by a search witness, or certified by the spectral bound."""
    est = estimate_jumbledness(G, p, restarts, seed, tol)
    margins = {"beta": beta, "beta_lower": est.beta_lower, "beta_upper": est.beta_upper,
               "gamma_ratio": est.gamma_ratio, "certified": est.beta_upper <= beta}
    params = {"p": float(p), "beta": float(beta)}
    work = {"restarts": restarts}
    if est.beta_lower > beta + _exact.SLACK:
        w = Witness(est.witness_X, est.witness_Y, est.beta_lower, beta)
        return PropertyReport("JUMBLED", SPECTRAL, params, VIOLATED, w, margins, work)
    return PropertyReport("JUMBLED", SPECTRAL, params, NO_VIOLATION_FOUND, None, margins, work)
