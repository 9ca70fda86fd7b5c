"""Experiment runner: parameter sweeps, counting comparisons and the implication chain."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import pseudorandom as pr
from .errors import H3Error
from .generators import GenSpec, KINDS, generate, subsample
from .hypergraph import Hypergraph3, VertexSet
from .patterns import PatternH, count_embeddings, load_pattern, loose_cycle, loose_path

GATE = "linear 3-uniform connector-free"
PROPERTY_NAMES = ("QPRIME", "DISC", "PAIR", "TUPLE", "BDD", "JUMBLED")

BUILTIN_PATTERNS = {
    "loose_path": lambda: loose_path(2),
    "loose_3path": lambda: loose_path(3),
    "loose_cycle": lambda: loose_cycle(3),
}

ROW_COLUMNS = (
    "run_id", "generator", "pattern", "property", "status", "count", "expected",
    "relative_error", "beta_lower", "beta_upper", "gamma_ratio", "wall_time",
)


def resolve_pattern(ref: str) -> PatternH:
    if ref in BUILTIN_PATTERNS:
        return BUILTIN_PATTERNS[ref]()
    return load_pattern(ref)


def gate_pattern(H: PatternH) -> None:
    """Reject patterns outside the counting theorem's hypotheses."""
    st = H.stats
    if not st.is_linear or not st.connector_free or H.k < 4:
        why = []
        if not st.is_linear:
            why.append("not linear")
        elif not st.connector_free:
            why.append("has connector edges")
        if H.k < 4:
            why.append(f"k={H.k} < 4")
        raise H3Error("CONFIG_INVALID", f"pattern {H.name!r} fails the {GATE} gate (k >= 4): {', '.join(why)}")


@dataclass(frozen=True)
class PropertySpec:
    name: str
    params: dict = field(default_factory=dict)
    mode: str | None = None
    restarts: int = 8

    def __post_init__(self):
        if self.name.upper() not in PROPERTY_NAMES:
            raise H3Error("CONFIG_INVALID", f"unknown property {self.name!r}")


@dataclass
class ExperimentConfig:
    n: list[int]
    p: list[float]
    seeds: list[int]
    q: list[float] | None = None
    generator: str = "RANDOM"
    host_mode: str = "direct"  # or "subsample": G is a q/p-subsample of a G(n, p) host
    planted_size: int = 0
    planted_p_in: float = 1.0
    alpha: float | None = None
    patterns: list[str] = field(default_factory=list)
    properties: list[PropertySpec] = field(default_factory=list)
    threads: int = 1
    timing: bool = False
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.n or not self.p or not self.seeds:
            raise H3Error("CONFIG_INVALID", "grid over n, p and seeds must be non-empty")
        if self.q is not None and not self.q:
            raise H3Error("CONFIG_INVALID", "q grid is empty")
        if self.generator not in KINDS or self.generator == "SUBSAMPLE":
            raise H3Error("CONFIG_INVALID", f"unsupported generator {self.generator!r}")
        if self.host_mode not in ("direct", "subsample"):
            raise H3Error("CONFIG_INVALID", f"host_mode must be 'direct' or 'subsample', got {self.host_mode!r}")
        if self.format not in ("csv", "json"):
            raise H3Error("CONFIG_INVALID", f"format must be csv or json, got {self.format!r}")
        if self.threads < 1:
            raise H3Error("CONFIG_INVALID", "threads must be at least 1")
        self.properties = [p if isinstance(p, PropertySpec) else PropertySpec(**p) for p in self.properties]
        for p, q in self.grid_pq():
            if not 0 < q <= 1 or not 0 <= p <= 1:
                raise H3Error("CONFIG_INVALID", f"densities out of range (p={p}, q={q})")
            if q > p:
                raise H3Error("CONFIG_INVALID", f"q={q} exceeds p={p}")
            if self.alpha is not None and self.alpha * p > q:
                raise H3Error("CONFIG_INVALID", f"alpha*p exceeds q (alpha={self.alpha}, p={p}, q={q})")

    def grid_pq(self) -> list[tuple[float, float]]:
        if self.q is None:
            return [(p, p) for p in self.p]
        return [(p, q) for p in self.p for q in self.q]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise H3Error("CONFIG_INVALID", f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        for key in ("n", "p", "q", "seeds"):
            if key in d and d[key] is not None and not isinstance(d[key], list):
                d[key] = [d[key]]
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise H3Error("IO_ERROR", f"cannot read {path}: {exc.strerror}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise H3Error("CONFIG_INVALID", f"{path}: {exc}") from exc


@dataclass
class ResultRow:
    run_id: str
    generator: str
    pattern: str = ""
    property: str = ""
    status: str = ""
    count: int | None = None
    expected: float | None = None
    relative_error: float | None = None
    beta_lower: float | None = None
    beta_upper: float | None = None
    gamma_ratio: float | None = None
    wall_time: float | None = None

    def as_list(self) -> list:
        return [getattr(self, c) for c in ROW_COLUMNS]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r.as_list()])
    return buf.getvalue()


def rows_to_json(rows: list[ResultRow]) -> str:
    return json.dumps([dict(zip(ROW_COLUMNS, r.as_list())) for r in rows], indent=1) + "\n"


def write_rows(rows: list[ResultRow], path, fmt: str = "csv") -> None:
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise H3Error("IO_ERROR", f"cannot write {path}: {exc.strerror}") from exc


def _instance(cfg: ExperimentConfig, n: int, p: float, q: float, seed: int) -> tuple[Hypergraph3, str]:
    if cfg.generator == "COMPLETE":
        spec = GenSpec("COMPLETE", n)
    elif cfg.generator == "PLANTED_DENSE":
        spec = GenSpec("PLANTED_DENSE", n, p, seed, s=cfg.planted_size, p_in=cfg.planted_p_in)
    elif cfg.generator == "PLANTED_STAR":
        spec = GenSpec("PLANTED_STAR", n, p, seed)
    else:
        spec = GenSpec("RANDOM", n, p if cfg.host_mode == "subsample" else q, seed)
    G = generate(spec)
    label = json.dumps(spec.to_dict(), separators=(",", ":"))
    if cfg.host_mode == "subsample":
        keep = q / p if p > 0 else 0.0
        G = subsample(G, keep, seed)
        label = json.dumps({"host": spec.to_dict(), "keep": keep}, separators=(",", ":"))
    return G, label


def _run_property(G: Hypergraph3, ps: PropertySpec, q: float, p: float, seed: int):
    name = ps.name.upper()
    kw = dict(ps.params)
    V = VertexSet.full(G.n)
    if name == "TUPLE":
        return pr.check_tuple(G, kw.get("delta", 0.1), kw.get("q", q)), None
    if name == "JUMBLED":
        est = pr.estimate_jumbledness(G, kw.get("p", p), ps.restarts, seed)
        beta = kw.get("beta")
        status = ""
        if beta is not None:
            status = pr.VIOLATED if est.beta_lower > beta else pr.NO_VIOLATION_FOUND
        return None, (status, est)
    kw.setdefault("q", q)
    kw.setdefault("p", p)
    params = pr.PropertyParams(**kw)
    if name == "QPRIME":
        return pr.check_qprime(G, params, ps.mode, ps.restarts, seed), None
    if name == "DISC":
        return pr.check_disc(G, V, V, params, ps.mode, ps.restarts, seed), None
    if name == "PAIR":
        return pr.check_pair(G, V, V, params), None
    return pr.check_bdd(G, params, ps.mode, restarts=ps.restarts, seed=seed), None


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """One row per (grid point, seed, pattern) and per (grid point, seed, property)."""
    patterns = []
    for ref in config.patterns:
        H = resolve_pattern(ref)
        gate_pattern(H)
        patterns.append(H)

    tasks = []
    for n in config.n:
        for p, q in config.grid_pq():
            for seed in config.seeds:
                tasks.append((len(tasks), n, p, q, seed))

    def work(task):
        idx, n, p, q, seed = task
        ctx = f"run {idx:05d} (n={n}, p={p}, q={q}, seed={seed})"
        try:
            G, label = _instance(config, n, p, q, seed)
            rows = []
            for j, H in enumerate(patterns):
                t0 = time.perf_counter()
                ec = count_embeddings(G, H, q)
                rows.append(ResultRow(
                    f"{idx:05d}-c{j:02d}", label, H.name, "", "", ec.count, ec.expected, ec.relative_error,
                    wall_time=time.perf_counter() - t0 if config.timing else None))
            for j, ps in enumerate(config.properties):
                t0 = time.perf_counter()
                rep, jum = _run_property(G, ps, q, p, seed)
                row = ResultRow(f"{idx:05d}-p{j:02d}", label, "", ps.name.upper(),
                                wall_time=time.perf_counter() - t0 if config.timing else None)
                if rep is not None:
                    row.status = rep.status
                else:
                    row.status, est = jum
                    row.beta_lower, row.beta_upper, row.gamma_ratio = est.beta_lower, est.beta_upper, est.gamma_ratio
                rows.append(row)
            return rows
        except H3Error as exc:
            raise H3Error(exc.code, f"{ctx}: {exc.message}") from exc

    if config.threads == 1:
        chunks = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            chunks = list(pool.map(work, tasks))
    rows = sorted((r for c in chunks for r in c), key=lambda r: r.run_id)
    if config.out:
        write_rows(rows, config.out, config.format)
    return rows


# ---------------------------------------------------------------------------
# implication chain
# ---------------------------------------------------------------------------

CHAIN = ("QPRIME", "DISC", "PAIR", "TUPLE")
EDGES = tuple(f"{a}->{b}" for a, b in zip(CHAIN, CHAIN[1:]))
DEFAULT_LADDER = {"eta": 0.5, "delta_qprime": 0.05, "eps": 0.1, "delta_pair": 0.05, "delta_tuple": 0.2}


@dataclass
class ImplicationConfig:
    instances: list = field(default_factory=list)  # GenSpec, dict, or Hypergraph3
    q: float | None = None  # default: the instance's generating density
    p: float | None = None
    ladder: dict = field(default_factory=lambda: dict(DEFAULT_LADDER))
    restarts: int = 8
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        bad = set(self.ladder) - set(DEFAULT_LADDER)
        if bad:
            raise H3Error("CONFIG_INVALID", f"unknown ladder keys: {sorted(bad)}")
        self.ladder = {**DEFAULT_LADDER, **self.ladder}
        self.instances = [GenSpec(**i) if isinstance(i, dict) else i for i in self.instances]

    @classmethod
    def from_dict(cls, d: dict) -> "ImplicationConfig":
        extra = set(d) - set(cls.__dataclass_fields__)
        if extra:
            raise H3Error("CONFIG_INVALID", f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def random_grid(cls, n: int, densities, seeds, **kw) -> "ImplicationConfig":
        inst = [GenSpec("RANDOM", n, d, s) for d in densities for s in seeds]
        return cls(instances=inst, **kw)


def _instance_densities(inst, cfg: ImplicationConfig) -> tuple[float, float]:
    if cfg.q is not None:
        return cfg.q, cfg.p if cfg.p is not None else cfg.q
    if isinstance(inst, GenSpec) and inst.kind == "RANDOM":
        return inst.p, inst.p
    G = inst if isinstance(inst, Hypergraph3) else generate(inst)
    d = G.density
    if d <= 0:
        raise H3Error("NONPOSITIVE_Q", "instance has no edges; give q explicitly")
    return d, d


def _chain_one(inst, cfg: ImplicationConfig, idx: int) -> dict:
    G = inst if isinstance(inst, Hypergraph3) else generate(inst)
    q, p = _instance_densities(inst, cfg)
    L = cfg.ladder
    V = VertexSet.full(G.n)
    seed = cfg.seed + idx
    reports = {
        "QPRIME": pr.check_qprime(G, pr.PropertyParams(q=q, p=p, eta=L["eta"], delta=L["delta_qprime"]),
                                  pr.SEARCH, cfg.restarts, seed),
        "DISC": pr.check_disc(G, V, V, pr.PropertyParams(q=q, p=p, eps=L["eps"]), pr.SEARCH, cfg.restarts, seed),
        "PAIR": pr.check_pair(G, V, V, pr.PropertyParams(q=q, p=p, delta=L["delta_pair"])),
        "TUPLE": pr.check_tuple(G, L["delta_tuple"], q),
    }
    label = inst.to_dict() if isinstance(inst, GenSpec) else {"n": G.n, "m": G.m}
    return {"instance": idx, "spec": label, "q": q, "p": p,
            "status": {k: r.status for k, r in reports.items()},
            "margins": {k: pr._jsonable(r.margins) for k, r in reports.items()}}


def _margin_summary(values: list[float]) -> dict:
    if not values:
        return {"min": None, "median": None, "max": None}
    s = sorted(values)
    m = len(s)
    med = s[m // 2] if m % 2 else (s[m // 2 - 1] + s[m // 2]) / 2
    return {"min": s[0], "median": med, "max": s[-1]}


_KEY_MARGIN = {
    "QPRIME": lambda m: m["worst_relative_deviation"],
    "DISC": lambda m: m["best_value"] / m["bound"] if m["bound"] else None,
    "PAIR": lambda m: max(m["single_ratio"], m["double_ratio"]),
    "TUPLE": lambda m: max(m["degree_fraction"], m["codegree_fraction"]),
}


def implication_suite(config: ImplicationConfig) -> dict:
    """Evaluate the chain on every instance and count antecedent-pass / consequent-fail events.

    ``edges`` uses chain semantics: an edge is only evaluated on instances
    where every upstream property passed, so a failed Q' leaves all downstream
    edges unreported for that instance. ``pairwise`` counts each edge on its
    own, for information.
    """
    idx = list(range(len(config.instances)))
    if config.threads == 1:
        per = [_chain_one(config.instances[i], config, i) for i in idx]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            per = list(pool.map(lambda i: _chain_one(config.instances[i], config, i), idx))
    per.sort(key=lambda r: r["instance"])

    edges = {e: {"antecedent_pass": 0, "events": 0, "event_instances": []} for e in EDGES}
    pairwise = {e: {"antecedent_pass": 0, "events": 0} for e in EDGES}
    for rec in per:
        ok = {k: v != pr.VIOLATED for k, v in rec["status"].items()}
        upstream = True
        for a, b in zip(CHAIN, CHAIN[1:]):
            e = f"{a}->{b}"
            if ok[a]:
                pairwise[e]["antecedent_pass"] += 1
                pairwise[e]["events"] += int(not ok[b])
            upstream = upstream and ok[a]
            if upstream:
                edges[e]["antecedent_pass"] += 1
                if not ok[b]:
                    edges[e]["events"] += 1
                    edges[e]["event_instances"].append(rec["instance"])
    margins = {k: _margin_summary([v for v in (_KEY_MARGIN[k](r["margins"][k]) for r in per) if v is not None])
               for k in CHAIN}
    return {"ladder": config.ladder, "num_instances": len(per), "edges": edges, "pairwise": pairwise,
            "margins": margins, "instances": per}


def implication_json(report: dict) -> str:
    return json.dumps(report, indent=1) + "\n"
