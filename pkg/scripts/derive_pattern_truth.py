"""Derive classifier ground truth for the shipped pattern corpus by exhaustive definition checks.

Deliberately independent of the package: parses the files by hand and
evaluates every definition by brute force (all edge pairs, all outside
vertices, all induced vertex subsets).

    python scripts/derive_pattern_truth.py > src/h3audit/data/pattern_truth.json
"""
import json
import sys
from itertools import combinations
from pathlib import Path

CORPUS = Path(__file__).resolve().parent.parent / "src" / "h3audit" / "data" / "patterns"


def parse(path):
    rows = [ln.split() for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    k = int(rows[0][0])
    return k, [frozenset(map(int, r)) for r in rows[1:]]


def truth(k, edges):
    linear = all(len(e & f) <= 1 for e, f in combinations(edges, 2))
    connectors = None
    if linear:
        connectors = []
        for e in edges:
            for v in range(k):
                if v not in e and sum(1 for f in edges if v in f and len(f & e) == 1) >= 3:
                    connectors.append(sorted(e))
                    break
        connectors.sort()
    d_H = 0
    for size in range(1, k + 1):
        for W in combinations(range(k), size):
            Ws = set(W)
            inside = [e for e in edges if e <= Ws]
            d_H = max(d_H, min(sum(1 for e in inside if v in e) for v in W))
    max_degree = max((sum(1 for e in edges if v in e) for v in range(k)), default=0)
    return {"k": k, "m": len(edges), "linear": linear, "connectors": connectors,
            "d_H": d_H, "D_H": min(3 * d_H, max_degree), "max_degree": max_degree}


def main():
    out = {p.stem: truth(*parse(p)) for p in sorted(CORPUS.glob("*.h3"))}
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
