from itertools import combinations, permutations
from math import perm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h3audit import (
    H3Error,
    Hypergraph3,
    PatternH,
    automorphism_count,
    big_DH,
    build,
    classify,
    connector_edges,
    count_embeddings,
    count_embeddings_oracle,
    degeneracy_dH,
    gen_complete,
    gen_random,
    is_linear,
    loose_cycle,
    loose_path,
)
from h3audit.patterns import _connectors, corpus_patterns, corpus_truth, make_plan

PATH = loose_path(2)
K4 = PatternH(4, tuple(combinations(range(4), 3)), "k4")
EDGE = PatternH(3, ((0, 1, 2),), "edge")
H_C = PatternH(7, ((0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 3, 6)), "connector_star")


@st.composite
def patterns(draw, max_k=5):
    k = draw(st.integers(1, max_k))
    triples = list(combinations(range(k), 3))
    edges = draw(st.lists(st.sampled_from(triples), unique=True, max_size=4)) if triples else []
    return PatternH(k, tuple(edges))


def brute_dH(H):
    best = 0
    for size in range(1, H.k + 1):
        for W in combinations(range(H.k), size):
            inside = [e for e in H.edges if set(e) <= set(W)]
            best = max(best, min(sum(v in e for e in inside) for v in W))
    return best


# --- classification ---------------------------------------------------------


def test_linearity():
    assert is_linear(PATH) and is_linear(EDGE)
    assert not is_linear(K4)


def test_connectors():
    assert connector_edges(PATH) == []
    assert connector_edges(H_C) == [(0, 1, 2)]
    with pytest.raises(H3Error, match="NOT_LINEAR"):
        connector_edges(K4)


def test_graph_connector_is_triangle_edge():
    # with 2-element edges the same definition marks exactly the triangle edges
    graph = [(0, 1), (1, 2), (0, 2), (2, 3)]
    assert sorted(_connectors(graph, range(4), 2)) == [(0, 1), (0, 2), (1, 2)]


def test_degeneracy_examples():
    assert degeneracy_dH(PATH) == 1
    assert degeneracy_dH(K4) == 3
    assert degeneracy_dH(PatternH(4, ())) == 0
    assert big_DH(PATH) == 2 and big_DH(K4) == 3 and big_DH(EDGE) == 1


@settings(max_examples=80, deadline=None)
@given(patterns(max_k=6))
def test_peeling_matches_brute_force(H):
    s = H.stats
    assert s.d_H == brute_dH(H)
    assert s.D_H == min(3 * s.d_H, s.max_degree)
    assert s.d_H <= s.max_degree


def test_classify_json_shape():
    c = classify(PATH)
    assert list(c) == ["k", "m", "linear", "connectors", "d_H", "D_H", "max_degree", "aut"]
    assert c["linear"] and c["d_H"] == 1 and c["D_H"] == 2 and c["connectors"] == []
    assert classify(K4)["connectors"] is None


def test_corpus_matches_ground_truth():
    truth = corpus_truth()
    corpus = corpus_patterns()
    assert len(corpus) >= 10 and set(corpus) == set(truth)
    for name, H in corpus.items():
        t = truth[name]
        c = classify(H)
        assert (c["k"], c["m"], c["linear"], c["d_H"], c["D_H"], c["max_degree"]) == (
            t["k"], t["m"], t["linear"], t["d_H"], t["D_H"], t["max_degree"]), name
        got = sorted(c["connectors"]) if c["connectors"] is not None else None
        assert got == t["connectors"], name


def test_pattern_limits():
    with pytest.raises(H3Error):
        PatternH(17, ())


# --- automorphisms ----------------------------------------------------------


def test_automorphism_examples():
    assert automorphism_count(PATH) == 8
    assert automorphism_count(EDGE) == 6
    assert automorphism_count(K4) == 24


@settings(max_examples=40, deadline=None)
@given(patterns(max_k=6))
def test_automorphisms_brute_force(H):
    E = {frozenset(e) for e in H.edges}
    brute = sum(1 for p in permutations(range(H.k)) if {frozenset(p[v] for v in e) for e in E} == E)
    assert automorphism_count(H) == brute


# --- counting ---------------------------------------------------------------


def test_count_examples():
    assert count_embeddings(gen_complete(5), PATH).count == 120
    host = build(5, PATH.edges)
    assert count_embeddings(host, PATH).count == 8
    assert count_embeddings_oracle(host, PATH).count == 8
    assert count_embeddings_oracle(gen_complete(4), EDGE).count == 24
    assert count_embeddings_oracle(Hypergraph3(7), PATH).count == 0
    G = gen_random(9, 0.4, 2)
    assert count_embeddings_oracle(G, PatternH(3, ())).count == 9 * 8 * 7


def test_count_g12_matches_oracle():
    G = gen_random(12, 0.5, 9)
    assert count_embeddings(G, PATH).count == count_embeddings_oracle(G, PATH).count


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 11), st.floats(0.1, 0.9), st.integers(0, 10**6), patterns())
def test_oracle_equivalence_and_divisibility(n, p, seed, H):
    G = gen_random(n, p, seed)
    c = count_embeddings(G, H)
    assert c.count == count_embeddings_oracle(G, H).count
    assert c.count % automorphism_count(H) == 0
    assert 0 <= c.count <= perm(n, H.k)


@settings(max_examples=40, deadline=None)
@given(st.integers(6, 10), st.integers(0, 10**6), patterns())
def test_count_monotone(n, seed, H):
    G = gen_random(n, 0.4, seed)
    missing = sorted(set(combinations(range(n), 3)) - G.edge_set)
    if missing:
        bigger = Hypergraph3(n, list(G.edges) + [missing[seed % len(missing)]])
        assert count_embeddings(bigger, H).count >= count_embeddings(G, H).count
    spare = sorted(set(combinations(range(H.k), 3)) - set(H.edges))
    if spare:
        H2 = PatternH(H.k, H.edges + (spare[0],))
        assert count_embeddings(G, H2).count <= count_embeddings(G, H).count


@pytest.mark.parametrize("H", [PATH, loose_path(3), loose_cycle(3), PatternH(6, ())])
def test_complete_host_falling_factorial(H):
    for n in (H.k, 9, 13):
        c = count_embeddings(gen_complete(n), H)
        assert c.count == perm(n, H.k)
        assert c.relative_error == pytest.approx((perm(n, H.k) - n**H.k) / n**H.k)


def test_count_threads_agree():
    G = gen_random(40, 0.3, 4)
    for H in (PATH, loose_path(3), H_C):
        assert count_embeddings(G, H, threads=1).count == count_embeddings(G, H, threads=3).count


def test_count_errors():
    with pytest.raises(H3Error, match="PATTERN_TOO_LARGE"):
        count_embeddings(gen_complete(4), PATH)
    with pytest.raises(H3Error, match="ORACLE_TOO_LARGE"):
        count_embeddings_oracle(gen_random(13, 0.3, 1), PATH)


def test_expected_and_relative_error():
    G = gen_random(30, 0.3, 1)
    c = count_embeddings(G, PATH, q=0.3)
    assert c.expected == pytest.approx(30**5 * 0.3**2)
    assert c.relative_error == pytest.approx((c.count - c.expected) / c.expected)


def test_plan_closes_every_edge():
    for H in (PATH, loose_cycle(3), K4, PatternH(6, ((0, 1, 2), (0, 3, 4), (1, 3, 5)))):
        plan = make_plan(H)
        closed = sum(len(c) for c in plan.closing) + len(plan.tail)
        assert closed == H.m
        G = gen_random(10, 0.6, 1)
        assert count_embeddings(G, H).count == count_embeddings_oracle(G, H).count


def test_isolated_vertices_multiplier():
    G = gen_random(10, 0.5, 3)
    H = PatternH(5, ((0, 1, 2),))
    base = count_embeddings(G, EDGE).count
    assert count_embeddings(G, H).count == base * 7 * 6
    assert count_embeddings_oracle(G, H).count == base * 42
