"""Pseudorandomness audits and exact embedding counts for 3-uniform hypergraphs."""
from .errors import H3Error
from .generators import GenSpec, gen_complete, gen_planted_dense, gen_planted_star, gen_random, generate, subsample
from .hypergraph import (
    BipartiteIncidence,
    Hypergraph3,
    PairSet,
    VertexSet,
    build,
    co_neighborhood,
    incidence_count,
    neighborhood,
    q_density,
    read_h3,
    to_bipartite,
    write_h3,
)
from .patterns import (
    EmbeddingCount,
    PatternH,
    automorphism_count,
    classify,
    connector_edges,
    count_embeddings,
    count_embeddings_oracle,
    degeneracy_dH,
    big_DH,
    is_linear,
    load_pattern,
    loose_cycle,
    loose_path,
)
from .pseudorandom import (
    JumbledEstimate,
    PropertyParams,
    PropertyReport,
    certify_beta_spectral,
    check_bdd,
    check_disc,
    check_jumbled,
    check_pair,
    check_qprime,
    check_tuple,
    search_beta_lower,
)
from .harness import ExperimentConfig, ImplicationConfig, ResultRow, implication_suite, run_experiment

__version__ = "0.1.0"
