"""Proactive retrieval-based conversation engine.

Thin Python layer over the C++ core: text scoring, PageRank/HITS reranking,
the dialogue pipeline and the evaluation harness.
"""

from ._core import (  # noqa: F401
    ConvergenceError,
    CorpusStats,
    Engine,
    Error,
    NoReplyError,
    RankParams,
    SessionNotFound,
    co_hits_solve,
    column_normalize,
    compute_metrics,
    compute_priors,
    detect_stalemate,
    hits_weight_matrix,
    pagerank_solve,
    relevance_phi,
    rerank,
    run_eval,
    similarity,
    tokenize,
)

__all__ = [
    "ConvergenceError",
    "CorpusStats",
    "Engine",
    "Error",
    "NoReplyError",
    "RankParams",
    "SessionNotFound",
    "co_hits_solve",
    "column_normalize",
    "compute_metrics",
    "compute_priors",
    "detect_stalemate",
    "hits_weight_matrix",
    "pagerank_solve",
    "relevance_phi",
    "rerank",
    "run_eval",
    "similarity",
    "tokenize",
]
