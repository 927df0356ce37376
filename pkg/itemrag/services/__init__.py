"""Pipeline services: ingestion, indexing, retrieval, summaries, ranking, evaluation."""

from .catalog import k_core_filter, leave_one_out, load_catalog, save_catalog
from .copurchase import CoPurchaseIndex, build_index, cofreq, dump_index, load_index, neighbors
from .embeddings import EmbeddingStore, cosine, load_embeddings, populate_embeddings, top_k_similar
from .evaluation import (
    evaluate,
    hit_ratio_at_k,
    make_cold_start,
    ndcg_at_k,
    relative_change,
    sample_candidates,
    sample_users,
)
from .pipeline import Method, RankingPipeline, build_pipeline
from .recommender import augment, build_ranking_prompt, parse_ranking, rank
from .retrieval import RetrievalEngine, build_pool, sample_retrieval, sampling_weight
from .summarizer import CoPurchaseSummarizer, get_or_summarize, summarize, summary_config_hash

__all__ = [
    "load_catalog",
    "save_catalog",
    "leave_one_out",
    "k_core_filter",
    "CoPurchaseIndex",
    "build_index",
    "neighbors",
    "cofreq",
    "dump_index",
    "load_index",
    "EmbeddingStore",
    "load_embeddings",
    "cosine",
    "top_k_similar",
    "populate_embeddings",
    "build_pool",
    "sampling_weight",
    "sample_retrieval",
    "RetrievalEngine",
    "summarize",
    "get_or_summarize",
    "summary_config_hash",
    "CoPurchaseSummarizer",
    "augment",
    "build_ranking_prompt",
    "parse_ranking",
    "rank",
    "sample_candidates",
    "hit_ratio_at_k",
    "ndcg_at_k",
    "evaluate",
    "make_cold_start",
    "sample_users",
    "relative_change",
    "Method",
    "RankingPipeline",
    "build_pipeline",
]
