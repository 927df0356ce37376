"""Ranking methods composed from retrieval, summaries and the recommender."""

from enum import Enum
from typing import Optional, Sequence

import structlog

from ..config.settings import ItemRagSettings
from ..core.client import LlmClient
from ..models.catalog import EvalSplit
from ..models.ranking import RankedList
from ..models.retrieval import RetrievalConfig
from ..utils.cache import SummaryCache
from .copurchase import CoPurchaseIndex, build_index
from .embeddings import EmbeddingStore
from .recommender import DEFAULT_HISTORY_LIMIT, augment, make_ranking_task, rank
from .retrieval import RetrievalEngine
from .summarizer import MAX_SUMMARY_CHARS, CoPurchaseSummarizer

logger = structlog.get_logger(__name__)


class Method(str, Enum):
    """Ranking methods under evaluation."""

    ZERO_SHOT = "zero-shot"
    ITEMRAG = "itemrag"


class RankingPipeline:
    """
    Ranking function for the evaluation harness.

    Zero-shot renders base descriptions only. ItemRAG appends a co-purchase
    summary to every history item shown and to every candidate.
    """

    def __init__(
        self,
        split: EvalSplit,
        llm: LlmClient,
        method: Method = Method.ITEMRAG,
        summarizer: Optional[CoPurchaseSummarizer] = None,
        history_limit: int = DEFAULT_HISTORY_LIMIT,
    ):
        method = Method(method)
        if method is Method.ITEMRAG and summarizer is None:
            raise ValueError("ItemRAG ranking needs a summarizer")
        self.split = split
        self.llm = llm
        self.method = method
        self.summarizer = summarizer
        self.history_limit = history_limit

    async def __call__(self, user: str, history: Sequence[str], candidates: Sequence[str]) -> RankedList:
        catalog = self.split.train
        recent = list(history)[-self.history_limit :] if self.history_limit > 0 else []

        if self.method is Method.ZERO_SHOT:
            history_items = [augment(catalog.item(i)) for i in recent]
            candidate_items = [augment(catalog.item(c)) for c in candidates]
        else:
            assert self.summarizer is not None
            summaries = await self.summarizer.summarize_all([*recent, *candidates])
            history_items = [augment(catalog.item(i), summaries[i]) for i in recent]
            candidate_items = [augment(catalog.item(c), summaries[c]) for c in candidates]

        task = make_ranking_task(user, history_items, candidate_items, self.history_limit)
        return await rank(task, self.llm)


def build_pipeline(
    split: EvalSplit,
    llm: LlmClient,
    method: Method = Method.ITEMRAG,
    store: Optional[EmbeddingStore] = None,
    retrieval: Optional[RetrievalConfig] = None,
    cache: Optional[SummaryCache] = None,
    index: Optional[CoPurchaseIndex] = None,
    history_limit: int = DEFAULT_HISTORY_LIMIT,
    template_version: str = "v1",
    max_chars: int = MAX_SUMMARY_CHARS,
) -> RankingPipeline:
    """Wire a ranking pipeline; the index is built from ``split.train`` if not given."""
    method = Method(method)
    summarizer = None
    if method is Method.ITEMRAG:
        index = index if index is not None else build_index(split.train)
        engine = RetrievalEngine(index, store, retrieval or RetrievalConfig())
        summarizer = CoPurchaseSummarizer(
            split.train, engine, llm, cache, template_version=template_version, max_chars=max_chars
        )
    logger.info("Pipeline built", method=method.value, history_limit=history_limit)
    return RankingPipeline(split, llm, method, summarizer, history_limit)


def pipeline_from_settings(
    settings: ItemRagSettings,
    split: EvalSplit,
    llm: LlmClient,
    method: Method,
    store: Optional[EmbeddingStore] = None,
    cache: Optional[SummaryCache] = None,
    index: Optional[CoPurchaseIndex] = None,
) -> RankingPipeline:
    return build_pipeline(
        split,
        llm,
        method=method,
        store=store,
        retrieval=settings.retrieval,
        cache=cache,
        index=index,
        history_limit=settings.history_limit,
        template_version=settings.summary_template_version,
        max_chars=settings.summary_max_chars,
    )

