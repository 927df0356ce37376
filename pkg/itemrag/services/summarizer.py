"""LLM summaries of retrieved co-purchased items, cached per item."""

import asyncio
import time
from typing import Dict, Iterable, List, Optional, Sequence

import structlog

from ..core.client import LlmClient
from ..models.catalog import Catalog, Item
from ..models.retrieval import RetrievalConfig
from ..models.summary import EMPTY_SUMMARY, CoPurchaseSummary
from ..prompts import SUMMARY_TEMPLATE_VERSION, SUMMARY_TEMPLATES, render_summary_prompt
from ..utils.cache import SummaryCache
from ..utils.hashing import stable_digest
from .retrieval import RetrievalEngine

logger = structlog.get_logger(__name__)

MAX_SUMMARY_CHARS = 1000


def summary_config_hash(
    retrieval: RetrievalConfig,
    template_version: str = SUMMARY_TEMPLATE_VERSION,
    model_tag: str = "",
    index_hash: str = "",
) -> str:
    """Hash binding a summary to the retrieval config, template and model.

    ``index_hash`` identifies the training data the co-purchase index came
    from, so standard and cold-start runs never share summaries.
    """
    return stable_digest(
        {
            "retrieval": retrieval.model_dump(mode="json"),
            "template_version": template_version,
            "model": model_tag,
            "index": index_hash,
        }
    )


def _empty(item: Item, config_hash: str) -> CoPurchaseSummary:
    return CoPurchaseSummary(
        item=item.id,
        text=EMPTY_SUMMARY,
        source_items=[],
        config_hash=config_hash,
        created_at=int(time.time()),
    )


async def summarize(
    item: Item,
    retrieved: Sequence[Item],
    llm: LlmClient,
    template_version: str = SUMMARY_TEMPLATE_VERSION,
    config_hash: str = "",
    max_chars: int = MAX_SUMMARY_CHARS,
) -> CoPurchaseSummary:
    """
    Ask the LLM to summarize the items retrieved for ``item``.

    No request is made when nothing was retrieved; an empty completion is
    also turned into the empty sentinel. Completions are cut to
    ``max_chars`` characters.

    Args:
        item: Query item
        retrieved: Retrieved items in sampled order
        llm: Client used for the completion
        template_version: Summary prompt version
        config_hash: Hash recorded on the summary
        max_chars: Hard cap on the summary length

    Raises:
        TransportError: When the client gives up after its retries
    """
    if template_version not in SUMMARY_TEMPLATES:
        raise KeyError(f"Unknown summary template version '{template_version}'")
    if not retrieved:
        return _empty(item, config_hash)

    prompt = render_summary_prompt(item.description, [r.description for r in retrieved], template_version)
    response = await llm.complete(llm.build_request(prompt))

    text = response.text.strip()
    if not text:
        logger.warning("Empty summary completion", item=item.id, sources=len(retrieved))
        return _empty(item, config_hash)
    if len(text) > max_chars:
        logger.debug("Summary truncated", item=item.id, length=len(text), max_chars=max_chars)
        text = text[:max_chars]

    return CoPurchaseSummary(
        item=item.id,
        text=text,
        source_items=[r.id for r in retrieved],
        config_hash=config_hash,
        created_at=int(time.time()),
    )


async def get_or_summarize(
    cache: SummaryCache,
    item: Item,
    retrieved: Sequence[Item],
    llm: LlmClient,
    cfg_hash: str,
    template_version: str = SUMMARY_TEMPLATE_VERSION,
    max_chars: int = MAX_SUMMARY_CHARS,
) -> CoPurchaseSummary:
    """Cached ``summarize``; concurrent misses on one key share one LLM call."""
    return await cache.get_or_compute(
        item.id,
        cfg_hash,
        lambda: summarize(item, retrieved, llm, template_version, cfg_hash, max_chars),
    )


class CoPurchaseSummarizer:
    """Retrieval plus cached summarization for items of one catalog."""

    def __init__(
        self,
        catalog: Catalog,
        engine: RetrievalEngine,
        llm: LlmClient,
        cache: Optional[SummaryCache] = None,
        template_version: str = SUMMARY_TEMPLATE_VERSION,
        max_chars: int = MAX_SUMMARY_CHARS,
    ):
        self.catalog = catalog
        self.engine = engine
        self.llm = llm
        self.cache = cache if cache is not None else SummaryCache()
        self.template_version = template_version
        self.max_chars = max_chars
        self.config_hash = summary_config_hash(
            engine.config, template_version, llm.model, engine.index.config_hash
        )

    async def summary_for(self, item_id: str) -> CoPurchaseSummary:
        cached = self.cache.get(item_id, self.config_hash)
        if cached is not None:
            return cached
        item = self.catalog.item(item_id)
        result = self.engine.retrieve(item_id)
        retrieved = [self.catalog.item(j) for j in result.item_ids]
        return await get_or_summarize(
            self.cache, item, retrieved, self.llm, self.config_hash, self.template_version, self.max_chars
        )

    async def summarize_all(self, item_ids: Iterable[str]) -> Dict[str, CoPurchaseSummary]:
        """Summaries keyed and ordered by ItemId; requests run concurrently."""
        ordered: List[str] = sorted(set(item_ids))
        summaries = await asyncio.gather(*(self.summary_for(i) for i in ordered))
        logger.info(
            "Summaries ready",
            items=len(ordered),
            empty=sum(s.is_empty for s in summaries),
            config_hash=self.config_hash,
        )
        return dict(zip(ordered, summaries))
