"""Retrieval pools, sampling weights and weighted sampling of co-purchased items."""

from pathlib import Path
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Mapping, Optional, Union

import numpy as np
import structlog

from ..core.exceptions import ItemRagError
from ..models.retrieval import RetrievalConfig, RetrievalResult, SampledItem, SimilarSet
from ..utils.jsonl import write_jsonl
from ..utils.rng import derive_rng
from .copurchase import CoPurchaseIndex
from .embeddings import EmbeddingStore

logger = structlog.get_logger(__name__)


def build_pool(
    i: str, index: CoPurchaseIndex, similar: SimilarSet, cfg: RetrievalConfig
) -> FrozenSet[str]:
    """
    Items co-purchased with ``i`` or with any of its similar items, minus ``i``.

    With ``use_sim_items`` off the pool is ``N(i)`` alone.
    """
    pool = set(index.neighbors(i))
    if cfg.use_sim_items:
        for q in similar.item_ids:
            pool.update(index.neighbors(q))
    pool.discard(i)
    return frozenset(pool)


def sampling_weight(i: str, j: str, index: CoPurchaseIndex, similar: SimilarSet) -> float:
    """
    ``c_ij`` plus the mean of ``c_qj`` over the similar items ``q`` of ``i``.

    The mean divides by the number of similar items actually present and is
    0 when there are none. A similar item equal to ``j`` contributes 0.
    """
    direct = index.cofreq(i, j)
    similar_ids = similar.item_ids
    if not similar_ids:
        return float(direct)
    spill = sum(index.cofreq(q, j) for q in similar_ids if q != j)
    return direct + spill / len(similar_ids)


def sample_retrieval(
    i: str,
    pool: AbstractSet[str],
    weights: Mapping[str, float],
    cfg: RetrievalConfig,
    rng: np.random.Generator,
) -> RetrievalResult:
    """
    Draw ``cfg.n`` distinct items from the pool.

    Pools no larger than ``n`` are returned whole, ordered by weight
    descending then ItemId. Larger pools are sampled by successive draws
    without replacement, each proportional to the remaining weights (uniform
    when ``use_cofreq_weights`` is off); items come back in draw order.
    """
    base = dict(query=i, seed=cfg.rng_seed, config_hash=cfg.config_hash())
    if not pool:
        return RetrievalResult(pool_size=0, sampled=[], **base)

    members = sorted(pool)
    if cfg.use_cofreq_weights:
        w = np.array([weights[j] for j in members], dtype=np.float64)
        if np.any(~(w > 0)):
            bad = members[int(np.flatnonzero(~(w > 0))[0])]
            raise ItemRagError(f"Pool member '{bad}' of '{i}' has non-positive weight")
    else:
        w = np.ones(len(members), dtype=np.float64)

    if len(members) <= cfg.n:
        order = sorted(range(len(members)), key=lambda k: (-w[k], members[k]))
    else:
        order = []
        remaining = w.copy()
        for _ in range(cfg.n):
            cumulative = np.cumsum(remaining)
            k = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
            # Guard against float round-off at the top of the range.
            k = min(k, len(members) - 1)
            while remaining[k] == 0:
                k -= 1
            order.append(k)
            remaining[k] = 0.0

    sampled = [SampledItem(item=members[k], w=float(w[k])) for k in order]
    return RetrievalResult(pool_size=len(members), sampled=sampled, **base)


class RetrievalEngine:
    """
    Retrieval for query items over one index, store and configuration.

    Each query item draws from its own generator derived from
    ``(rng_seed, item_id)``, so results do not depend on query order or
    parallel scheduling. Items missing from the embedding store get no
    similar items.
    """

    def __init__(
        self,
        index: CoPurchaseIndex,
        store: Optional[EmbeddingStore],
        config: Optional[RetrievalConfig] = None,
    ):
        self.index = index
        self.store = store
        self.config = config or RetrievalConfig()
        self.config_hash = self.config.config_hash()

    def _uses_similar(self) -> bool:
        return self.config.use_sim_items and self.config.k > 0 and self.store is not None

    def similar(self, i: str) -> SimilarSet:
        if not self._uses_similar() or i not in self.store:  # type: ignore[operator]
            return SimilarSet.empty(i)
        return self.store.top_k(i, self.config.k)  # type: ignore[union-attr]

    def _retrieve(self, i: str, similar: SimilarSet) -> RetrievalResult:
        pool = build_pool(i, self.index, similar, self.config)
        weights = {j: sampling_weight(i, j, self.index, similar) for j in pool}
        result = sample_retrieval(i, pool, weights, self.config, derive_rng(self.config.rng_seed, i))
        if result.is_empty:
            logger.debug("Empty retrieval pool", item=i)
        return result

    def retrieve(self, i: str) -> RetrievalResult:
        return self._retrieve(i, self.similar(i))

    def retrieve_many(self, items: Iterable[str]) -> Dict[str, RetrievalResult]:
        """Results keyed and ordered by query ItemId."""
        queries = sorted(set(items))
        similar: Dict[str, SimilarSet] = {}
        if self._uses_similar():
            similar = self.store.top_k_batch(  # type: ignore[union-attr]
                [q for q in queries if q in self.store], self.config.k  # type: ignore[operator]
            )
        results = {q: self._retrieve(q, similar.get(q) or SimilarSet.empty(q)) for q in queries}
        logger.info(
            "Retrieval finished",
            queries=len(results),
            empty=sum(r.is_empty for r in results.values()),
            config_hash=self.config_hash,
        )
        return results


def write_retrieval_dump(results: Iterable[RetrievalResult], path: Union[str, Path]) -> None:
    """One JSONL record per query item, sorted by query."""
    ordered: List[RetrievalResult] = sorted(results, key=lambda r: r.query)
    write_jsonl(path, (r.model_dump(mode="json") for r in ordered))
    logger.info("Retrieval dump written", path=str(path), queries=len(ordered))
