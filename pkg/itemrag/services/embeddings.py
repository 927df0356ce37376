"""Item text embeddings and exact top-K cosine search."""

import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import structlog

from ..core.client import LlmClient
from ..core.exceptions import DimensionMismatchError, EmbeddingLoadError, ItemNotFoundError
from ..models.catalog import Catalog
from ..models.retrieval import SimilarSet
from ..utils.jsonl import read_jsonl, write_jsonl

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

# Scores are compared at this precision so ties survive rescaling.
SCORE_DECIMALS = 12
BATCH_ROWS = 1024


class EmbeddingStore:
    """
    Dense item vectors held as one row-normalized matrix.

    Rows follow ItemId ascending, so a stable sort on row position breaks
    score ties by ItemId. The store is immutable after construction.
    """

    def __init__(self, vectors: Mapping[str, Sequence[float]], model_tag: str = ""):
        if not vectors:
            raise EmbeddingLoadError("Embedding store needs at least one vector")
        self.ids: List[str] = sorted(vectors)
        self._position: Dict[str, int] = {item_id: row for row, item_id in enumerate(self.ids)}
        self.dim = len(vectors[self.ids[0]])
        self.model_tag = model_tag

        raw = np.empty((len(self.ids), self.dim), dtype=np.float64)
        for row, item_id in enumerate(self.ids):
            vector = vectors[item_id]
            if len(vector) != self.dim:
                raise DimensionMismatchError(item_id, self.dim, len(vector))
            raw[row] = vector
        if not np.all(np.isfinite(raw)):
            bad = self.ids[int(np.flatnonzero(~np.isfinite(raw).all(axis=1))[0])]
            raise EmbeddingLoadError(f"Item '{bad}' has a non-finite component", item_id=bad)
        norms = np.linalg.norm(raw, axis=1)
        if np.any(norms == 0):
            bad = self.ids[int(np.flatnonzero(norms == 0)[0])]
            raise EmbeddingLoadError(f"Item '{bad}' has an all-zero vector", item_id=bad)

        self._raw = raw
        self._unit = raw / norms[:, None]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self._position

    def __repr__(self) -> str:
        return f"EmbeddingStore(items={len(self)}, dim={self.dim}, model_tag={self.model_tag!r})"

    def _row(self, item_id: str) -> int:
        try:
            return self._position[item_id]
        except KeyError:
            raise ItemNotFoundError(item_id, where="embedding store") from None

    def vector(self, item_id: str) -> np.ndarray:
        return self._raw[self._row(item_id)].copy()

    def cosine(self, i: str, j: str) -> float:
        value = float(self._unit[self._row(i)] @ self._unit[self._row(j)])
        return min(1.0, max(-1.0, value))

    def _select(self, query_row: int, scores: np.ndarray, k: int) -> SimilarSet:
        query = self.ids[query_row]
        k = min(k, len(self.ids) - 1)
        if k <= 0:
            return SimilarSet.empty(query)

        scores = np.round(scores, SCORE_DECIMALS)
        scores[query_row] = -np.inf
        if k < len(scores) - 1:
            # Everything scoring at least the k-th best, ties included.
            threshold = -np.partition(-scores, k - 1)[k - 1]
            rows = np.flatnonzero(scores >= threshold)
        else:
            rows = np.flatnonzero(np.isfinite(scores))
        order = rows[np.lexsort((rows, -scores[rows]))][:k]
        members = [(self.ids[row], float(scores[row])) for row in order]
        return SimilarSet(query=query, members=members)

    def top_k(self, i: str, k: int) -> SimilarSet:
        """The ``k`` most cosine-similar other items, ties by ItemId ascending."""
        row = self._row(i)
        if k <= 0:
            return SimilarSet.empty(i)
        return self._select(row, self._unit @ self._unit[row], k)

    def top_k_batch(self, queries: Iterable[str], k: int) -> Dict[str, SimilarSet]:
        """Top-K for many items, keyed and ordered by query ItemId."""
        rows = sorted({self._row(q) for q in queries})
        results: Dict[str, SimilarSet] = {}
        for start in range(0, len(rows), BATCH_ROWS):
            block = rows[start : start + BATCH_ROWS]
            scores = self._unit[block] @ self._unit.T
            for offset, row in enumerate(block):
                if k <= 0:
                    results[self.ids[row]] = SimilarSet.empty(self.ids[row])
                else:
                    results[self.ids[row]] = self._select(row, scores[offset].copy(), k)
        return results


def cosine(store: EmbeddingStore, i: str, j: str) -> float:
    return store.cosine(i, j)


def top_k_similar(store: EmbeddingStore, i: str, k: int) -> SimilarSet:
    return store.top_k(i, k)


def top_k_batch(store: EmbeddingStore, queries: Iterable[str], k: int) -> Dict[str, SimilarSet]:
    return store.top_k_batch(queries, k)


def _parse_vector(value: object, item_id: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise EmbeddingLoadError(f"Item '{item_id}' has no vector", item_id=item_id)
    vector: List[float] = []
    for x in value:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise EmbeddingLoadError(f"Item '{item_id}' has a non-numeric component", item_id=item_id)
        vector.append(float(x))
    return vector


def load_embeddings(path: PathLike, expected_dim: Optional[int] = None) -> EmbeddingStore:
    """
    Load ``{"item_id", "vector"}`` lines, with an optional leading
    ``{"dim", "model_tag"}`` header.

    Args:
        path: Embeddings JSONL file
        expected_dim: Required dimension, if known

    Raises:
        DimensionMismatchError: If a vector's length differs from the store's
        EmbeddingLoadError: On zero or malformed vectors
    """
    dim = expected_dim
    model_tag = ""
    vectors: Dict[str, List[float]] = {}
    first = True
    for line_number, record in read_jsonl(path):
        is_first, first = first, False
        if "item_id" not in record:
            if not is_first:
                raise EmbeddingLoadError(f"{path}:{line_number}: header must be the first line")
            header_dim = record.get("dim")
            if header_dim is not None:
                if expected_dim is not None and header_dim != expected_dim:
                    raise EmbeddingLoadError(f"{path}: header dim {header_dim} != expected {expected_dim}")
                dim = int(header_dim)
            model_tag = str(record.get("model_tag", ""))
            continue

        item_id = record["item_id"]
        if not isinstance(item_id, str) or not item_id:
            raise EmbeddingLoadError(f"{path}:{line_number}: item_id must be a non-empty string")
        vector = _parse_vector(record.get("vector"), item_id)
        if dim is None:
            dim = len(vector)
        elif len(vector) != dim:
            raise DimensionMismatchError(item_id, dim, len(vector))
        if not any(vector):
            raise EmbeddingLoadError(f"Item '{item_id}' has an all-zero vector", item_id=item_id)
        if item_id in vectors:
            logger.warning("Duplicate embedding line, keeping the last", item_id=item_id, line=line_number)
        vectors[item_id] = vector

    store = EmbeddingStore(vectors, model_tag=model_tag)
    logger.info("Embeddings loaded", path=str(path), items=len(store), dim=store.dim, model_tag=model_tag)
    return store


def save_embeddings(store: EmbeddingStore, path: PathLike) -> None:
    def records():
        yield {"dim": store.dim, "model_tag": store.model_tag}
        for item_id in store.ids:
            yield {"item_id": item_id, "vector": [float(x) for x in store.vector(item_id)]}

    write_jsonl(path, records())


async def populate_embeddings(
    catalog: Catalog,
    llm: LlmClient,
    path: PathLike,
    model: Optional[str] = None,
    batch_size: int = 64,
) -> EmbeddingStore:
    """
    Embed every item description through ``llm.embed`` and write the file.

    Items are embedded in ItemId order, ``batch_size`` descriptions per call.
    """
    item_ids = catalog.sorted_item_ids()
    vectors: Dict[str, Sequence[float]] = {}
    for start in range(0, len(item_ids), batch_size):
        batch = item_ids[start : start + batch_size]
        embedded = await llm.embed([catalog.items[i].description for i in batch], model=model)
        vectors.update(zip(batch, embedded))
        logger.debug("Embedded batch", start=start, size=len(batch))

    store = EmbeddingStore(vectors, model_tag=model or llm.model)
    save_embeddings(store, path)
    logger.info("Embeddings populated", path=str(path), items=len(store), dim=store.dim)
    return store
