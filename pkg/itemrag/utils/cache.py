"""Persistent summary cache with single-flight computation."""

import asyncio
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, Optional, Tuple

import structlog
from pydantic import ValidationError as PydanticValidationError

from ..core.exceptions import JsonlParseError
from ..models.summary import CoPurchaseSummary
from .jsonl import append_jsonl, read_jsonl

logger = structlog.get_logger(__name__)

CacheKey = Tuple[str, str]


class SummaryCache:
    """Summaries keyed by ``(item_id, config_hash)``.

    Backed by an append-only JSONL file with an in-memory index; the last
    line for a key wins on reload. Concurrent misses on one key share a
    single computation. If the file cannot be read or written the cache
    keeps working in memory and logs a warning.
    """

    def __init__(self, path: Optional[Path] = None):
        """
        Initialize cache.

        Args:
            path: JSONL file to load from and append to; None keeps the
                cache in memory only
        """
        self.path = Path(path) if path is not None else None
        self._entries: Dict[CacheKey, CoPurchaseSummary] = {}
        self._inflight: Dict[CacheKey, "asyncio.Future[CoPurchaseSummary]"] = {}
        self._persistent = self.path is not None
        self._hits = 0
        self._requests = 0

        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        try:
            for line_number, record in read_jsonl(self.path):
                try:
                    summary = CoPurchaseSummary(
                        item=record["item_id"],
                        text=record["summary"],
                        source_items=record.get("source_items", []),
                        config_hash=record["config_hash"],
                        created_at=record.get("created_at", 0),
                    )
                except (KeyError, PydanticValidationError) as e:
                    logger.warning(
                        "Skipping invalid cache line",
                        path=str(self.path),
                        line=line_number,
                        error=str(e),
                    )
                    continue
                self._entries[(summary.item, summary.config_hash)] = summary
        except (OSError, JsonlParseError) as e:
            logger.warning(
                "Summary cache unreadable, continuing in memory",
                path=str(self.path),
                error=str(e),
            )
            self._persistent = False
        logger.debug("Summary cache loaded", path=str(self.path), entries=len(self._entries))

    def _persist(self, summary: CoPurchaseSummary) -> None:
        if not self._persistent or self.path is None:
            return
        try:
            append_jsonl(
                self.path,
                {
                    "item_id": summary.item,
                    "config_hash": summary.config_hash,
                    "summary": summary.text,
                    "source_items": list(summary.source_items),
                    "created_at": summary.created_at,
                },
            )
        except OSError as e:
            logger.warning(
                "Summary cache write failed, continuing in memory",
                path=str(self.path),
                error=str(e),
            )
            self._persistent = False

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CacheKey) -> bool:
        return key in self._entries

    @property
    def is_persistent(self) -> bool:
        return self._persistent

    def get(self, item_id: str, config_hash: str) -> Optional[CoPurchaseSummary]:
        """Stored summary for the key, or None. Never crosses config hashes."""
        self._requests += 1
        summary = self._entries.get((item_id, config_hash))
        if summary is not None:
            self._hits += 1
        return summary

    def set(self, summary: CoPurchaseSummary) -> None:
        self._entries[(summary.item, summary.config_hash)] = summary
        self._persist(summary)

    async def get_or_compute(
        self,
        item_id: str,
        config_hash: str,
        factory: Callable[[], Awaitable[CoPurchaseSummary]],
    ) -> CoPurchaseSummary:
        """
        Get from cache or compute once using ``factory``.

        Callers that miss while a computation for the same key is running
        wait for that computation instead of starting another one.
        """
        key = (item_id, config_hash)
        cached = self.get(item_id, config_hash)
        if cached is not None:
            return cached

        pending = self._inflight.get(key)
        if pending is not None:
            return await asyncio.shield(pending)

        future: "asyncio.Future[CoPurchaseSummary]" = asyncio.get_running_loop().create_future()
        # Mark exceptions as retrieved when nobody else is waiting.
        future.add_done_callback(lambda f: f.cancelled() or f.exception())
        self._inflight[key] = future
        try:
            summary = await factory()
            self.set(summary)
            future.set_result(summary)
            return summary
        except asyncio.CancelledError:
            future.cancel()
            raise
        except Exception as e:
            future.set_exception(e)
            raise
        finally:
            self._inflight.pop(key, None)

    def stats(self) -> Dict[str, Any]:
        """Get cache statistics."""
        return {
            "total_items": len(self._entries),
            "inflight": len(self._inflight),
            "persistent": self._persistent,
            "hit_ratio": self._hits / max(self._requests, 1),
        }
