"""Transcript recording and offline replay of LLM calls."""

from pathlib import Path
from typing import Dict, Union

import structlog
from pydantic import ValidationError as PydanticValidationError

from .client import LlmClient
from .exceptions import JsonlParseError, ReplayMissError
from ..models.llm import LlmRequest, LlmResponse
from ..utils.jsonl import append_jsonl, read_jsonl

logger = structlog.get_logger(__name__)


class RecordingLlmClient(LlmClient):
    """Wraps a client and appends every request/response pair to a replay file.

    Requests are stored without credentials; the file can be replayed with
    ``ReplayLlmClient`` to re-run a live evaluation offline.
    """

    def __init__(self, inner: LlmClient, path: Union[str, Path]):
        super().__init__(
            model=inner.model,
            temperature=inner.temperature,
            max_tokens=inner.max_tokens,
            max_concurrency=inner.max_concurrency,
        )
        self.inner = inner
        self.path = Path(path)

    async def _complete(self, req: LlmRequest) -> LlmResponse:
        response = await self.inner.complete(req)
        append_jsonl(
            self.path,
            {
                "request_hash": req.request_hash(),
                "request": req.model_dump(mode="json"),
                "response": response.model_dump(mode="json"),
            },
        )
        return response

    async def close(self) -> None:
        await self.inner.close()


class ReplayLlmClient(LlmClient):
    """Serves responses recorded by ``RecordingLlmClient``; no network."""

    def __init__(self, path: Union[str, Path], model: str = "replay"):
        super().__init__(model=model)
        self.path = Path(path)
        self._responses: Dict[str, LlmResponse] = {}
        for line_number, record in read_jsonl(self.path):
            try:
                self._responses[record["request_hash"]] = LlmResponse.model_validate(record["response"])
            except (KeyError, PydanticValidationError) as e:
                raise JsonlParseError(self.path, line_number, f"invalid replay record: {e}") from e
        logger.info("Replay file loaded", path=str(self.path), entries=len(self._responses))

    def __len__(self) -> int:
        return len(self._responses)

    async def _complete(self, req: LlmRequest) -> LlmResponse:
        key = req.request_hash()
        try:
            return self._responses[key]
        except KeyError:
            raise ReplayMissError(key) from None
