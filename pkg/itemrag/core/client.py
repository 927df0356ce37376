"""
LLM client abstraction and the live chat-completions client.

Every pipeline stage talks to an ``LlmClient``. The live implementation
posts to an OpenAI-compatible ``/chat/completions`` endpoint; tests and
offline runs use ``MockLlmClient`` or ``ReplayLlmClient`` instead.
"""

import asyncio
import time
from abc import ABC, abstractmethod
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence

import httpx
import structlog
from pydantic import SecretStr

from .auth import resolve_api_key
from .exceptions import LlmProtocolError
from .http import HTTPClient
from ..config.endpoints import ENDPOINTS
from ..config.settings import ItemRagSettings
from ..models.llm import LlmRequest, LlmResponse, Usage

logger = structlog.get_logger(__name__)


class LlmClient(ABC):
    """Uniform interface over live and mock chat-completion backends.

    Clients are shared across workers; at most ``max_concurrency`` requests
    are in flight at once and completions may come back in any order.
    """

    def __init__(
        self,
        model: str,
        temperature: float = 0.0,
        max_tokens: int = 512,
        max_concurrency: int = 8,
    ):
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.max_concurrency = max_concurrency
        self._semaphore = asyncio.Semaphore(max_concurrency)
        self.calls = 0

    def build_request(self, user: str, system: str = "", max_tokens: Optional[int] = None) -> LlmRequest:
        """Request with this client's model and decoding defaults."""
        return LlmRequest(
            system=system,
            user=user,
            temperature=self.temperature,
            max_tokens=max_tokens or self.max_tokens,
            model=self.model,
        )

    async def complete(self, req: LlmRequest) -> LlmResponse:
        """Run one completion under the in-flight cap."""
        async with self._semaphore:
            self.calls += 1
            return await self._complete(req)

    @abstractmethod
    async def _complete(self, req: LlmRequest) -> LlmResponse:
        ...

    async def embed(self, texts: Sequence[str], model: Optional[str] = None) -> List[List[float]]:
        """Embed texts; backends without an embeddings endpoint raise."""
        raise NotImplementedError(f"{type(self).__name__} does not provide embeddings")

    async def close(self) -> None:
        """Release resources."""

    async def __aenter__(self) -> "LlmClient":
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        await self.close()


class ChatCompletionsClient(LlmClient):
    """
    Client for an OpenAI-compatible chat-completions endpoint.

    Example:
        ```python
        client = ChatCompletionsClient.from_settings(ItemRagSettings())
        response = await client.complete(client.build_request("Rank these items"))
        ```
    """

    def __init__(
        self,
        api_base: str,
        api_key: Optional[SecretStr] = None,
        model: str = "gpt-4.1-mini",
        temperature: float = 0.0,
        max_tokens: int = 512,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_factor: float = 1.0,
        max_backoff: float = 30.0,
        max_concurrency: int = 8,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Optional[Callable[[float], Awaitable[None]]] = None,
    ):
        """
        Initialize the client.

        Args:
            api_base: Endpoint base URL, e.g. ``https://api.openai.com/v1``
            api_key: Credential; falls back to ``ITEMRAG_API_KEY``
            model: Model name sent with every request
            temperature: Sampling temperature (0 for reproducible rankings)
            max_tokens: Default completion budget
            timeout: Per-request timeout in seconds
            max_retries: Retries on 429/5xx/network errors
            backoff_factor: Exponential backoff multiplier
            max_backoff: Backoff cap in seconds
            max_concurrency: In-flight request cap
            transport: Optional httpx transport
            sleep: Optional sleep coroutine used between retries
        """
        super().__init__(model, temperature, max_tokens, max_concurrency)
        self.api_base = api_base.rstrip("/")
        credential = resolve_api_key(f"{self.api_base}{ENDPOINTS.CHAT_COMPLETIONS}", api_key)
        self.http = HTTPClient(
            base_url=self.api_base,
            api_key=credential.get_secret_value(),
            timeout=timeout,
            max_retries=max_retries,
            backoff_factor=backoff_factor,
            max_backoff=max_backoff,
            transport=transport,
            sleep=sleep,
        )

        logger.info(
            "ChatCompletionsClient initialized",
            api_base=self.api_base,
            model=model,
            max_retries=max_retries,
            max_concurrency=max_concurrency,
        )

    @classmethod
    def from_settings(cls, settings: ItemRagSettings, **kwargs: Any) -> "ChatCompletionsClient":
        return cls(
            api_base=settings.api_base,
            api_key=settings.api_key,
            model=settings.model,
            temperature=settings.temperature,
            max_tokens=settings.max_tokens,
            timeout=settings.timeout,
            max_retries=settings.max_retries,
            backoff_factor=settings.backoff_factor,
            max_backoff=settings.max_backoff,
            max_concurrency=settings.max_concurrency,
            **kwargs,
        )

    async def _complete(self, req: LlmRequest) -> LlmResponse:
        started = time.perf_counter()
        data = await self.http.post_json(ENDPOINTS.CHAT_COMPLETIONS, req.to_payload())
        latency_ms = int((time.perf_counter() - started) * 1000)

        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise LlmProtocolError("Response has no choices[0].message.content") from e
        if text is None:
            text = ""
        if not isinstance(text, str):
            raise LlmProtocolError("choices[0].message.content is not a string")

        usage_data: Dict[str, Any] = data.get("usage") or {}
        usage = Usage(
            prompt_tokens=int(usage_data.get("prompt_tokens", 0) or 0),
            completion_tokens=int(usage_data.get("completion_tokens", 0) or 0),
        )
        logger.debug(
            "Completion received",
            model=req.model,
            latency_ms=latency_ms,
            prompt_tokens=usage.prompt_tokens,
            completion_tokens=usage.completion_tokens,
        )
        return LlmResponse(text=text, usage=usage, latency_ms=latency_ms)

    async def embed(self, texts: Sequence[str], model: Optional[str] = None) -> List[List[float]]:
        """Embed texts via the ``/embeddings`` endpoint, preserving input order."""
        payload = {"model": model or self.model, "input": list(texts)}
        async with self._semaphore:
            data = await self.http.post_json(ENDPOINTS.EMBEDDINGS, payload)
        try:
            rows = sorted(data["data"], key=lambda row: row["index"])
            vectors = [[float(x) for x in row["embedding"]] for row in rows]
        except (KeyError, TypeError, ValueError) as e:
            raise LlmProtocolError("Embeddings response is malformed") from e
        if len(vectors) != len(texts):
            raise LlmProtocolError(f"Expected {len(texts)} embeddings, got {len(vectors)}")
        return vectors

    async def close(self) -> None:
        """Close the HTTP client and cleanup resources."""
        await self.http.close()
        logger.info("ChatCompletionsClient closed")
