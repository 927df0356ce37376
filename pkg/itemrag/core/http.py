"""HTTP layer for OpenAI-compatible endpoints."""

from typing import Any, Awaitable, Callable, Dict, Optional

import httpx
import structlog

from .exceptions import (
    AuthenticationError,
    LlmError,
    LlmProtocolError,
    LlmTimeoutError,
    NetworkError,
    RateLimitError,
    ServerError,
)
from ..utils.retry import retry_policy

logger = structlog.get_logger(__name__)


class HTTPClient:
    """JSON-over-HTTP client with retry and error mapping."""

    def __init__(
        self,
        base_url: str,
        api_key: str,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_factor: float = 1.0,
        max_backoff: float = 30.0,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Optional[Callable[[float], Awaitable[None]]] = None,
    ):
        """
        Initialize HTTP client.

        Args:
            base_url: Base URL for API
            api_key: API key for authentication
            timeout: Request timeout in seconds
            max_retries: Retries after the first attempt on 429/5xx/network errors
            backoff_factor: Base backoff time multiplier
            max_backoff: Maximum backoff time
            transport: Optional httpx transport (tests use MockTransport)
            sleep: Optional sleep coroutine used between retries
        """
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_factor = backoff_factor
        self.max_backoff = max_backoff
        self._sleep = sleep
        self.attempts = 0

        self._client = httpx.AsyncClient(
            base_url=self.base_url,
            timeout=httpx.Timeout(timeout),
            headers=self._get_default_headers(api_key),
            transport=transport,
            limits=httpx.Limits(
                max_keepalive_connections=20,
                max_connections=100,
                keepalive_expiry=30.0
            )
        )

    @staticmethod
    def _get_default_headers(api_key: str) -> Dict[str, str]:
        """Get default headers for requests."""
        return {
            "Authorization": f"Bearer {api_key}",
            "Content-Type": "application/json",
            "Accept": "application/json",
            "User-Agent": "itemrag/0.1.0",
        }

    def _handle_http_error(self, response: httpx.Response, url: str) -> None:
        """Map error responses onto the exception hierarchy."""
        status_code = response.status_code

        try:
            error_data = response.json()
            error = error_data.get("error", error_data)
            message = error.get("message", f"HTTP {status_code}") if isinstance(error, dict) else str(error)
        except Exception:
            message = f"HTTP {status_code}"

        endpoint = f"{self.base_url}{url}"
        if status_code in (401, 403):
            raise AuthenticationError(endpoint, status_code=status_code)
        elif status_code == 429:
            retry_after = None
            if "retry-after" in response.headers:
                try:
                    retry_after = float(response.headers["retry-after"])
                except ValueError:
                    pass
            raise RateLimitError(message, retry_after=retry_after)
        elif 500 <= status_code < 600:
            raise ServerError(message, status_code=status_code)
        else:
            raise LlmError(message, status_code=status_code, details={"endpoint": endpoint})

    async def _send(self, method: str, url: str, **kwargs: Any) -> httpx.Response:
        """One HTTP attempt."""
        self.attempts += 1
        logger.debug("HTTP request", method=method, url=url, attempt=self.attempts)

        try:
            response = await self._client.request(method, url, **kwargs)
        except httpx.TimeoutException as e:
            logger.error("Request timeout", method=method, url=url, timeout=self.timeout)
            raise LlmTimeoutError(f"Request timed out after {self.timeout}s") from e
        except httpx.ConnectError as e:
            logger.error("Connection error", method=method, url=url, error=str(e))
            raise NetworkError(f"Failed to connect to {self.base_url}") from e
        except httpx.HTTPError as e:
            logger.error("HTTP error", method=method, url=url, error=str(e))
            raise NetworkError(f"HTTP error: {str(e)}") from e

        logger.debug("HTTP response", method=method, url=url, status_code=response.status_code)
        if not response.is_success:
            self._handle_http_error(response, url)
        return response

    async def post_json(self, url: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        """POST a JSON body and return the decoded JSON object, with retries."""
        policy = retry_policy(
            max_retries=self.max_retries,
            backoff_factor=self.backoff_factor,
            max_backoff=self.max_backoff,
            sleep=self._sleep,
        )
        response = await policy(self._send, "POST", url, json=payload)

        try:
            data = response.json()
        except ValueError as e:
            raise LlmProtocolError(f"Response body from {url} is not JSON") from e
        if not isinstance(data, dict):
            raise LlmProtocolError(f"Response body from {url} is not a JSON object")
        return data

    async def close(self) -> None:
        """Close HTTP client."""
        await self._client.aclose()

    async def __aenter__(self) -> "HTTPClient":
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        await self.close()
