"""Custom exceptions for the ItemRAG pipeline."""

from pathlib import Path
from typing import Any, Dict, Optional, Union


class ItemRagError(Exception):
    """Base exception for ItemRAG errors."""

    def __init__(
        self,
        message: str,
        status_code: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.status_code = status_code
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.status_code:
            return f"[{self.status_code}] {self.message}"
        return self.message


class JsonlParseError(ItemRagError):
    """A JSONL line could not be parsed into a record."""

    def __init__(self, path: Union[str, Path], line_number: int, reason: str):
        self.path = str(path)
        self.line_number = line_number
        message = f"{self.path}:{line_number}: {reason}"
        super().__init__(message, details={"path": self.path, "line": line_number})


# Catalog ingestion

class CatalogError(ItemRagError):
    """Catalog data is malformed or inconsistent."""


class CatalogParseError(JsonlParseError, CatalogError):
    """An interactions or items line is malformed."""


class ReferentialIntegrityError(CatalogError):
    """An interaction references an item missing from the items file."""

    def __init__(self, item_id: str, user_id: Optional[str] = None):
        self.item_id = item_id
        message = f"Item '{item_id}' is referenced by interactions but not defined"
        if user_id:
            message += f" (user '{user_id}')"
        super().__init__(message, details={"item_id": item_id, "user_id": user_id})


class ItemNotFoundError(ItemRagError, KeyError):
    """Lookup of an unknown item."""

    def __init__(self, item_id: str, where: str = "store"):
        self.item_id = item_id
        super().__init__(
            f"Item '{item_id}' not found in {where}",
            status_code=404,
            details={"item_id": item_id},
        )

    def __str__(self) -> str:
        return ItemRagError.__str__(self)


# Co-purchase index

class SelfPairError(ItemRagError, ValueError):
    """Co-purchase frequency of an item with itself is undefined."""

    def __init__(self, item_id: str):
        super().__init__(
            f"Self co-purchase is undefined for item '{item_id}'",
            details={"item_id": item_id},
        )


class IndexIntegrityError(ItemRagError):
    """An index dump does not match its recorded hashes."""


# Embeddings

class EmbeddingLoadError(ItemRagError):
    """An embeddings file holds an invalid vector."""

    def __init__(self, message: str, item_id: Optional[str] = None):
        self.item_id = item_id
        details = {"item_id": item_id} if item_id else {}
        super().__init__(message, details=details)


class DimensionMismatchError(EmbeddingLoadError):
    """A vector does not have the store dimension."""

    def __init__(self, item_id: str, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Item '{item_id}' has dimension {actual}, expected {expected}",
            item_id=item_id,
        )


# LLM transport

class LlmError(ItemRagError):
    """Base class for LLM client failures."""


class TransportError(LlmError):
    """Request could not be completed; retryable."""


class NetworkError(TransportError):
    """Network/connectivity error."""

    def __init__(self, message: str = "Network error occurred"):
        super().__init__(message)


class RateLimitError(TransportError):
    """Rate limit exceeded."""

    def __init__(
        self,
        message: str = "Rate limit exceeded",
        retry_after: Optional[float] = None
    ):
        self.retry_after = retry_after
        details = {"retry_after": retry_after} if retry_after else {}
        super().__init__(message, status_code=429, details=details)


class ServerError(TransportError):
    """Server-side error."""

    def __init__(self, message: str = "Internal server error", status_code: int = 500):
        super().__init__(message, status_code=status_code)


class LlmTimeoutError(TransportError):
    """Request timeout error."""

    def __init__(self, message: str = "Request timed out"):
        super().__init__(message, status_code=408)


class AuthenticationError(LlmError):
    """Credential rejected by the endpoint. Never retried."""

    def __init__(
        self,
        endpoint: str,
        status_code: Optional[int] = 401,
        message: Optional[str] = None,
    ):
        self.endpoint = endpoint
        super().__init__(
            message or f"Authentication failed for endpoint {endpoint}",
            status_code=status_code,
            details={"endpoint": endpoint},
        )


class LlmProtocolError(LlmError):
    """Response body does not follow the chat-completions format."""


class ReplayMissError(LlmError):
    """A replay file has no recording for the request."""

    def __init__(self, request_hash: str):
        self.request_hash = request_hash
        super().__init__(
            f"No recorded response for request {request_hash}",
            details={"request_hash": request_hash},
        )


# Ranking

class ConfigurationError(ItemRagError):
    """Pipeline configuration cannot be honoured."""


class RankingParseError(ItemRagError):
    """LLM ranking could not be repaired into a permutation."""

    def __init__(self, raw_response: str, message: str = "Could not parse ranking"):
        self.raw_response = raw_response
        super().__init__(message, details={"raw_response": raw_response})


# Evaluation

class EvaluationProtocolError(ItemRagError):
    """The evaluation protocol cannot be applied to a user."""
