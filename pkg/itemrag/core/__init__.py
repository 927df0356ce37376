"""Core client functionality."""

from .client import ChatCompletionsClient, LlmClient
from .exceptions import (
    AuthenticationError,
    CatalogError,
    ConfigurationError,
    EvaluationProtocolError,
    ItemNotFoundError,
    ItemRagError,
    LlmError,
    RankingParseError,
    RateLimitError,
    TransportError,
)
from .mock import MockLlmClient
from .replay import RecordingLlmClient, ReplayLlmClient

__all__ = [
    "LlmClient",
    "ChatCompletionsClient",
    "MockLlmClient",
    "RecordingLlmClient",
    "ReplayLlmClient",
    "ItemRagError",
    "CatalogError",
    "ItemNotFoundError",
    "LlmError",
    "TransportError",
    "RateLimitError",
    "AuthenticationError",
    "ConfigurationError",
    "RankingParseError",
    "EvaluationProtocolError",
]
