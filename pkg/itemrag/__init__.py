"""
ItemRAG

Item-based retrieval-augmented generation for LLM sequential
recommendation: co-purchase retrieval, cached item summaries, ranking
prompts and a leave-one-out evaluation harness.
"""

from .config.settings import ItemRagSettings
from .core.client import ChatCompletionsClient, LlmClient
from .core.exceptions import (
    AuthenticationError,
    CatalogError,
    ConfigurationError,
    ItemNotFoundError,
    ItemRagError,
    LlmError,
    RankingParseError,
)
from .core.mock import MockLlmClient
from .models import (
    Catalog,
    CoPurchaseSummary,
    EvalReport,
    EvalSplit,
    Item,
    PurchaseHistory,
    RetrievalConfig,
    RetrievalResult,
)
from .services import (
    CoPurchaseIndex,
    EmbeddingStore,
    Method,
    RankingPipeline,
    RetrievalEngine,
    build_index,
    build_pipeline,
    evaluate,
    leave_one_out,
    load_catalog,
    load_embeddings,
    make_cold_start,
)

__version__ = "0.1.0"

__all__ = [
    # Clients
    "LlmClient",
    "ChatCompletionsClient",
    "MockLlmClient",

    # Exceptions
    "ItemRagError",
    "CatalogError",
    "ItemNotFoundError",
    "LlmError",
    "AuthenticationError",
    "ConfigurationError",
    "RankingParseError",

    # Models
    "Item",
    "PurchaseHistory",
    "Catalog",
    "EvalSplit",
    "RetrievalConfig",
    "RetrievalResult",
    "CoPurchaseSummary",
    "EvalReport",

    # Pipeline
    "load_catalog",
    "leave_one_out",
    "build_index",
    "CoPurchaseIndex",
    "load_embeddings",
    "EmbeddingStore",
    "RetrievalEngine",
    "Method",
    "RankingPipeline",
    "build_pipeline",
    "evaluate",
    "make_cold_start",

    # Configuration
    "ItemRagSettings",

    # Version info
    "__version__",
]
