"""Data models for ItemRAG."""

from .base import BaseModel, ItemId, UserId
from .catalog import Catalog, EvalSplit, Item, PurchaseHistory
from .evaluation import CandidateSet, ColdStartSplit, EvalReport, UserOutcome
from .llm import LlmRequest, LlmResponse, Usage
from .ranking import AugmentedItem, RankedList, RankingTask
from .retrieval import RetrievalConfig, RetrievalResult, SampledItem, SimilarSet
from .summary import CoPurchaseSummary

__all__ = [
    "BaseModel",
    "ItemId",
    "UserId",
    "Item",
    "PurchaseHistory",
    "Catalog",
    "EvalSplit",
    "RetrievalConfig",
    "SimilarSet",
    "SampledItem",
    "RetrievalResult",
    "CoPurchaseSummary",
    "LlmRequest",
    "LlmResponse",
    "Usage",
    "AugmentedItem",
    "RankingTask",
    "RankedList",
    "CandidateSet",
    "UserOutcome",
    "EvalReport",
    "ColdStartSplit",
]
