"""Ranking prompt models."""

import string
from typing import Dict, List, Optional

from pydantic import Field, field_validator

from .base import BaseModel, ItemId, UserId

SUMMARY_SEPARATOR = " | Frequently co-purchased: "
LABELS = string.ascii_uppercase


class AugmentedItem(BaseModel):
    """An item description, optionally followed by its co-purchase summary."""

    item: ItemId
    base_description: str
    summary: Optional[str] = None

    @property
    def rendered(self) -> str:
        if self.summary and self.summary.strip():
            return f"{self.base_description}{SUMMARY_SEPARATOR}{self.summary}"
        return self.base_description

    def __str__(self) -> str:
        return self.rendered


class RankingTask(BaseModel):
    """Purchase history and candidates presented to the LLM for one user.

    ``history`` keeps chronological order; ``candidates`` keep the order the
    evaluation harness presented them in and are never re-sorted.
    """

    user: UserId
    history: List[AugmentedItem] = Field(default_factory=list)
    candidates: List[AugmentedItem] = Field(..., min_length=1)

    @field_validator("candidates")
    @classmethod
    def validate_candidates(cls, v: List[AugmentedItem]) -> List[AugmentedItem]:
        ids = [c.item for c in v]
        if len(set(ids)) != len(ids):
            raise ValueError("candidates must be distinct")
        return v

    @property
    def label_map(self) -> Dict[str, str]:
        """Candidate label (A, B, ...) to item id, in presented order."""
        return {LABELS[i]: c.item for i, c in enumerate(self.candidates[: len(LABELS)])}

    @property
    def candidate_ids(self) -> List[str]:
        return [c.item for c in self.candidates]


class RankedList(BaseModel):
    """Candidates ordered best first, plus the raw LLM answer for audit."""

    order: List[ItemId]
    raw_response: str = ""
    repaired: bool = False

    @field_validator("order")
    @classmethod
    def validate_order(cls, v: List[str]) -> List[str]:
        if len(set(v)) != len(v):
            raise ValueError("ranking must not repeat items")
        return v

    def rank_of(self, item_id: str) -> Optional[int]:
        """1-based position of an item, None when absent."""
        try:
            return self.order.index(item_id) + 1
        except ValueError:
            return None
