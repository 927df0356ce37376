"""Co-purchase summary model."""

from typing import List

from pydantic import Field

from .base import BaseModel, ItemId

EMPTY_SUMMARY = ""


class CoPurchaseSummary(BaseModel):
    """LLM summary of the items retrieved for one query item.

    Empty text is the sentinel for "nothing to add": no items were retrieved,
    or the LLM returned an empty completion. The recommender then renders the
    base description only.
    """

    item: ItemId
    text: str = EMPTY_SUMMARY
    source_items: List[ItemId] = Field(default_factory=list)
    config_hash: str = ""
    created_at: int = Field(0, ge=0, description="Epoch seconds")

    @property
    def is_empty(self) -> bool:
        return not self.text.strip()

    def __str__(self) -> str:
        preview = self.text[:60] + "..." if len(self.text) > 60 else self.text
        return f"[{self.item}] {preview}"
