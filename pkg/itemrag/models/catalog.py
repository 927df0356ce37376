"""Catalog models: items, purchase histories and the leave-one-out split."""

from typing import Dict, List, Optional

from pydantic import Field, field_validator, model_validator

from .base import BaseModel, ItemId, UserId


class Item(BaseModel):
    """An item with its text description (e.g. title)."""

    id: ItemId = Field(..., description="Unique item identifier")
    description: str = Field(..., description="Item text description")

    @field_validator("description")
    @classmethod
    def validate_description(cls, v: str) -> str:
        if not v or not v.strip():
            raise ValueError("Item description cannot be empty")
        return v

    def __str__(self) -> str:
        return f"{self.id}: {self.description}"


class PurchaseHistory(BaseModel):
    """A user's purchases in ascending timestamp order."""

    user: UserId = Field(..., description="User identifier")
    sequence: List[ItemId] = Field(..., min_length=1, description="Purchased items, oldest first")
    timestamps: Optional[List[int]] = Field(None, description="Epoch seconds, parallel to sequence")

    @model_validator(mode="after")
    def validate_timestamps(self) -> "PurchaseHistory":
        if self.timestamps is not None and len(self.timestamps) != len(self.sequence):
            raise ValueError("timestamps must be parallel to sequence")
        return self

    def __len__(self) -> int:
        return len(self.sequence)

    @property
    def item_set(self) -> frozenset:
        """Distinct items purchased by the user."""
        return frozenset(self.sequence)

    @property
    def last_item(self) -> str:
        return self.sequence[-1]

    def truncated(self) -> "PurchaseHistory":
        """History without its last purchase."""
        return PurchaseHistory(
            user=self.user,
            sequence=self.sequence[:-1],
            timestamps=self.timestamps[:-1] if self.timestamps is not None else None,
        )


class Catalog(BaseModel):
    """Items plus users' purchase histories."""

    items: Dict[ItemId, Item] = Field(default_factory=dict)
    histories: Dict[UserId, PurchaseHistory] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_references(self) -> "Catalog":
        for user, history in self.histories.items():
            if history.user != user:
                raise ValueError(f"History keyed by '{user}' belongs to '{history.user}'")
            for item_id in history.sequence:
                if item_id not in self.items:
                    raise ValueError(f"Item '{item_id}' of user '{user}' not in catalog")
        return self

    def __str__(self) -> str:
        return f"Catalog({len(self.items)} items, {len(self.histories)} users)"

    @property
    def num_interactions(self) -> int:
        return sum(len(h) for h in self.histories.values())

    def item(self, item_id: str) -> Item:
        from ..core.exceptions import ItemNotFoundError

        try:
            return self.items[item_id]
        except KeyError:
            raise ItemNotFoundError(item_id, where="catalog") from None

    def sorted_item_ids(self) -> List[str]:
        return sorted(self.items)


class EvalSplit(BaseModel):
    """Leave-one-out split: truncated training histories and held-out targets."""

    train: Catalog
    targets: Dict[UserId, ItemId] = Field(default_factory=dict)

    def history_of(self, user: str) -> List[str]:
        history = self.train.histories.get(user)
        return list(history.sequence) if history else []
