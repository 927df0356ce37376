"""Retrieval models: configuration, similar-item sets and sampled results."""

from typing import List, Tuple

from pydantic import Field, model_validator

from .base import BaseModel, ItemId


class RetrievalConfig(BaseModel):
    """Retrieval knobs.

    ``use_sim_items=False`` restricts the pool to the item's own co-purchases;
    ``use_cofreq_weights=False`` replaces frequency weights with uniform
    sampling.
    """

    k: int = Field(5, ge=0, description="Number of text-similar items per query item")
    n: int = Field(50, ge=1, description="Number of items sampled from the pool")
    use_sim_items: bool = True
    use_cofreq_weights: bool = True
    rng_seed: int = Field(0, ge=0, lt=2**64)

    def config_hash(self) -> str:
        from ..utils.hashing import stable_digest

        return stable_digest(self.model_dump(mode="json"))


class SimilarSet(BaseModel):
    """Top-K text-similar items of a query item, most similar first."""

    query: ItemId
    members: List[Tuple[ItemId, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_members(self) -> "SimilarSet":
        ids = [item_id for item_id, _ in self.members]
        if self.query in ids:
            raise ValueError("query item cannot be similar to itself")
        if len(set(ids)) != len(ids):
            raise ValueError("similar items must be distinct")
        scores = [score for _, score in self.members]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("similarity scores must be non-increasing")
        return self

    def __len__(self) -> int:
        return len(self.members)

    @property
    def item_ids(self) -> List[str]:
        return [item_id for item_id, _ in self.members]

    @classmethod
    def empty(cls, query: str) -> "SimilarSet":
        return cls(query=query, members=[])


class SampledItem(BaseModel):
    """One retrieved item with the weight it was sampled under."""

    item: ItemId
    w: float = Field(..., ge=0.0)


class RetrievalResult(BaseModel):
    """Items retrieved for a query item."""

    query: ItemId
    pool_size: int = Field(..., ge=0)
    sampled: List[SampledItem] = Field(default_factory=list)
    seed: int = 0
    config_hash: str = ""

    @model_validator(mode="after")
    def validate_sampled(self) -> "RetrievalResult":
        ids = self.item_ids
        if len(set(ids)) != len(ids):
            raise ValueError("sampled items must be distinct")
        if self.query in ids:
            raise ValueError("query item cannot retrieve itself")
        if len(ids) > self.pool_size:
            raise ValueError("cannot sample more items than the pool holds")
        return self

    @property
    def item_ids(self) -> List[str]:
        return [s.item for s in self.sampled]

    @property
    def is_empty(self) -> bool:
        return not self.sampled
