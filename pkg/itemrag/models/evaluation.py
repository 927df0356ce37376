"""Evaluation protocol models."""

from typing import Any, Dict, FrozenSet, List, Optional

from pydantic import Field, model_validator

from .base import BaseModel, ItemId, UserId
from .catalog import EvalSplit

HR_CUTOFFS = (1, 3, 5)
NDCG_CUTOFFS = (3, 5)


class CandidateSet(BaseModel):
    """Ground truth plus sampled negatives, in presentation order."""

    user: UserId
    ground_truth: ItemId
    negatives: List[ItemId]
    presented_order: List[ItemId]

    @model_validator(mode="after")
    def validate_candidates(self) -> "CandidateSet":
        if len(set(self.negatives)) != len(self.negatives):
            raise ValueError("negatives must be distinct")
        if self.ground_truth in self.negatives:
            raise ValueError("negatives must exclude the ground truth")
        if sorted(self.presented_order) != sorted([self.ground_truth, *self.negatives]):
            raise ValueError("presented_order must be a permutation of candidates")
        return self


class UserOutcome(BaseModel):
    """Rank of the ground truth for one evaluated user."""

    user: UserId
    gt_rank: int = Field(..., ge=1)
    order: List[ItemId] = Field(default_factory=list)
    raw_response: str = ""
    error: Optional[str] = None


class EvalReport(BaseModel):
    """Hit-Ratio and NDCG averaged over users, as fractions in [0, 1]."""

    n_users: int = Field(..., ge=0)
    hr: Dict[int, float]
    ndcg: Dict[int, float]
    per_user: List[UserOutcome] = Field(default_factory=list)

    @property
    def failures(self) -> List[UserOutcome]:
        return [o for o in self.per_user if o.error is not None]

    def to_presentation(
        self, config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None
    ) -> Dict[str, Any]:
        """Report JSON with metrics ×100 rounded to one decimal."""
        report: Dict[str, Any] = {
            "n_users": self.n_users,
            "hr": {str(k): round(v * 100, 1) for k, v in sorted(self.hr.items())},
            "ndcg": {str(k): round(v * 100, 1) for k, v in sorted(self.ndcg.items())},
        }
        if config is not None:
            report["config"] = config
        if seed is not None:
            report["seed"] = seed
        return report


class ColdStartSplit(EvalSplit):
    """Split whose target items have no training interactions left."""

    cold_items: FrozenSet[ItemId] = Field(default_factory=frozenset)
