"""Leave-one-out ranking evaluation, metrics and the cold-start transform."""

import asyncio
import math
from pathlib import Path
from typing import Awaitable, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import structlog

from ..core.exceptions import EvaluationProtocolError, ItemRagError
from ..models.catalog import Catalog, EvalSplit, PurchaseHistory
from ..models.evaluation import HR_CUTOFFS, NDCG_CUTOFFS, CandidateSet, ColdStartSplit, EvalReport, UserOutcome
from ..models.ranking import RankedList
from ..utils.jsonl import write_jsonl
from ..utils.rng import derive_rng

logger = structlog.get_logger(__name__)

DEFAULT_NUM_CANDIDATES = 10

# (user, training history, candidates in presented order) -> ranking
RankingFunction = Callable[[str, Sequence[str], Sequence[str]], Awaitable[RankedList]]


def sample_candidates(
    split: EvalSplit, user: str, rng: np.random.Generator, num_candidates: int = DEFAULT_NUM_CANDIDATES
) -> CandidateSet:
    """
    Ground truth plus ``num_candidates - 1`` uniform negatives, shuffled.

    Negatives exclude the ground truth and the user's training history.

    Raises:
        EvaluationProtocolError: If the user has no target or too few
            eligible negatives exist
    """
    if user not in split.targets:
        raise EvaluationProtocolError(f"User '{user}' has no held-out target", details={"user": user})
    ground_truth = split.targets[user]
    history = set(split.history_of(user))

    eligible = sorted(item for item in split.train.items if item != ground_truth and item not in history)
    needed = num_candidates - 1
    if len(eligible) < needed:
        raise EvaluationProtocolError(
            f"User '{user}' has {len(eligible)} eligible negatives, {needed} needed",
            details={"user": user, "eligible": len(eligible)},
        )

    negatives = [eligible[k] for k in rng.choice(len(eligible), size=needed, replace=False)]
    candidates = [ground_truth, *negatives]
    presented = [candidates[k] for k in rng.permutation(len(candidates))]
    return CandidateSet(user=user, ground_truth=ground_truth, negatives=negatives, presented_order=presented)


def candidate_rng(seed: int, user: str) -> np.random.Generator:
    return derive_rng(seed, "candidates", user)


def hit_ratio_at_k(gt_rank: int, k: int) -> int:
    if gt_rank < 1:
        raise ValueError("gt_rank must be >= 1")
    return 1 if gt_rank <= k else 0


def ndcg_at_k(gt_rank: int, k: int) -> float:
    """Single-relevant-item NDCG: ``1 / log2(rank + 1)`` inside the cutoff."""
    if gt_rank < 1:
        raise ValueError("gt_rank must be >= 1")
    return 1.0 / math.log2(gt_rank + 1) if gt_rank <= k else 0.0


def aggregate(outcomes: Iterable[UserOutcome]) -> EvalReport:
    """Unweighted means over users, folded in UserId order."""
    ordered = sorted(outcomes, key=lambda o: o.user)
    n = len(ordered)
    hr = {k: (sum(hit_ratio_at_k(o.gt_rank, k) for o in ordered) / n if n else 0.0) for k in HR_CUTOFFS}
    ndcg = {k: (sum(ndcg_at_k(o.gt_rank, k) for o in ordered) / n if n else 0.0) for k in NDCG_CUTOFFS}
    return EvalReport(n_users=n, hr=hr, ndcg=ndcg, per_user=ordered)


async def evaluate(
    split: EvalSplit,
    pipeline: RankingFunction,
    user_sample: Sequence[str],
    seed: int = 0,
    num_candidates: int = DEFAULT_NUM_CANDIDATES,
    max_concurrency: int = 8,
) -> EvalReport:
    """
    Rank each sampled user's candidates and aggregate HR and NDCG.

    Candidate sets depend only on ``(seed, user)``. A user whose ranking
    raises (unparseable answer, LLM error or any other exception) is scored at rank
    ``num_candidates + 1`` and the run continues.

    Args:
        split: Leave-one-out (or cold-start) split
        pipeline: Ranking function under test
        user_sample: Users to evaluate, all present in ``split.targets``
        seed: Run seed
        num_candidates: Candidates per user, ground truth included
        max_concurrency: Users ranked at the same time

    Raises:
        EvaluationProtocolError: If a user has no target or too few negatives
    """
    missing = [u for u in user_sample if u not in split.targets]
    if missing:
        raise EvaluationProtocolError(
            f"{len(missing)} sampled users have no held-out target", details={"users": missing[:10]}
        )

    candidate_sets = {
        user: sample_candidates(split, user, candidate_rng(seed, user), num_candidates)
        for user in sorted(set(user_sample))
    }
    miss_rank = num_candidates + 1
    semaphore = asyncio.Semaphore(max_concurrency)

    async def run_user(candidates: CandidateSet) -> UserOutcome:
        async with semaphore:
            try:
                ranked = await pipeline(candidates.user, split.history_of(candidates.user), candidates.presented_order)
            except Exception as e:
                error = str(e) if isinstance(e, ItemRagError) else f"{type(e).__name__}: {e}"
                logger.warning(
                    "Ranking failed for user",
                    user=candidates.user,
                    error=error,
                    error_type=type(e).__name__,
                )
                raw = getattr(e, "raw_response", None)
                return UserOutcome(
                    user=candidates.user,
                    gt_rank=miss_rank,
                    raw_response=raw if isinstance(raw, str) else "",
                    error=error,
                )
        gt_rank = ranked.rank_of(candidates.ground_truth) or miss_rank
        return UserOutcome(
            user=candidates.user, gt_rank=gt_rank, order=ranked.order, raw_response=ranked.raw_response
        )

    outcomes = await asyncio.gather(*(run_user(c) for c in candidate_sets.values()))
    report = aggregate(outcomes)
    logger.info(
        "Evaluation finished",
        users=report.n_users,
        failures=len(report.failures),
        hr_1=report.hr.get(1),
        ndcg_5=report.ndcg.get(5),
    )
    return report


def make_cold_start(split: EvalSplit, users: Optional[Iterable[str]] = None) -> ColdStartSplit:
    """
    Remove target items, and every interaction with them, from training.

    Args:
        split: Leave-one-out split
        users: Users whose targets become cold; all targets by default

    Histories left empty are dropped from train; targets are unchanged and
    the item universe keeps the cold items.
    """
    selected = split.targets if users is None else {u: split.targets[u] for u in users if u in split.targets}
    cold = frozenset(selected.values())

    histories: Dict[str, PurchaseHistory] = {}
    removed = 0
    for user, history in split.train.histories.items():
        keep = [k for k, item in enumerate(history.sequence) if item not in cold]
        removed += len(history) - len(keep)
        if not keep:
            continue
        histories[user] = PurchaseHistory(
            user=user,
            sequence=[history.sequence[k] for k in keep],
            timestamps=[history.timestamps[k] for k in keep] if history.timestamps is not None else None,
        )

    logger.info(
        "Cold-start split built",
        cold_items=len(cold),
        interactions_removed=removed,
        users_dropped=len(split.train.histories) - len(histories),
    )
    return ColdStartSplit(
        train=Catalog(items=split.train.items, histories=histories),
        targets=split.targets,
        cold_items=cold,
    )


def sample_users(split: EvalSplit, n: int, seed: int = 0) -> List[str]:
    """``n`` users drawn without replacement from the split's targets, sorted."""
    users = sorted(split.targets)
    if n >= len(users):
        return users
    picks = derive_rng(seed, "users").choice(len(users), size=n, replace=False)
    return sorted(users[k] for k in picks)


def relative_change(baseline: EvalReport, other: EvalReport) -> Dict[str, Optional[float]]:
    """Per-metric change of ``other`` over ``baseline`` in percent.

    None where the baseline metric is 0.
    """
    changes: Dict[str, Optional[float]] = {}
    for name, base_values, other_values in (("hr", baseline.hr, other.hr), ("ndcg", baseline.ndcg, other.ndcg)):
        for k in sorted(base_values):
            base = base_values[k]
            changes[f"{name}@{k}"] = (other_values[k] - base) / base * 100 if base else None
    return changes


def write_ranking_dump(report: EvalReport, path: Union[str, Path]) -> None:
    write_jsonl(
        path,
        (
            {"user_id": o.user, "order": list(o.order), "gt_rank": o.gt_rank, "raw": o.raw_response}
            for o in report.per_user
        ),
    )
