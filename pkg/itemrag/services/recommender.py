"""Ranking prompt assembly, LLM ranking and tolerant answer parsing."""

import re
from typing import List, Optional, Sequence, Tuple

import structlog

from ..core.client import LlmClient
from ..core.exceptions import ConfigurationError, RankingParseError
from ..models.catalog import Item
from ..models.ranking import LABELS, AugmentedItem, RankedList, RankingTask
from ..models.summary import CoPurchaseSummary
from ..prompts import render_ranking_prompt

logger = structlog.get_logger(__name__)

DEFAULT_HISTORY_LIMIT = 30

_SEPARATORS = re.compile(r"[\s,;]+")
_TOKEN_PUNCTUATION = "()[].:'\"`*"
_STANDALONE_LETTER = re.compile(r"(?<![A-Za-z'’])([A-Z])(?![A-Za-z'’])")
# "A good pick", "I would": the letter is an English word, not a label.
_WORD_LETTERS = frozenset("AI")
_FOLLOWED_BY_WORD = re.compile(r"\s+[a-z]")


def _label_runs(raw: str, valid: str) -> List[List[str]]:
    """Runs of two or more labels joined by commas, semicolons, '>' or spaces."""
    if not valid:
        return []
    label = f"[{re.escape(valid)}](?![A-Za-z'’])"
    run = re.compile(rf"(?<![A-Za-z'’]){label}(?:(?:\s*[,;>]\s*|\s+){label})+")
    return [re.findall(f"[{re.escape(valid)}]", m.group()) for m in run.finditer(raw)]


def _standalone_labels(raw: str, valid: str) -> List[str]:
    found = []
    for m in _STANDALONE_LETTER.finditer(raw):
        letter = m.group(1)
        if letter not in valid:
            continue
        if letter in _WORD_LETTERS and _FOLLOWED_BY_WORD.match(raw, m.end()):
            continue
        found.append(letter)
    return found


def augment(item: Item, summary: Optional[CoPurchaseSummary] = None) -> AugmentedItem:
    """Item description, with the co-purchase summary appended when present."""
    text = summary.text if summary is not None and not summary.is_empty else None
    return AugmentedItem(item=item.id, base_description=item.description, summary=text)


def make_ranking_task(
    user: str,
    history: Sequence[AugmentedItem],
    candidates: Sequence[AugmentedItem],
    history_limit: int = DEFAULT_HISTORY_LIMIT,
) -> RankingTask:
    """Task with the ``history_limit`` most recent purchases, oldest first."""
    recent = list(history)[-history_limit:] if history_limit > 0 else []
    return RankingTask(user=user, history=recent, candidates=list(candidates))


def build_ranking_prompt(task: RankingTask) -> str:
    """
    Render the ranking prompt.

    Candidates keep the order they were given in and are labeled A, B, ...

    Raises:
        ConfigurationError: If there are more candidates than labels
    """
    if len(task.candidates) > len(LABELS):
        raise ConfigurationError(
            f"{len(task.candidates)} candidates exceed the {len(LABELS)}-label alphabet",
            details={"candidates": len(task.candidates)},
        )
    return render_ranking_prompt(
        [h.rendered for h in task.history],
        [c.rendered for c in task.candidates],
        LABELS,
    )


def _dedupe(labels: Sequence[str]) -> List[str]:
    seen: List[str] = []
    for label in labels:
        if label not in seen:
            seen.append(label)
    return seen


def parse_ranking(raw: str, count: int) -> Tuple[List[str], bool]:
    """
    Parse an answer into a full ordering of the first ``count`` labels.

    Tries, in order: comma-separated labels; whitespace-separated labels;
    the longest run of labels embedded in prose; standalone label letters in
    order of first appearance, skipping "A" and "I" used as words. Duplicates keep
    their first occurrence and missing labels are appended in presented
    order.

    Returns:
        The label ordering and whether any repair was needed

    Raises:
        RankingParseError: If no label can be found at all
    """
    valid = LABELS[:count]

    strict = [token.strip() for token in raw.strip().split(",")]
    if len(strict) == count and sorted(strict) == sorted(valid):
        return strict, False

    tokens = [t.strip(_TOKEN_PUNCTUATION) for t in _SEPARATORS.split(raw.strip()) if t]
    tokens = [t for t in tokens if t]
    if tokens and all(t in valid for t in tokens):
        found = _dedupe(tokens)
    else:
        runs = _label_runs(raw, valid)
        if runs:
            found = _dedupe(max(runs, key=len))
        else:
            found = _dedupe(_standalone_labels(raw, valid))

    if not found:
        raise RankingParseError(raw, f"No candidate labels found among {count} candidates")

    order = found + [label for label in valid if label not in found]
    return order, True


async def rank(task: RankingTask, llm: LlmClient) -> RankedList:
    """
    One LLM call ranking all candidates of ``task``.

    Raises:
        RankingParseError: If the answer contains no usable labels
    """
    prompt = build_ranking_prompt(task)
    response = await llm.complete(llm.build_request(prompt))

    labels, repaired = parse_ranking(response.text, len(task.candidates))
    if repaired:
        logger.warning("Ranking answer repaired", user=task.user, raw=response.text[:200])

    label_map = task.label_map
    return RankedList(
        order=[label_map[label] for label in labels],
        raw_response=response.text,
        repaired=repaired,
    )
