"""Catalog ingestion, persistence and the leave-one-out split."""

from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import structlog
from pydantic import ValidationError as PydanticValidationError

from ..core.exceptions import CatalogParseError, ReferentialIntegrityError
from ..models.catalog import Catalog, EvalSplit, Item, PurchaseHistory
from ..utils.jsonl import read_jsonl, write_jsonl

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

# (timestamp, input line, item id); sorts into the history order.
_Event = Tuple[int, int, str]


def _require_str(record: Dict[str, Any], key: str, path: PathLike, line_number: int) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise CatalogParseError(path, line_number, f"field '{key}' must be a non-empty string")
    return value


def _load_items(path: PathLike) -> Dict[str, Item]:
    items: Dict[str, Item] = {}
    for line_number, record in read_jsonl(path, error_cls=CatalogParseError):
        item_id = _require_str(record, "item_id", path, line_number)
        try:
            item = Item(id=item_id, description=record.get("description", ""))
        except PydanticValidationError as e:
            raise CatalogParseError(path, line_number, e.errors()[0]["msg"]) from e
        if item_id in items:
            logger.warning("Duplicate item line, keeping the last", item_id=item_id, line=line_number)
        items[item_id] = item
    return items


def _load_events(path: PathLike, items: Dict[str, Item]) -> Dict[str, List[_Event]]:
    events: Dict[str, List[_Event]] = {}
    for line_number, record in read_jsonl(path, error_cls=CatalogParseError):
        user_id = _require_str(record, "user_id", path, line_number)
        item_id = _require_str(record, "item_id", path, line_number)
        timestamp = record.get("timestamp")
        if isinstance(timestamp, bool) or not isinstance(timestamp, int):
            raise CatalogParseError(path, line_number, "field 'timestamp' must be an integer")
        if item_id not in items:
            raise ReferentialIntegrityError(item_id, user_id)
        events.setdefault(user_id, []).append((timestamp, line_number, item_id))
    return events


def load_catalog(interactions_path: PathLike, items_path: PathLike) -> Catalog:
    """
    Load items and interactions from JSONL files.

    Histories are ordered by timestamp, then input line, then item id.
    Repeated purchases stay in the sequence.

    Args:
        interactions_path: ``{"user_id", "item_id", "timestamp"}`` lines
        items_path: ``{"item_id", "description"}`` lines

    Raises:
        CatalogParseError: If a line is malformed (names file and line)
        ReferentialIntegrityError: If an interaction names an unknown item
    """
    items = _load_items(items_path)
    events = _load_events(interactions_path, items)

    histories: Dict[str, PurchaseHistory] = {}
    for user_id in sorted(events):
        ordered = sorted(events[user_id])
        histories[user_id] = PurchaseHistory(
            user=user_id,
            sequence=[item_id for _, _, item_id in ordered],
            timestamps=[ts for ts, _, _ in ordered],
        )

    catalog = Catalog(items=items, histories=histories)
    logger.info(
        "Catalog loaded",
        items=len(catalog.items),
        users=len(catalog.histories),
        interactions=catalog.num_interactions,
    )
    return catalog


def save_catalog(catalog: Catalog, interactions_path: PathLike, items_path: PathLike) -> None:
    """Write a catalog back to the two JSONL input files."""
    write_jsonl(
        items_path,
        ({"item_id": item_id, "description": catalog.items[item_id].description} for item_id in sorted(catalog.items)),
    )

    def interactions():
        for user_id in sorted(catalog.histories):
            history = catalog.histories[user_id]
            timestamps = history.timestamps or list(range(len(history)))
            for item_id, ts in zip(history.sequence, timestamps):
                yield {"user_id": user_id, "item_id": item_id, "timestamp": ts}

    write_jsonl(interactions_path, interactions())
    logger.info("Catalog saved", interactions_path=str(interactions_path), items_path=str(items_path))


def leave_one_out(catalog: Catalog) -> EvalSplit:
    """Hold out each user's last purchase.

    Users with a single purchase are dropped from both train and targets.
    The item universe is kept whole.
    """
    histories: Dict[str, PurchaseHistory] = {}
    targets: Dict[str, str] = {}
    for user_id in sorted(catalog.histories):
        history = catalog.histories[user_id]
        if len(history) < 2:
            continue
        histories[user_id] = history.truncated()
        targets[user_id] = history.last_item

    dropped = len(catalog.histories) - len(targets)
    if dropped:
        logger.info("Users with a single purchase excluded from split", users=dropped)
    return EvalSplit(train=Catalog(items=catalog.items, histories=histories), targets=targets)


def k_core_filter(catalog: Catalog, min_user_interactions: int = 0, min_item_interactions: int = 0) -> Catalog:
    """
    Iteratively drop users and items below interaction thresholds.

    Both thresholds count interaction events. A threshold of 0 disables
    that side; with both at 0 the catalog is returned unchanged.
    """
    if min_user_interactions <= 0 and min_item_interactions <= 0:
        return catalog

    sequences = {user: list(h.sequence) for user, h in catalog.histories.items()}
    timestamps = {
        user: list(h.timestamps) if h.timestamps is not None else list(range(len(h)))
        for user, h in catalog.histories.items()
    }
    rounds = 0
    while True:
        rounds += 1
        changed = False
        item_counts = Counter(item for seq in sequences.values() for item in seq)
        if min_item_interactions > 0:
            for user in list(sequences):
                keep = [k for k, item in enumerate(sequences[user]) if item_counts[item] >= min_item_interactions]
                if len(keep) != len(sequences[user]):
                    sequences[user] = [sequences[user][k] for k in keep]
                    timestamps[user] = [timestamps[user][k] for k in keep]
                    changed = True
        for user in list(sequences):
            if len(sequences[user]) < max(min_user_interactions, 1):
                del sequences[user]
                del timestamps[user]
                changed = True
        if not changed:
            break

    item_counts = Counter(item for seq in sequences.values() for item in seq)
    items = catalog.items
    if min_item_interactions > 0:
        items = {item_id: item for item_id, item in items.items() if item_counts[item_id] >= min_item_interactions}
    histories = {
        user: PurchaseHistory(user=user, sequence=sequences[user], timestamps=timestamps[user])
        for user in sorted(sequences)
    }
    filtered = Catalog(items=items, histories=histories)
    logger.info(
        "k-core filter applied",
        min_user_interactions=min_user_interactions,
        min_item_interactions=min_item_interactions,
        rounds=rounds,
        users=len(filtered.histories),
        items=len(filtered.items),
    )
    return filtered
