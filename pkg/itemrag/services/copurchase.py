"""Item-item co-purchase counts over users' deduplicated purchase sets."""

import hashlib
import json
import warnings
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Set, Tuple, Union

import structlog

from ..core.exceptions import IndexIntegrityError, SelfPairError
from ..models.catalog import Catalog
from ..utils.hashing import stable_digest
from ..utils.jsonl import read_jsonl, write_jsonl

logger = structlog.get_logger(__name__)

INDEX_FORMAT = "itemrag-copurchase/1"
DEFAULT_PAIR_BUDGET = 50_000_000

Pair = Tuple[str, str]


def canonical_pair(i: str, j: str) -> Pair:
    return (i, j) if i < j else (j, i)


def catalog_digest(catalog: Catalog) -> str:
    """Digest of the histories an index is built from."""
    return stable_digest({user: list(h.sequence) for user, h in catalog.histories.items()})


class CoPurchaseIndex:
    """
    Symmetric co-purchase frequencies ``c_ij`` and neighbor sets ``N(i)``.

    Each unordered pair is stored once under its (min, max) key; only
    positive counts are stored and self-pairs never are. The index is
    immutable once built.
    """

    def __init__(self, counts: Mapping[Pair, int], n_users: int = 0, config_hash: str = ""):
        self._counts: Dict[Pair, int] = {}
        self._neighbors: Dict[str, Set[str]] = {}
        for (i, j), c in counts.items():
            if i == j:
                raise SelfPairError(i)
            if c < 1:
                continue
            self._counts[canonical_pair(i, j)] = int(c)
            self._neighbors.setdefault(i, set()).add(j)
            self._neighbors.setdefault(j, set()).add(i)
        self.n_users = n_users
        self.config_hash = config_hash

    def __len__(self) -> int:
        return len(self._counts)

    def __repr__(self) -> str:
        return f"CoPurchaseIndex(pairs={len(self._counts)}, items={len(self._neighbors)}, users={self.n_users})"

    def neighbors(self, i: str) -> FrozenSet[str]:
        """Items co-purchased with ``i``; empty for unknown or cold items."""
        return frozenset(self._neighbors.get(i, ()))

    def cofreq(self, i: str, j: str) -> int:
        if i == j:
            raise SelfPairError(i)
        return self._counts.get(canonical_pair(i, j), 0)

    def items(self) -> FrozenSet[str]:
        """Items with at least one co-purchase."""
        return frozenset(self._neighbors)

    def pairs(self) -> Iterator[Tuple[str, str, int]]:
        """Stored ``(i, j, c)`` with ``i < j``, sorted."""
        for i, j in sorted(self._counts):
            yield i, j, self._counts[(i, j)]

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        for triple in self.pairs():
            digest.update(json.dumps(list(triple), ensure_ascii=False).encode("utf-8"))
            digest.update(b"\n")
        return digest.hexdigest()[:16]


def neighbors(index: CoPurchaseIndex, i: str) -> FrozenSet[str]:
    return index.neighbors(i)


def cofreq(index: CoPurchaseIndex, i: str, j: str) -> int:
    return index.cofreq(i, j)


def build_index(train: Catalog, pair_budget: int = DEFAULT_PAIR_BUDGET) -> CoPurchaseIndex:
    """
    Count, for every unordered item pair, the users whose purchase set holds both.

    Args:
        train: Training catalog (never the held-out targets)
        pair_budget: Threshold on the sum of squared purchase-set sizes
            above which a ``ResourceWarning`` is emitted

    Returns:
        The co-purchase index, tagged with the digest of ``train``
    """
    purchase_sets = [sorted(h.item_set) for _, h in sorted(train.histories.items())]
    if not purchase_sets:
        logger.warning("Building co-purchase index from an empty training set")

    work = sum(len(s) ** 2 for s in purchase_sets)
    if work > pair_budget:
        logger.warning("Co-purchase build exceeds pair budget", work=work, pair_budget=pair_budget)
        warnings.warn(
            f"co-purchase build enumerates {work} pairs (budget {pair_budget})",
            ResourceWarning,
            stacklevel=2,
        )

    counts: Counter = Counter()
    for items in purchase_sets:
        counts.update(combinations(items, 2))

    index = CoPurchaseIndex(counts, n_users=len(purchase_sets), config_hash=catalog_digest(train))
    logger.info("Co-purchase index built", pairs=len(index), items=len(index.items()), users=index.n_users)
    return index


def dump_index(index: CoPurchaseIndex, path: Union[str, Path]) -> str:
    """Write the index as JSONL with a hash header. Returns the content hash."""
    content_hash = index.content_hash()
    header = {
        "format": INDEX_FORMAT,
        "config_hash": index.config_hash,
        "content_hash": content_hash,
        "n_users": index.n_users,
    }

    def records():
        yield header
        for i, j, c in index.pairs():
            yield {"i": i, "j": j, "c": c}

    write_jsonl(path, records())
    logger.info("Co-purchase index written", path=str(path), pairs=len(index), content_hash=content_hash)
    return content_hash


def load_index(path: Union[str, Path], expected_config_hash: Optional[str] = None) -> CoPurchaseIndex:
    """
    Read an index dump and verify its hashes.

    Raises:
        IndexIntegrityError: If the header is missing, a pair is invalid, the
            recomputed content hash differs, or the config hash is not the
            expected one
    """
    header: Optional[Dict] = None
    counts: Dict[Pair, int] = {}
    for line_number, record in read_jsonl(path):
        if header is None:
            if record.get("format") != INDEX_FORMAT:
                raise IndexIntegrityError(f"{path}: not a co-purchase index dump")
            header = record
            continue
        i, j, c = record.get("i"), record.get("j"), record.get("c")
        if not isinstance(i, str) or not isinstance(j, str) or not i < j:
            raise IndexIntegrityError(f"{path}:{line_number}: pair keys must satisfy i < j")
        if isinstance(c, bool) or not isinstance(c, int) or c < 1:
            raise IndexIntegrityError(f"{path}:{line_number}: count must be a positive integer")
        counts[(i, j)] = c

    if header is None:
        raise IndexIntegrityError(f"{path}: empty index dump")

    index = CoPurchaseIndex(counts, n_users=int(header.get("n_users", 0)), config_hash=header.get("config_hash", ""))
    if index.content_hash() != header.get("content_hash"):
        raise IndexIntegrityError(
            f"{path}: content hash mismatch",
            details={"expected": header.get("content_hash"), "actual": index.content_hash()},
        )
    if expected_config_hash is not None and index.config_hash != expected_config_hash:
        raise IndexIntegrityError(
            f"{path}: index was built from different training data",
            details={"expected": expected_config_hash, "actual": index.config_hash},
        )
    logger.info("Co-purchase index loaded", path=str(path), pairs=len(index))
    return index
