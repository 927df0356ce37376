"""Stable content hashes for configs, requests and dumps."""

import hashlib
import json
from typing import Any


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_digest(data: Any, length: int = 16) -> str:
    """Hex digest of the canonical JSON form of ``data``.

    Independent of dict ordering and of the interpreter's hash seed.
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:length]


def stable_int(text: str) -> int:
    """64-bit unsigned integer derived from a string."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
