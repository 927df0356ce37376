"""Utility functions and classes."""

from .cache import SummaryCache
from .hashing import stable_digest
from .logging import configure_logging
from .retry import retry_policy
from .rng import derive_rng

__all__ = [
    "SummaryCache",
    "stable_digest",
    "configure_logging",
    "retry_policy",
    "derive_rng",
]
