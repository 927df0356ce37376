"""Configuration module for ItemRAG."""

from .settings import ItemRagSettings
from .endpoints import ENDPOINTS

__all__ = ["ItemRagSettings", "ENDPOINTS"]
