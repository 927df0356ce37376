"""Endpoint paths of OpenAI-compatible APIs."""


class Endpoints:
    """Relative paths under the configured API base."""

    CHAT_COMPLETIONS = "/chat/completions"
    EMBEDDINGS = "/embeddings"


# Singleton instance
ENDPOINTS = Endpoints()
