"""Deterministic mock LLM client."""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import structlog

from .client import LlmClient
from .exceptions import JsonlParseError
from ..models.llm import LlmRequest, LlmResponse, Usage
from ..models.ranking import SUMMARY_SEPARATOR
from ..prompts import CANDIDATE_LINE, SUMMARY_ITEM_LINE, is_ranking_prompt, is_summary_prompt
from ..utils.jsonl import read_jsonl
from ..utils.rng import derive_rng

logger = structlog.get_logger(__name__)

Rule = Callable[[LlmRequest], str]
OracleKey = Callable[[str], Any]


def echo_ranking(prompt: str) -> str:
    """Candidate labels in presented order."""
    return ", ".join(label for label, _ in CANDIDATE_LINE.findall(prompt))


def echo_summary(prompt: str, limit: int = 3) -> str:
    """Summary naming the first ``limit`` listed co-purchased items."""
    titles = SUMMARY_ITEM_LINE.findall(prompt)[:limit]
    return "Often bought with: " + "; ".join(titles) if titles else ""


def default_rule(req: LlmRequest) -> str:
    if is_ranking_prompt(req.user):
        return echo_ranking(req.user)
    if is_summary_prompt(req.user):
        return echo_summary(req.user)
    return req.user


class MockLlmClient(LlmClient):
    """
    Offline client whose output is a pure function of the request.

    Resolution order for each request:
        1. ``script``: exact match on the user prompt.
        2. ``oracle_key``: for ranking prompts, order candidates by
           ``oracle_key(base description)`` ascending (ties keep presented
           order); appended summaries are stripped before the key is applied.
        3. ``rule``: any callable of the request.
        4. ``default_rule``: ranking prompts echo the presented labels,
           summary prompts name the first three items, anything else echoes.
    """

    def __init__(
        self,
        script: Optional[Dict[str, str]] = None,
        rule: Optional[Rule] = None,
        oracle_key: Optional[OracleKey] = None,
        model: str = "mock",
        embedding_dim: int = 8,
        max_concurrency: int = 64,
    ):
        super().__init__(model=model, max_concurrency=max_concurrency)
        self.script = dict(script or {})
        self.rule = rule
        self.oracle_key = oracle_key
        self.embedding_dim = embedding_dim
        self.requests: List[LlmRequest] = []

    @classmethod
    def from_script(cls, path: Union[str, Path], **kwargs: Any) -> "MockLlmClient":
        """Load a script file of ``{"user": str, "text": str}`` lines."""
        script: Dict[str, str] = {}
        for line_number, record in read_jsonl(path):
            if not isinstance(record.get("user"), str) or not isinstance(record.get("text"), str):
                raise JsonlParseError(path, line_number, "expected string fields 'user' and 'text'")
            script[record["user"]] = record["text"]
        logger.info("Mock LLM script loaded", path=str(path), entries=len(script))
        return cls(script=script, **kwargs)

    def _oracle_ranking(self, prompt: str) -> str:
        assert self.oracle_key is not None
        oracle_key = self.oracle_key
        candidates = CANDIDATE_LINE.findall(prompt)
        keyed = [
            (oracle_key(text.split(SUMMARY_SEPARATOR)[0]), position, label)
            for position, (label, text) in enumerate(candidates)
        ]
        return ", ".join(label for _, _, label in sorted(keyed))

    def respond(self, req: LlmRequest) -> str:
        if req.user in self.script:
            return self.script[req.user]
        if self.oracle_key is not None and is_ranking_prompt(req.user):
            return self._oracle_ranking(req.user)
        if self.rule is not None:
            return self.rule(req)
        return default_rule(req)

    async def _complete(self, req: LlmRequest) -> LlmResponse:
        self.requests.append(req)
        text = self.respond(req)
        usage = Usage(
            prompt_tokens=len(req.system.split()) + len(req.user.split()),
            completion_tokens=len(text.split()),
        )
        return LlmResponse(text=text, usage=usage, latency_ms=0)

    async def embed(self, texts: Sequence[str], model: Optional[str] = None) -> List[List[float]]:
        """Pseudo-embeddings seeded by each text; never all-zero."""
        vectors = []
        for text in texts:
            vector = derive_rng(0, "mock-embedding", text).standard_normal(self.embedding_dim)
            vector[0] = abs(vector[0]) + 1e-3
            vectors.append([float(x) for x in np.round(vector, 6)])
        return vectors
