"""LLM request/response models."""

from typing import Any, Dict, List

from pydantic import Field, field_validator

from .base import BaseModel


class LlmRequest(BaseModel):
    """A single chat-completion request."""

    system: str = Field("", description="System prompt")
    user: str = Field(..., description="User prompt")
    temperature: float = Field(0.0, ge=0.0)
    max_tokens: int = Field(512, gt=0)
    model: str = Field(..., description="Model name")

    @field_validator("user")
    @classmethod
    def validate_user(cls, v: str) -> str:
        if not v or not v.strip():
            raise ValueError("User prompt cannot be empty")
        return v

    def messages(self) -> List[Dict[str, str]]:
        messages = []
        if self.system:
            messages.append({"role": "system", "content": self.system})
        messages.append({"role": "user", "content": self.user})
        return messages

    def to_payload(self) -> Dict[str, Any]:
        """Chat-completions request body."""
        return {
            "model": self.model,
            "messages": self.messages(),
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

    def request_hash(self) -> str:
        from ..utils.hashing import stable_digest

        return stable_digest(self.model_dump(mode="json"))


class Usage(BaseModel):
    prompt_tokens: int = Field(0, ge=0)
    completion_tokens: int = Field(0, ge=0)


class LlmResponse(BaseModel):
    """Completion text with token usage and latency."""

    text: str
    usage: Usage = Field(default_factory=Usage)
    latency_ms: int = Field(0, ge=0)

    def __str__(self) -> str:
        preview = self.text[:50] + "..." if len(self.text) > 50 else self.text
        return f"LlmResponse({preview!r}, {self.latency_ms}ms)"
