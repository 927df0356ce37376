"""Configuração principal do pytest e fixtures compartilhadas."""

import json
from pathlib import Path
from typing import List

import pytest

from itemrag.config.settings import ItemRagSettings
from itemrag.core.client import ChatCompletionsClient
from itemrag.core.mock import MockLlmClient
from itemrag.services.catalog import leave_one_out
from tests.fixtures.test_data import TestData


@pytest.fixture
def api_key():
    """Test API key."""
    return "sk-test-api-key-12345"


@pytest.fixture
def base_url():
    """Test base URL."""
    return "https://llm.test.example/v1"


@pytest.fixture
def sleeps() -> List[float]:
    """Recorded backoff waits."""
    return []


@pytest.fixture
def fake_sleep(sleeps):
    """Sleep coroutine that records waits without waiting."""

    async def _sleep(seconds: float) -> None:
        sleeps.append(seconds)

    return _sleep


@pytest.fixture
def chat_client(api_key, base_url, fake_sleep):
    """ChatCompletionsClient pointed at the test endpoint."""
    return ChatCompletionsClient(
        api_base=base_url,
        api_key=api_key,
        model="gpt-4.1-mini",
        max_retries=3,
        sleep=fake_sleep,
    )


@pytest.fixture
def mock_llm():
    """Mock LLM with its default rules."""
    return MockLlmClient()


@pytest.fixture
def catalog():
    """Small beauty catalog."""
    return TestData.get_test_catalog()


@pytest.fixture
def split(catalog):
    """Leave-one-out split of the small catalog."""
    return leave_one_out(catalog)


@pytest.fixture
def settings(tmp_path, monkeypatch):
    """Settings isolated from the environment, writing under tmp_path."""
    for var in ("ITEMRAG_API_KEY", "ITEMRAG_API_BASE", "ITEMRAG_MODEL", "ITEMRAG_SEED"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.chdir(tmp_path)
    return ItemRagSettings(work_dir=tmp_path / "work")


@pytest.fixture
def mock_api_responses():
    """Mock API responses for the chat-completions endpoint."""
    path = Path(__file__).parent / "fixtures" / "api_responses.json"
    return json.loads(path.read_text(encoding="utf-8"))
