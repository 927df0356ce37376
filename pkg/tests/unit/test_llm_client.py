"""Testes unitários para os clientes LLM (live, mock e replay)."""

import asyncio
import json

import httpx
import pytest
import respx

from itemrag.core.client import ChatCompletionsClient, LlmClient
from itemrag.core.exceptions import (
    AuthenticationError,
    JsonlParseError,
    LlmError,
    LlmProtocolError,
    LlmTimeoutError,
    RateLimitError,
    ReplayMissError,
    ServerError,
)
from itemrag.core.mock import MockLlmClient
from itemrag.core.replay import RecordingLlmClient, ReplayLlmClient
from itemrag.models.llm import LlmResponse
from tests.fixtures.test_data import TestData


class TestChatCompletionsClient:
    """Testes para ChatCompletionsClient."""

    @respx.mock
    @pytest.mark.asyncio
    async def test_complete_success(self, chat_client, base_url, api_key, mock_api_responses):
        """Teste completação com sucesso."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(200, json=mock_api_responses["chat_completion_success"])
        )

        response = await chat_client.complete(chat_client.build_request("Rank these", system="sys"))

        assert response.text == "C, A, B, D, E, F, G, H, I, J"
        assert response.usage.prompt_tokens == 310
        assert response.usage.completion_tokens == 29
        assert route.call_count == 1
        request = route.calls.last.request
        assert request.headers["Authorization"] == f"Bearer {api_key}"
        body = json.loads(request.content)
        assert body == {
            "model": "gpt-4.1-mini",
            "messages": [{"role": "system", "content": "sys"}, {"role": "user", "content": "Rank these"}],
            "temperature": 0.0,
            "max_tokens": 512,
        }
        assert chat_client.calls == 1
        await chat_client.close()

    @respx.mock
    @pytest.mark.asyncio
    async def test_null_content_is_empty_text(self, chat_client, base_url):
        """Teste conteúdo nulo vira texto vazio."""
        respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(200, json=TestData.chat_completion(None))
        )

        response = await chat_client.complete(chat_client.build_request("hi"))

        assert response.text == ""

    @respx.mock
    @pytest.mark.asyncio
    async def test_missing_choices_is_protocol_error(self, chat_client, base_url, mock_api_responses):
        """Teste resposta sem choices."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(200, json=mock_api_responses["chat_completion_no_choices"])
        )

        with pytest.raises(LlmProtocolError):
            await chat_client.complete(chat_client.build_request("hi"))
        assert route.call_count == 1

    @respx.mock
    @pytest.mark.asyncio
    async def test_non_json_body_is_protocol_error(self, chat_client, base_url):
        """Teste corpo não JSON."""
        respx.post(f"{base_url}/chat/completions").mock(return_value=httpx.Response(200, text="<html>"))

        with pytest.raises(LlmProtocolError):
            await chat_client.complete(chat_client.build_request("hi"))

    @respx.mock
    @pytest.mark.asyncio
    async def test_unauthorized_not_retried(self, chat_client, base_url, sleeps, mock_api_responses):
        """Teste credencial inválida: erro com endpoint e sem retry."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(401, json=mock_api_responses["error_unauthorized"])
        )

        with pytest.raises(AuthenticationError) as exc_info:
            await chat_client.complete(chat_client.build_request("hi"))

        assert exc_info.value.endpoint == f"{base_url}/chat/completions"
        assert f"{base_url}/chat/completions" in str(exc_info.value)
        assert route.call_count == 1
        assert sleeps == []

    @respx.mock
    @pytest.mark.asyncio
    async def test_rate_limit_retried_until_exhausted(self, chat_client, base_url, sleeps, mock_api_responses):
        """Teste 429 repetido: 1 + max_retries tentativas."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(429, json=mock_api_responses["error_rate_limited"])
        )

        with pytest.raises(RateLimitError):
            await chat_client.complete(chat_client.build_request("hi"))

        assert route.call_count == 4
        assert chat_client.http.attempts == 4
        assert len(sleeps) == 3
        assert sleeps == sorted(sleeps)

    @respx.mock
    @pytest.mark.asyncio
    async def test_retry_after_honoured(self, chat_client, base_url, sleeps, mock_api_responses):
        """Teste cabeçalho Retry-After respeitado."""
        respx.post(f"{base_url}/chat/completions").mock(
            side_effect=[
                httpx.Response(429, headers={"Retry-After": "2"}, json=mock_api_responses["error_rate_limited"]),
                httpx.Response(200, json=mock_api_responses["chat_completion_summary"]),
            ]
        )

        response = await chat_client.complete(chat_client.build_request("hi"))

        assert response.text.startswith("Shoppers pair lipstick")
        assert sleeps == [2.0]

    @respx.mock
    @pytest.mark.asyncio
    async def test_server_error_then_success(self, chat_client, base_url, mock_api_responses):
        """Teste 5xx seguido de sucesso."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            side_effect=[
                httpx.Response(503, json=mock_api_responses["error_server"]),
                httpx.Response(500, json=mock_api_responses["error_server"]),
                httpx.Response(200, json=mock_api_responses["chat_completion_success"]),
            ]
        )

        response = await chat_client.complete(chat_client.build_request("hi"))

        assert response.text.startswith("C, A")
        assert route.call_count == 3

    @respx.mock
    @pytest.mark.asyncio
    async def test_server_error_surfaces(self, chat_client, base_url, mock_api_responses):
        """Teste 5xx persistente propagado."""
        respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(502, json=mock_api_responses["error_server"])
        )

        with pytest.raises(ServerError) as exc_info:
            await chat_client.complete(chat_client.build_request("hi"))
        assert exc_info.value.status_code == 502

    @respx.mock
    @pytest.mark.asyncio
    async def test_timeout_retried(self, chat_client, base_url):
        """Teste timeout tratado como erro de transporte."""
        route = respx.post(f"{base_url}/chat/completions").mock(side_effect=httpx.ReadTimeout("slow"))

        with pytest.raises(LlmTimeoutError):
            await chat_client.complete(chat_client.build_request("hi"))
        assert route.call_count == 4

    @respx.mock
    @pytest.mark.asyncio
    async def test_client_error_not_retried(self, chat_client, base_url):
        """Teste 400 não é repetido."""
        route = respx.post(f"{base_url}/chat/completions").mock(
            return_value=httpx.Response(400, json={"error": {"message": "bad request"}})
        )

        with pytest.raises(LlmError, match="bad request"):
            await chat_client.complete(chat_client.build_request("hi"))
        assert route.call_count == 1

    def test_missing_credential(self, base_url, monkeypatch):
        """Teste ausência de credencial nomeia o endpoint."""
        monkeypatch.delenv("ITEMRAG_API_KEY", raising=False)

        with pytest.raises(AuthenticationError, match="chat/completions"):
            ChatCompletionsClient(api_base=base_url)

    def test_credential_from_environment(self, base_url, monkeypatch):
        """Teste credencial lida do ambiente."""
        monkeypatch.setenv("ITEMRAG_API_KEY", "sk-env")

        client = ChatCompletionsClient(api_base=base_url)

        assert client.http._client.headers["Authorization"] == "Bearer sk-env"

    def test_from_settings(self, settings, monkeypatch):
        """Teste construção a partir das configurações."""
        monkeypatch.setenv("ITEMRAG_API_KEY", "sk-env")

        client = ChatCompletionsClient.from_settings(settings)

        assert client.model == settings.model
        assert client.max_concurrency == settings.max_concurrency

    @respx.mock
    @pytest.mark.asyncio
    async def test_embeddings_in_input_order(self, chat_client, base_url, mock_api_responses):
        """Teste embeddings reordenados pelo índice."""
        route = respx.post(f"{base_url}/embeddings").mock(
            return_value=httpx.Response(200, json=mock_api_responses["embeddings_success"])
        )

        vectors = await chat_client.embed(["first", "second"], model="text-embedding-3-small")

        assert vectors == [[1.0, 0.0], [0.0, 1.0]]
        assert json.loads(route.calls.last.request.content) == {
            "model": "text-embedding-3-small",
            "input": ["first", "second"],
        }

    @respx.mock
    @pytest.mark.asyncio
    async def test_embeddings_count_mismatch(self, chat_client, base_url, mock_api_responses):
        """Teste número de vetores diferente do de textos."""
        respx.post(f"{base_url}/embeddings").mock(
            return_value=httpx.Response(200, json=mock_api_responses["embeddings_success"])
        )

        with pytest.raises(LlmProtocolError):
            await chat_client.embed(["only one"])


class TestConcurrencyCap:
    """Testes para o limite de requisições simultâneas."""

    @pytest.mark.asyncio
    async def test_in_flight_never_exceeds_cap(self):
        """Teste no máximo max_concurrency requisições em voo."""

        class TrackingClient(LlmClient):
            def __init__(self):
                super().__init__(model="tracking", max_concurrency=2)
                self.in_flight = 0
                self.peak = 0

            async def _complete(self, req):
                self.in_flight += 1
                self.peak = max(self.peak, self.in_flight)
                await asyncio.sleep(0.001)
                self.in_flight -= 1
                return LlmResponse(text=req.user)

        client = TrackingClient()
        await asyncio.gather(*(client.complete(client.build_request(f"r{n}")) for n in range(10)))

        assert client.peak == 2
        assert client.calls == 10


class TestMockLlmClient:
    """Testes para MockLlmClient."""

    @pytest.mark.asyncio
    async def test_rule_uppercases(self):
        """Teste regra que devolve o texto em maiúsculas."""
        llm = MockLlmClient(rule=lambda req: req.user.upper())

        response = await llm.complete(llm.build_request("rank"))

        assert response.text == "RANK"

    @pytest.mark.asyncio
    async def test_identical_requests_identical_responses(self, mock_llm):
        """Teste determinismo byte a byte."""
        first = await mock_llm.complete(mock_llm.build_request("hello there"))
        second = await mock_llm.complete(mock_llm.build_request("hello there"))

        assert first.model_dump_json() == second.model_dump_json()
        assert first.usage.prompt_tokens == 2

    @pytest.mark.asyncio
    async def test_script_takes_precedence(self):
        """Teste tabela roteirizada tem prioridade."""
        llm = MockLlmClient(script={"q": "scripted"}, rule=lambda req: "rule")

        assert (await llm.complete(llm.build_request("q"))).text == "scripted"
        assert (await llm.complete(llm.build_request("other"))).text == "rule"

    @pytest.mark.asyncio
    async def test_from_script_file(self, tmp_path):
        """Teste carga de roteiro a partir de arquivo."""
        path = TestData.write_jsonl(tmp_path / "script.jsonl", [{"user": "ping", "text": "pong"}])

        llm = MockLlmClient.from_script(path)

        assert (await llm.complete(llm.build_request("ping"))).text == "pong"

    def test_bad_script_file(self, tmp_path):
        """Teste roteiro com campos inválidos."""
        path = TestData.write_jsonl(tmp_path / "script.jsonl", [{"user": "ping"}])

        with pytest.raises(JsonlParseError):
            MockLlmClient.from_script(path)

    @pytest.mark.asyncio
    async def test_embeddings_deterministic(self):
        """Teste embeddings do mock determinísticos e não nulos."""
        llm = MockLlmClient(embedding_dim=4)

        first = await llm.embed(["lipstick", "mascara"])
        second = await llm.embed(["lipstick"])

        assert first[0] == second[0]
        assert first[0] != first[1]
        assert all(len(v) == 4 and v[0] > 0 for v in first)


class TestReplay:
    """Testes para gravação e reprodução de transcrições."""

    @pytest.mark.asyncio
    async def test_record_then_replay(self, tmp_path):
        """Teste transcrição gravada e reproduzida offline."""
        path = tmp_path / "replay.jsonl"
        recorder = RecordingLlmClient(MockLlmClient(rule=lambda req: req.user[::-1]), path)
        recorded = await recorder.complete(recorder.build_request("abc"))

        replay = ReplayLlmClient(path, model="mock")
        replayed = await replay.complete(replay.build_request("abc"))

        assert recorded.text == "cba"
        assert replayed == recorded
        assert len(replay) == 1
        assert "sk-" not in path.read_text(encoding="utf-8")

    @pytest.mark.asyncio
    async def test_replay_miss(self, tmp_path):
        """Teste requisição sem gravação."""
        path = tmp_path / "replay.jsonl"
        recorder = RecordingLlmClient(MockLlmClient(), path)
        await recorder.complete(recorder.build_request("abc"))

        replay = ReplayLlmClient(path, model="mock")

        with pytest.raises(ReplayMissError):
            await replay.complete(replay.build_request("xyz"))

    def test_invalid_replay_record(self, tmp_path):
        """Teste registro de replay inválido."""
        path = TestData.write_jsonl(tmp_path / "replay.jsonl", [{"request_hash": "abc"}])

        with pytest.raises(JsonlParseError):
            ReplayLlmClient(path)
