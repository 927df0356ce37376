"""Testes unitários para os modelos Pydantic."""

import pytest
from pydantic import ValidationError

from itemrag.models import (
    AugmentedItem,
    CandidateSet,
    EvalReport,
    LlmRequest,
    PurchaseHistory,
    RankedList,
    RankingTask,
    RetrievalConfig,
    RetrievalResult,
    SampledItem,
    SimilarSet,
    UserOutcome,
)
from tests.fixtures.test_data import TestData


class TestItemModels:
    """Testes para Item e PurchaseHistory."""

    def test_item_is_immutable(self):
        """Teste item imutável."""
        item = TestData.get_test_item()

        with pytest.raises(ValidationError):
            item.description = "changed"

    def test_history_helpers(self):
        """Teste auxiliares do histórico."""
        history = PurchaseHistory(user="u1", sequence=["A", "B", "A"], timestamps=[1, 2, 3])

        assert len(history) == 3
        assert history.item_set == {"A", "B"}
        assert history.last_item == "A"
        assert history.truncated().sequence == ["A", "B"]
        assert history.truncated().timestamps == [1, 2]

    def test_timestamps_must_be_parallel(self):
        """Teste timestamps paralelos à sequência."""
        with pytest.raises(ValidationError):
            PurchaseHistory(user="u1", sequence=["A", "B"], timestamps=[1])

    def test_empty_ids_rejected(self):
        """Teste identificadores vazios."""
        with pytest.raises(ValidationError):
            PurchaseHistory(user="", sequence=["A"])


class TestRetrievalModels:
    """Testes para SimilarSet e RetrievalResult."""

    def test_similar_set_excludes_query(self):
        """Teste conjunto similar sem o próprio item."""
        with pytest.raises(ValidationError):
            SimilarSet(query="A", members=[("A", 1.0)])

    def test_similar_set_ordered(self):
        """Teste escores em ordem não crescente."""
        with pytest.raises(ValidationError):
            SimilarSet(query="A", members=[("B", 0.1), ("C", 0.9)])

    def test_result_distinct_and_bounded(self):
        """Teste resultado com itens distintos e limitado ao pool."""
        with pytest.raises(ValidationError):
            RetrievalResult(query="A", pool_size=2, sampled=[SampledItem(item="B", w=1), SampledItem(item="B", w=1)])
        with pytest.raises(ValidationError):
            RetrievalResult(query="A", pool_size=0, sampled=[SampledItem(item="B", w=1)])

    def test_negative_weight_rejected(self):
        """Teste peso negativo."""
        with pytest.raises(ValidationError):
            SampledItem(item="B", w=-1.0)

    def test_config_bounds(self):
        """Teste limites da configuração."""
        with pytest.raises(ValidationError):
            RetrievalConfig(k=-1)
        with pytest.raises(ValidationError):
            RetrievalConfig(n=0)

    def test_config_hash_stable(self):
        """Teste hash da configuração estável."""
        assert RetrievalConfig(k=3).config_hash() == RetrievalConfig(k=3).config_hash()


class TestRankingModels:
    """Testes para modelos de ranking."""

    def test_label_map(self):
        """Teste mapa de rótulos na ordem apresentada."""
        task = RankingTask(
            user="u1",
            candidates=[AugmentedItem(item=i, base_description=i) for i in ("x", "y")],
        )

        assert task.label_map == {"A": "x", "B": "y"}
        assert task.candidate_ids == ["x", "y"]

    def test_duplicate_candidates_rejected(self):
        """Teste candidatos repetidos."""
        with pytest.raises(ValidationError):
            RankingTask(user="u1", candidates=[AugmentedItem(item="x", base_description="x")] * 2)

    def test_ranked_list(self):
        """Teste posição 1-based no ranking."""
        ranked = RankedList(order=["x", "y"])

        assert ranked.rank_of("y") == 2
        assert ranked.rank_of("z") is None
        with pytest.raises(ValidationError):
            RankedList(order=["x", "x"])


class TestEvaluationModels:
    """Testes para modelos de avaliação."""

    def test_candidate_set_permutation(self):
        """Teste ordem apresentada é permutação dos candidatos."""
        with pytest.raises(ValidationError):
            CandidateSet(user="u1", ground_truth="A", negatives=["B"], presented_order=["A", "C"])

    def test_candidate_set_excludes_truth(self):
        """Teste negativos sem o alvo."""
        with pytest.raises(ValidationError):
            CandidateSet(user="u1", ground_truth="A", negatives=["A"], presented_order=["A", "A"])

    def test_outcome_rank_positive(self):
        """Teste rank positivo."""
        with pytest.raises(ValidationError):
            UserOutcome(user="u1", gt_rank=0)

    def test_failures(self):
        """Teste usuários com falha."""
        report = EvalReport(
            n_users=2,
            hr={1: 0.5},
            ndcg={3: 0.5},
            per_user=[UserOutcome(user="u1", gt_rank=1), UserOutcome(user="u2", gt_rank=11, error="boom")],
        )

        assert [o.user for o in report.failures] == ["u2"]


class TestLlmModels:
    """Testes para LlmRequest."""

    def test_empty_prompt_rejected(self):
        """Teste prompt vazio."""
        with pytest.raises(ValidationError):
            LlmRequest(user="  ", model="m")

    def test_request_hash(self):
        """Teste hash da requisição depende do conteúdo."""
        a = LlmRequest(user="hi", model="m")

        assert a.request_hash() == LlmRequest(user="hi", model="m").request_hash()
        assert a.request_hash() != LlmRequest(user="hi", model="other").request_hash()

    def test_messages(self):
        """Teste mensagens com e sem system prompt."""
        assert LlmRequest(user="hi", model="m").messages() == [{"role": "user", "content": "hi"}]
        assert LlmRequest(user="hi", system="s", model="m").messages()[0] == {"role": "system", "content": "s"}
