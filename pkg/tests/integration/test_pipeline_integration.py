"""Testes de integração do pipeline completo com o LLM mock."""

import re

import numpy as np
import pytest

from itemrag.core.mock import MockLlmClient
from itemrag.models.ranking import SUMMARY_SEPARATOR
from itemrag.models.retrieval import RetrievalConfig
from itemrag.prompts import is_ranking_prompt
from itemrag.services.catalog import leave_one_out, load_catalog
from itemrag.services.copurchase import build_index
from itemrag.services.embeddings import EmbeddingStore, populate_embeddings
from itemrag.services.evaluation import evaluate, make_cold_start, sample_users
from itemrag.services.pipeline import Method, RankingPipeline, build_pipeline
from itemrag.services.retrieval import RetrievalEngine
from itemrag.services.summarizer import CoPurchaseSummarizer
from itemrag.utils.cache import SummaryCache
from tests.fixtures.test_data import TestData

pytestmark = pytest.mark.integration


@pytest.fixture
def large_split():
    """Leave-one-out split over 40 random users and the beauty items."""
    rng = np.random.default_rng(2025)
    histories = {
        f"u{u:02d}": [f"i{k:02d}" for k in rng.integers(0, 30, size=int(rng.integers(2, 7)))]
        for u in range(40)
    }
    histories.update({"fixed1": ["i00", "i01", "i02"], "fixed2": ["i01", "i02", "i03"]})
    return leave_one_out(TestData.get_test_catalog(histories))


async def _store(catalog, tmp_path):
    return await populate_embeddings(catalog, MockLlmClient(), tmp_path / "embeddings.jsonl")


def _ranking_prompts(llm):
    return [r.user for r in llm.requests if is_ranking_prompt(r.user)]


class TestEndToEnd:
    """Testes ponta a ponta: ingestão, índice, recuperação, resumo, ranking e relatório."""

    @pytest.mark.asyncio
    async def test_runs_are_identical(self, tmp_path):
        """Teste duas execuções independentes produzem relatórios idênticos."""
        interactions, items = TestData.write_catalog_files(tmp_path)

        async def run(tag):
            split = leave_one_out(load_catalog(interactions, items))
            store = await populate_embeddings(split.train, MockLlmClient(), tmp_path / f"emb-{tag}.jsonl")
            llm = MockLlmClient()
            pipeline = build_pipeline(
                split, llm, Method.ITEMRAG, store=store, cache=SummaryCache(tmp_path / f"cache-{tag}.jsonl")
            )
            report = await evaluate(split, pipeline, sample_users(split, 100, seed=3), seed=3)
            return report.model_dump_json()

        assert await run("a") == await run("b")

    @pytest.mark.asyncio
    async def test_oracle_ranker_is_perfect_with_summaries(self):
        """Teste oráculo ignora resumos anexados e acerta sempre."""
        items = dict(TestData.ITEMS, T="Target product")
        histories = {u: [*seq, "T"] for u, seq in TestData.HISTORIES.items()}
        histories["u7"] = ["A", "T", "B"]
        split = leave_one_out(TestData.get_test_catalog(histories, items))
        users = [u for u in sorted(split.targets) if split.targets[u] == "T"]
        llm = MockLlmClient(oracle_key=lambda text: 0 if text == "Target product" else 1)

        report = await evaluate(split, build_pipeline(split, llm, Method.ITEMRAG), users)

        assert all(o.gt_rank == 1 for o in report.per_user)
        assert report.ndcg[5] == 1.0


class TestZeroShotEquivalence:
    """Testes da equivalência entre zero-shot e ItemRAG sem resumos."""

    @pytest.mark.asyncio
    async def test_delta_is_only_the_summaries(self, large_split, tmp_path):
        """Teste prompts ItemRAG sem os resumos são idênticos aos zero-shot."""
        store = await _store(large_split.train, tmp_path)
        users = sample_users(large_split, 15, seed=1)

        zero_llm = MockLlmClient()
        await evaluate(large_split, build_pipeline(large_split, zero_llm, Method.ZERO_SHOT), users, seed=1)
        rag_llm = MockLlmClient()
        await evaluate(
            large_split, build_pipeline(large_split, rag_llm, Method.ITEMRAG, store=store), users, seed=1
        )

        zero_prompts = _ranking_prompts(zero_llm)
        rag_prompts = _ranking_prompts(rag_llm)
        stripped = {re.sub(re.escape(SUMMARY_SEPARATOR) + r"[^\n]*", "", p) for p in rag_prompts}
        assert len(zero_prompts) == len(rag_prompts) == len(users)
        assert stripped == set(zero_prompts)
        assert any(SUMMARY_SEPARATOR in p for p in rag_prompts)
        assert not any(SUMMARY_SEPARATOR in p for p in zero_prompts)

    @pytest.mark.asyncio
    async def test_blank_summaries_reduce_to_zero_shot(self, large_split):
        """Teste resumos vazios produzem exatamente o prompt zero-shot."""
        users = sample_users(large_split, 5, seed=2)
        blank = MockLlmClient(rule=lambda req: "" if not is_ranking_prompt(req.user) else "A")
        zero_llm = MockLlmClient(rule=lambda req: "A")

        await evaluate(large_split, build_pipeline(large_split, blank, Method.ITEMRAG), users, seed=2)
        await evaluate(large_split, build_pipeline(large_split, zero_llm, Method.ZERO_SHOT), users, seed=2)

        assert set(_ranking_prompts(blank)) == set(_ranking_prompts(zero_llm))


class TestAblations:
    """Testes das ablações de recuperação."""

    @pytest.mark.asyncio
    async def test_no_sim_items_pools_within_neighbors(self, large_split, tmp_path):
        """Teste sem itens similares: itens resumidos vêm só de N(i)."""
        store = await _store(large_split.train, tmp_path)
        index = build_index(large_split.train)
        engine = RetrievalEngine(index, store, RetrievalConfig(use_sim_items=False, n=5))
        summarizer = CoPurchaseSummarizer(large_split.train, engine, MockLlmClient())

        summaries = await summarizer.summarize_all(large_split.train.sorted_item_ids())

        for item, summary in summaries.items():
            assert set(summary.source_items) <= index.neighbors(item)

    @pytest.mark.asyncio
    async def test_similar_items_widen_pools(self, large_split, tmp_path):
        """Teste itens similares ampliam os pools."""
        store = await _store(large_split.train, tmp_path)
        index = build_index(large_split.train)
        with_sim = RetrievalEngine(index, store, RetrievalConfig(k=5)).retrieve_many(store.ids)
        without = RetrievalEngine(index, store, RetrievalConfig(k=5, use_sim_items=False)).retrieve_many(store.ids)

        assert all(with_sim[i].pool_size >= without[i].pool_size for i in store.ids)
        assert any(with_sim[i].pool_size > without[i].pool_size for i in store.ids)

    @pytest.mark.asyncio
    async def test_ablations_get_separate_cache_entries(self, large_split, tmp_path):
        """Teste ablações não reaproveitam resumos umas das outras."""
        store = await _store(large_split.train, tmp_path)
        cache = SummaryCache()
        llm = MockLlmClient()
        index = build_index(large_split.train)

        for cfg in (RetrievalConfig(), RetrievalConfig(use_cofreq_weights=False)):
            summarizer = CoPurchaseSummarizer(large_split.train, RetrievalEngine(index, store, cfg), llm, cache)
            await summarizer.summary_for("i01")

        assert llm.calls == 2


class TestSummaryReuse:
    """Testes de reaproveitamento do cache entre execuções."""

    @pytest.mark.asyncio
    async def test_second_run_only_ranks(self, large_split, tmp_path):
        """Teste segunda avaliação só emite chamadas de ranking."""
        store = await _store(large_split.train, tmp_path)
        cache = SummaryCache(tmp_path / "summaries.jsonl")
        users = sample_users(large_split, 10, seed=4)

        first_llm = MockLlmClient()
        await evaluate(large_split, build_pipeline(large_split, first_llm, Method.ITEMRAG, store=store, cache=cache), users)
        second_llm = MockLlmClient()
        await evaluate(
            large_split,
            build_pipeline(
                large_split, second_llm, Method.ITEMRAG, store=store, cache=SummaryCache(tmp_path / "summaries.jsonl")
            ),
            users,
        )

        assert first_llm.calls > len(users)
        assert second_llm.calls == len(users)


class TestColdStart:
    """Testes do cenário de itens frios."""

    @pytest.mark.asyncio
    async def test_cold_targets_have_no_copurchases(self, large_split, tmp_path):
        """Teste alvos frios sem co-compras, recuperados via similares."""
        users = sample_users(large_split, 20, seed=5)
        cold = make_cold_start(large_split, users)
        store = await _store(cold.train, tmp_path)
        pipeline = build_pipeline(cold, MockLlmClient(), Method.ITEMRAG, store=store)

        report = await evaluate(cold, pipeline, users, seed=5)

        assert isinstance(pipeline, RankingPipeline)
        index = pipeline.summarizer.engine.index
        for t in cold.cold_items:
            assert index.neighbors(t) == frozenset()
        assert report.n_users == len(users)
        assert not report.failures

    @pytest.mark.asyncio
    async def test_cold_item_summary_uses_similar_items(self, tmp_path):
        """Teste item frio recebe resumo a partir de itens similares."""
        split = leave_one_out(TestData.get_test_catalog({
            "u1": ["A", "B", "C"],
            "u2": ["B", "D", "E"],
            "u3": ["F", "C"],
        }))
        cold = make_cold_start(split, ["u1"])
        store = EmbeddingStore({"C": [1.0, 0.0], "B": [0.9, 0.1], "D": [0.0, 1.0], "E": [0.1, 0.9]})
        summarizer = CoPurchaseSummarizer(
            cold.train, RetrievalEngine(build_index(cold.train), store, RetrievalConfig(k=1)), MockLlmClient()
        )

        summary = await summarizer.summary_for("C")

        # C is cold; its nearest neighbor B was bought with A and D.
        assert set(summary.source_items) == {"A", "D"}
        assert not summary.is_empty
