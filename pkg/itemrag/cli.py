"""Command-line driver: ``itemrag [global options] <command>``."""

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog

from .config.settings import ItemRagSettings
from .core.client import ChatCompletionsClient, LlmClient
from .core.exceptions import ConfigurationError, ItemRagError
from .core.mock import MockLlmClient
from .core.replay import RecordingLlmClient, ReplayLlmClient
from .models.catalog import Catalog, EvalSplit
from .models.evaluation import EvalReport
from .prompts import RANKING_TEMPLATE_VERSION
from .services.catalog import k_core_filter, leave_one_out, load_catalog, save_catalog
from .services.copurchase import CoPurchaseIndex, build_index, catalog_digest, dump_index, load_index
from .services.embeddings import EmbeddingStore, load_embeddings, populate_embeddings, save_embeddings
from .services.evaluation import (
    evaluate,
    make_cold_start,
    relative_change,
    sample_users,
    write_ranking_dump,
)
from .services.pipeline import Method, pipeline_from_settings
from .services.retrieval import RetrievalEngine, write_retrieval_dump
from .services.summarizer import CoPurchaseSummarizer
from .utils.cache import SummaryCache
from .utils.logging import configure_logging

logger = structlog.get_logger(__name__)

CATALOG_INTERACTIONS = "interactions.jsonl"
CATALOG_ITEMS = "items.jsonl"
INDEX_FILE = "index.jsonl"
EMBEDDINGS_FILE = "embeddings.jsonl"
RETRIEVAL_FILE = "retrieval.jsonl"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itemrag", description="Item-based RAG for LLM recommendation")
    parser.add_argument("--config", type=Path, help="TOML config file")
    parser.add_argument("--seed", type=int, help="Run seed (candidates, user sample, retrieval)")
    parser.add_argument(
        "--mock-llm",
        nargs="?",
        const="",
        metavar="SCRIPT",
        help="Use the deterministic mock LLM, optionally with a JSONL script",
    )
    parser.add_argument("--no-sim-items", action="store_true", help="Restrict pools to direct co-purchases")
    parser.add_argument("--no-cofreq-weights", action="store_true", help="Sample pools uniformly")
    parser.add_argument("--work-dir", type=Path, help="Directory for intermediate files and reports")
    parser.add_argument("--log-level", help="Log level")

    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Load, filter and normalize the catalog")
    ingest.add_argument("--interactions", type=Path, help="Interactions JSONL")
    ingest.add_argument("--items", type=Path, help="Items JSONL")

    sub.add_parser("build-index", help="Build the co-purchase index from the training split")

    embed = sub.add_parser("embed-load", help="Load and validate item embeddings")
    embed.add_argument("--embeddings", type=Path, help="Embeddings JSONL")
    embed.add_argument("--from-endpoint", action="store_true", help="Fill the file from the embeddings endpoint")
    embed.add_argument("--batch-size", type=int, default=64)

    retrieve = sub.add_parser("retrieve", help="Retrieve co-purchased items and write a dump")
    retrieve.add_argument("items", nargs="*", help="Query items (default: all)")

    summarize = sub.add_parser("summarize", help="Summarize retrieved items into the cache")
    summarize.add_argument("items", nargs="*", help="Query items (default: all)")

    for name, help_text in (("eval", "Leave-one-out evaluation"), ("eval-cold", "Cold-start evaluation")):
        ev = sub.add_parser(name, help=help_text)
        ev.add_argument(
            "--method",
            choices=[m.value for m in Method] + ["both"],
            default="both",
            help="Ranking method(s) to evaluate",
        )
        ev.add_argument("--users", type=int, help="Number of sampled users")

    compare = sub.add_parser("compare", help="Relative change of one report over a baseline")
    compare.add_argument("baseline", type=Path)
    compare.add_argument("other", type=Path)
    return parser


def load_settings(args: argparse.Namespace) -> ItemRagSettings:
    settings = ItemRagSettings.from_toml(args.config)
    if args.seed is not None:
        settings.seed = args.seed
        settings.retrieval = settings.retrieval.model_copy(update={"rng_seed": args.seed})
    if args.no_sim_items:
        settings.retrieval = settings.retrieval.model_copy(update={"use_sim_items": False})
    if args.no_cofreq_weights:
        settings.retrieval = settings.retrieval.model_copy(update={"use_cofreq_weights": False})
    if args.work_dir is not None:
        settings.work_dir = args.work_dir
    if args.log_level:
        settings.log_level = args.log_level
    return settings


class Runner:
    """Shared state for one CLI invocation."""

    def __init__(self, settings: ItemRagSettings, mock_llm: Optional[str]):
        self.settings = settings
        self.mock_llm = mock_llm
        self.work_dir = settings.work_dir

    # Inputs

    def catalog(self) -> Catalog:
        normalized = self.work_dir / CATALOG_INTERACTIONS, self.work_dir / CATALOG_ITEMS
        if all(p.exists() for p in normalized):
            return load_catalog(*normalized)
        if self.settings.interactions_path is None or self.settings.items_path is None:
            raise ConfigurationError("No catalog: run 'ingest' or set interactions_path and items_path")
        return self._filtered(load_catalog(self.settings.interactions_path, self.settings.items_path))

    def _filtered(self, catalog: Catalog) -> Catalog:
        return k_core_filter(
            catalog, self.settings.min_user_interactions, self.settings.min_item_interactions
        )

    def index_for(self, train: Catalog) -> CoPurchaseIndex:
        path = self.work_dir / INDEX_FILE
        digest = catalog_digest(train)
        if path.exists():
            index = load_index(path)
            if index.config_hash == digest:
                return index
            logger.info("Stored index belongs to other training data, rebuilding", path=str(path))
        return build_index(train, pair_budget=self.settings.pair_budget)

    def store(self) -> Optional[EmbeddingStore]:
        path = self.work_dir / EMBEDDINGS_FILE
        if not path.exists():
            path = self.settings.embeddings_path  # type: ignore[assignment]
        if path is None or not Path(path).exists():
            logger.warning("No embeddings available; similar-item expansion disabled")
            return None
        return load_embeddings(path)

    def llm(self) -> LlmClient:
        settings = self.settings
        if self.mock_llm is not None:
            if self.mock_llm:
                return MockLlmClient.from_script(self.mock_llm, model=settings.model)
            return MockLlmClient(model=settings.model)
        if settings.replay_file is not None and settings.replay_file.exists():
            return ReplayLlmClient(settings.replay_file, model=settings.model)
        client = ChatCompletionsClient.from_settings(settings)
        if settings.replay_file is not None:
            return RecordingLlmClient(client, settings.replay_file)
        return client

    def cache(self) -> SummaryCache:
        return SummaryCache(self.settings.cache_path)

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.work_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    # Commands

    def ingest(self, interactions: Optional[Path], items: Optional[Path]) -> Dict[str, Any]:
        interactions = interactions or self.settings.interactions_path
        items = items or self.settings.items_path
        if interactions is None or items is None:
            raise ConfigurationError("ingest needs --interactions and --items")
        catalog = self._filtered(load_catalog(interactions, items))
        save_catalog(catalog, self.work_dir / CATALOG_INTERACTIONS, self.work_dir / CATALOG_ITEMS)
        split = leave_one_out(catalog)
        return {
            "items": len(catalog.items),
            "users": len(catalog.histories),
            "interactions": catalog.num_interactions,
            "eval_users": len(split.targets),
        }

    def build_index(self) -> Dict[str, Any]:
        split = leave_one_out(self.catalog())
        index = build_index(split.train, pair_budget=self.settings.pair_budget)
        content_hash = dump_index(index, self.work_dir / INDEX_FILE)
        return {"pairs": len(index), "n_users": index.n_users, "config_hash": index.config_hash, "content_hash": content_hash}

    async def embed_load(self, embeddings: Optional[Path], from_endpoint: bool, batch_size: int) -> Dict[str, Any]:
        catalog = self.catalog()
        target = self.work_dir / EMBEDDINGS_FILE
        if from_endpoint:
            async with self.llm() as llm:
                store = await populate_embeddings(
                    catalog, llm, target, model=self.settings.embedding_model, batch_size=batch_size
                )
        else:
            source = embeddings or self.settings.embeddings_path
            if source is None:
                raise ConfigurationError("embed-load needs --embeddings or --from-endpoint")
            store = load_embeddings(source)
            save_embeddings(store, target)
        missing = [i for i in catalog.sorted_item_ids() if i not in store]
        if missing:
            logger.warning("Items without embeddings", count=len(missing), sample=missing[:5])
        return {"items": len(store), "dim": store.dim, "model_tag": store.model_tag, "missing": len(missing)}

    def _engine(self, split: EvalSplit) -> RetrievalEngine:
        return RetrievalEngine(self.index_for(split.train), self.store(), self.settings.retrieval)

    def retrieve(self, items: Sequence[str]) -> Dict[str, Any]:
        split = leave_one_out(self.catalog())
        engine = self._engine(split)
        queries = list(items) or split.train.sorted_item_ids()
        for q in queries:
            split.train.item(q)
        results = engine.retrieve_many(queries)
        write_retrieval_dump(results.values(), self.work_dir / RETRIEVAL_FILE)
        return {
            "queries": len(results),
            "empty": sum(r.is_empty for r in results.values()),
            "config_hash": engine.config_hash,
        }

    async def summarize(self, items: Sequence[str]) -> Dict[str, Any]:
        split = leave_one_out(self.catalog())
        engine = self._engine(split)
        queries = list(items) or split.train.sorted_item_ids()
        async with self.llm() as llm:
            summarizer = CoPurchaseSummarizer(
                split.train,
                engine,
                llm,
                self.cache(),
                template_version=self.settings.summary_template_version,
                max_chars=self.settings.summary_max_chars,
            )
            summaries = await summarizer.summarize_all(queries)
            calls = llm.calls
        return {
            "items": len(summaries),
            "empty": sum(s.is_empty for s in summaries.values()),
            "llm_calls": calls,
            "config_hash": summarizer.config_hash,
        }

    async def evaluate(self, method: str, users: Optional[int], cold: bool) -> Dict[str, Any]:
        settings = self.settings
        split: EvalSplit = leave_one_out(self.catalog())
        sample = sample_users(split, users or settings.num_users, settings.seed)
        if cold:
            split = make_cold_start(split, sample)
        methods: List[Method] = list(Method) if method == "both" else [Method(method)]

        index = self.index_for(split.train) if Method.ITEMRAG in methods else None
        store = self.store() if Method.ITEMRAG in methods else None
        cache = self.cache()
        prefix = "report-cold" if cold else "report"

        reports: Dict[str, Any] = {}
        async with self.llm() as llm:
            for m in methods:
                pipeline = pipeline_from_settings(settings, split, llm, m, store=store, cache=cache, index=index)
                report = await evaluate(
                    split,
                    pipeline,
                    sample,
                    seed=settings.seed,
                    num_candidates=settings.num_candidates,
                    max_concurrency=settings.max_concurrency,
                )
                config = {
                    "method": m.value,
                    "cold_start": cold,
                    "model": llm.model,
                    "num_candidates": settings.num_candidates,
                    "history_limit": settings.history_limit,
                    "ranking_template": RANKING_TEMPLATE_VERSION,
                    "summary_template": settings.summary_template_version,
                    "retrieval": settings.retrieval.model_dump(mode="json"),
                }
                presented = report.to_presentation(config=config, seed=settings.seed)
                self.write_json(f"{prefix}-{m.value}.json", presented)
                write_ranking_dump(report, self.work_dir / f"rankings-{'cold-' if cold else ''}{m.value}.jsonl")
                reports[m.value] = presented
        return reports


def compare_reports(baseline_path: Path, other_path: Path) -> Dict[str, Any]:
    """Relative change between two presentation-layer report files."""

    def read(path: Path) -> EvalReport:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return EvalReport(
                n_users=data["n_users"],
                hr={int(k): v / 100 for k, v in data["hr"].items()},
                ndcg={int(k): v / 100 for k, v in data["ndcg"].items()},
            )
        except (OSError, ValueError, KeyError) as e:
            raise ConfigurationError(f"Cannot read report {path}: {e}") from e

    changes = relative_change(read(baseline_path), read(other_path))
    return {k: (round(v, 1) if v is not None else None) for k, v in changes.items()}


async def _dispatch(args: argparse.Namespace, runner: Runner) -> Any:
    if args.command == "ingest":
        return runner.ingest(args.interactions, args.items)
    if args.command == "build-index":
        return runner.build_index()
    if args.command == "embed-load":
        return await runner.embed_load(args.embeddings, args.from_endpoint, args.batch_size)
    if args.command == "retrieve":
        return runner.retrieve(args.items)
    if args.command == "summarize":
        return await runner.summarize(args.items)
    if args.command in ("eval", "eval-cold"):
        return await runner.evaluate(args.method, args.users, cold=args.command == "eval-cold")
    if args.command == "compare":
        return compare_reports(args.baseline, args.other)
    raise ConfigurationError(f"Unknown command '{args.command}'")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args)
        configure_logging(
            settings.log_level,
            settings.log_format,
            secrets=[settings.api_key.get_secret_value()],
        )
        result = asyncio.run(_dispatch(args, Runner(settings, args.mock_llm)))
    except ItemRagError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
