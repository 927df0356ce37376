"""Configuration settings for the ItemRAG pipeline."""

from pathlib import Path
from typing import Any, Optional, Tuple, Type, Union

from pydantic import Field, SecretStr
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from ..models.retrieval import RetrievalConfig


class ItemRagSettings(BaseSettings):
    """Configuration settings for ItemRAG runs.

    Values come from explicit arguments, ``ITEMRAG_*`` environment variables,
    a ``.env`` file and an optional TOML file, in that order of precedence.
    Nested retrieval options use ``__`` in environment variables, e.g.
    ``ITEMRAG_RETRIEVAL__K=3``.
    """

    model_config = SettingsConfigDict(
        env_prefix="ITEMRAG_",
        env_file=".env",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )

    # LLM endpoint
    api_key: SecretStr = SecretStr("")
    api_base: str = "https://api.openai.com/v1"
    model: str = "gpt-4.1-mini"
    temperature: float = Field(0.0, ge=0.0)
    max_tokens: int = Field(512, gt=0)
    timeout: float = 60.0
    max_retries: int = Field(3, ge=0)
    backoff_factor: float = 1.0
    max_backoff: float = 30.0
    max_concurrency: int = Field(8, gt=0)
    replay_file: Optional[Path] = None
    embedding_model: Optional[str] = None

    # Retrieval
    retrieval: RetrievalConfig = Field(default_factory=RetrievalConfig)

    # Catalog preprocessing (0 disables k-core filtering)
    min_user_interactions: int = Field(0, ge=0)
    min_item_interactions: int = Field(0, ge=0)

    # Co-purchase index
    pair_budget: int = 50_000_000

    # Summaries
    summary_template_version: str = "v1"
    summary_max_chars: int = 1000
    cache_file: Optional[Path] = None

    # Ranking
    history_limit: int = Field(30, gt=0)
    num_candidates: int = Field(10, ge=2)

    # Evaluation
    seed: int = 0
    num_users: int = Field(1000, gt=0)

    # Paths
    interactions_path: Optional[Path] = None
    items_path: Optional[Path] = None
    embeddings_path: Optional[Path] = None
    work_dir: Path = Path("itemrag-work")

    # Logging
    log_level: str = "INFO"
    log_format: str = "json"

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            TomlConfigSettingsSource(settings_cls),
            file_secret_settings,
        )

    @classmethod
    def from_toml(
        cls, path: Optional[Union[str, Path]] = None, **overrides: Any
    ) -> "ItemRagSettings":
        """Load settings with an optional TOML config file underneath env vars."""
        if path is None:
            return cls(**overrides)

        class _FileSettings(cls):  # type: ignore[valid-type, misc]
            model_config = SettingsConfigDict(**{**cls.model_config, "toml_file": Path(path)})

        return _FileSettings(**overrides)

    @property
    def cache_path(self) -> Path:
        return self.cache_file or self.work_dir / "summaries.jsonl"
