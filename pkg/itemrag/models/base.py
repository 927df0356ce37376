"""Base model for all Pydantic models."""

from typing import Annotated

from pydantic import BaseModel as PydanticBaseModel, ConfigDict, StringConstraints

# Opaque identifiers; non-empty strings.
ItemId = Annotated[str, StringConstraints(min_length=1)]
UserId = Annotated[str, StringConstraints(min_length=1)]


class BaseModel(PydanticBaseModel):
    """Base model with common configuration.

    Domain objects are immutable once built so they can be shared between
    concurrent workers.
    """

    model_config = ConfigDict(
        # Allow extra fields for future compatibility
        extra="ignore",
        # Use enum values instead of names
        use_enum_values=True,
        frozen=True,
        populate_by_name=True,
    )
