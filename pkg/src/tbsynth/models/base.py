"""Base classes shared by every tbsynth model."""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, model_validator
from pydantic.alias_generators import to_camel, to_snake

IDENTIFIER_PATTERN = r"^[A-Za-z0-9_]+$"

KeyStyle = Literal["to_snake", "to_camel"]


def normalize_keys(obj: Any, method: KeyStyle) -> Any:
    """Rewrite every mapping key below ``obj``; values, identifiers included, keep their spelling.

    Lists and tuples are walked and keep their type.
    """
    rename = to_snake if method == "to_snake" else to_camel
    if isinstance(obj, Mapping):
        return {(rename(k) if isinstance(k, str) else k): normalize_keys(v, method) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return type(obj)(normalize_keys(item, method) for item in obj)
    return obj


class FrozenModel(BaseModel):
    """Immutable, hashable value model used for the domain vocabulary."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class DocumentModel(BaseModel):
    """Base model for the JSON document formats.

    Documents are read with camelCase or snake_case keys, kept as snake_case attributes and
    written back with camelCase keys. Unknown keys are errors.
    """

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _snake_case_keys(cls, data: Any) -> Any:
        return normalize_keys(data, "to_snake")

    def model_dump_camel(self, *, mode: Literal["python", "json"] = "json", **kwargs: Any) -> Any:
        """Dump with camelCase keys, JSON-compatible by default.

        ``include``/``exclude`` and the other ``model_dump`` options take snake_case field names.
        """
        return normalize_keys(self.model_dump(mode=mode, **kwargs), "to_camel")
