"""Contains simulator exceptions."""

from __future__ import annotations

from functools import cache
from importlib import resources
import json
from typing import Any


@cache
def _load_messages() -> dict[str, str]:
    """Load exception messages from the translation catalogue."""
    catalogue = resources.files(__package__).joinpath("translations", "en.json")
    data: dict[str, Any] = json.loads(catalogue.read_text(encoding="utf-8"))
    return {
        key: value["message"] for key, value in data.get("exceptions", {}).items()
    }


class KljnError(Exception):
    """Base class for all simulator errors.

    The message is looked up by translation key, so callers never
    format user-facing text themselves.
    """

    def __init__(
        self,
        *args: object,
        translation_key: str | None = None,
        translation_placeholders: dict[str, Any] | None = None,
    ) -> None:
        """Initialize a new error."""
        super().__init__(*args)
        self.translation_key = translation_key
        self.translation_placeholders = translation_placeholders or {}

    def __str__(self) -> str:
        """Return the rendered message."""
        if self.translation_key is None:
            return super().__str__()

        template = _load_messages().get(self.translation_key)
        if template is None:
            return self.translation_key

        try:
            return template.format(**self.translation_placeholders)
        except KeyError:
            return template


class ParameterError(KljnError, ValueError):
    """Raised on invalid physical or numeric parameters."""


class ContractError(KljnError):
    """Raised when a call contract is violated."""


class ConfigurationError(KljnError):
    """Raised on inconsistent run configuration."""
