"""The KLJN key exchange simulator."""

from __future__ import annotations

from .const import Variant
from .exceptions import ConfigurationError, ContractError, KljnError, ParameterError

__all__ = [
    "ConfigurationError",
    "ContractError",
    "KljnError",
    "ParameterError",
    "Variant",
]
