"""Contains helper functions."""

import json
from pathlib import Path
from typing import Any

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def load_fixture(filename: str) -> str:
    """Load a fixture as text."""
    return (FIXTURES_DIR / filename).read_text(encoding="utf-8")


def load_json_fixture(filename: str) -> dict[str, Any]:
    """Load a JSON fixture."""
    data: dict[str, Any] = json.loads(load_fixture(filename))
    return data


def write_config(directory: Path, data: dict[str, Any], name: str = "run.json") -> Path:
    """Write a run configuration and return its path."""
    path = directory / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
