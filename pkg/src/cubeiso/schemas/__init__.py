"""JSON schemas for every document the command line emits."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

NAMES = (
    "analyze",
    "function",
    "junta",
    "report",
    "scalar_report",
    "search_result",
    "stability_probe",
)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text())
