"""Canonical JSON encoding used by every file format in the package.

Keys are sorted and floats use Python's shortest round-trip repr, so
``dumps(loads(dumps(x))) == dumps(x)`` holds byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np


def _default(obj: Any) -> Any:
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, default=_default)


def loads(text: str) -> Any:
    return json.loads(text)


def load_document(source: str | Path | dict | list) -> Any:
    """Accept an already-parsed document, a path, or a JSON string."""
    if isinstance(source, (dict, list)):
        return source
    if isinstance(source, Path):
        return json.loads(source.read_text())
    text = str(source)
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    return json.loads(Path(text).read_text())
