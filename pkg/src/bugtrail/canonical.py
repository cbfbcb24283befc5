"""Canonical JSON encoding: sorted keys, no insignificant whitespace, UTF-8.

All persisted documents and wire bodies that must be byte-reproducible go
through these two helpers so serialize(deserialize(x)) is a fixpoint.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_json_bytes(doc: Any) -> bytes:
    """Encode *doc* to canonical UTF-8 JSON (trailing newline included)."""
    return (json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def load_json_bytes(data: bytes) -> Any:
    return json.loads(data.decode("utf-8"))
