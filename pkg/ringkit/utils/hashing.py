"""Canonical JSON and content hashing."""
import hashlib
import json
from typing import Any, Iterable


def canonical_json(payload: Any) -> str:
    """Serialize to JSON with sorted keys and no insignificant whitespace."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def sha256_json(payload: Any) -> str:
    """Hex sha256 of the canonical JSON form of a payload."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def sha256_names(names: Iterable[str]) -> str:
    """Hex sha256 of an ordered list of names (feature schemas)."""
    return sha256_json(list(names))
