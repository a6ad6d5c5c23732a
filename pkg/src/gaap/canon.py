"""Canonical byte serialization and digests.

Tool-call arguments are digested over one exact byte form so the policy
gate's authorization, the disclosure log, and the broker's wire frames all
agree on what was approved.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(value) -> bytes:
    return canonical_json(value).encode("utf-8")


def digest(value) -> str:
    """Lowercase hex sha256 over the canonical byte serialization."""
    return hashlib.sha256(canonical_bytes(value)).hexdigest()


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
