"""Canonical serialization and hashing helpers.

Registries, the audit log, and DE-ID generation all need byte-stable
digests, so the framing rules live in one place: JSON with sorted keys
and no whitespace, and length-prefixed field framing for raw hashes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from typing import Iterable, Mapping


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, ASCII-safe."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def framed_hash(parts: Iterable[bytes], hash_name: str = "sha256") -> bytes:
    """Hash a sequence of byte fields, each prefixed with its u32-BE length.

    The prefix makes the framing unambiguous: ("ab", "c") and ("a", "bc")
    digest differently.
    """
    h = hashlib.new(hash_name)
    for part in parts:
        h.update(struct.pack(">I", len(part)))
        h.update(part)
    return h.digest()


def field_checksum(fields: Mapping[str, str], length: int = 12) -> str:
    """Hex checksum over a key-value payload, recomputable by validators."""
    digest = hashlib.sha256(canonical_json(dict(fields)).encode("utf-8")).hexdigest()
    return digest[:length]


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
