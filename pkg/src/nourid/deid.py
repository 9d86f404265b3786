"""Digital Energy ID synthesis, signed QR payloads, issuance registry.

DE-ID grammar (all uppercase):

    DE-<region:2 digits>-<ptype letter H|A|C>-<16 base32 chars>-<2 check digits>

The base32 segment is the first 10 bytes of a keyless cryptographic hash
over the length-prefixed (cin, parcel_id, nonce) triple, so the same
inputs always regenerate the same DE-ID. Check digits follow the mod
97-10 scheme in ``checkdigits``. QR payloads are URIs carrying a
truncated HMAC; the full-length MAC never leaves the issuer.
"""

from __future__ import annotations

import base64
import hmac
import re
import struct
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from urllib.parse import parse_qs, urlsplit

from .canonical import framed_hash
from .checkdigits import compute_check_digits, validate_check_digits
from .errors import DuplicateIssuance, FormatError
from .registry import PARCEL_PATTERN, validate_cin

PROPERTY_TYPE_LETTER = {"household": "H", "agricultural": "A", "commercial": "C"}
_LETTER_PROPERTY_TYPE = {v: k for k, v in PROPERTY_TYPE_LETTER.items()}

DEID_PATTERN = re.compile(
    r"^DE-(?P<region>[0-9]{2})-(?P<ptype>[HAC])-(?P<digest>[A-Z2-7]{16})-(?P<check>[0-9]{2})$"
)

URI_PREFIX = "nourid://deid/"
MAC_TRUNCATION_BYTES = 10


@dataclass(frozen=True)
class DigitalEnergyId:
    deid: str
    cin: str
    parcel_id: str
    nonce: int
    issued_at: str  # ISO instant
    check_digits: str

    def to_dict(self) -> dict:
        return {
            "deid": self.deid,
            "cin": self.cin,
            "parcel_id": self.parcel_id,
            "nonce": self.nonce,
            "issued_at": self.issued_at,
            "check_digits": self.check_digits,
        }


def generate_deid(cin: str, parcel_id: str, nonce: int, property_type: str,
                  issued_at: str | None = None, hash_name: str = "sha256") -> DigitalEnergyId:
    """Deterministic DE-ID for a (cin, parcel, nonce) triple."""
    cin = validate_cin(cin)
    m = PARCEL_PATTERN.match(parcel_id or "")
    if not m:
        raise FormatError("pattern_mismatch", f"parcel id {parcel_id!r} is not canonical")
    if property_type not in PROPERTY_TYPE_LETTER:
        raise FormatError("unknown_type", f"unknown property type {property_type!r}")
    if not 0 <= nonce < 2**64:
        raise FormatError("nonce_range", "nonce must fit in 64 bits")

    digest = framed_hash(
        [cin.encode(), parcel_id.encode(), struct.pack(">Q", nonce)], hash_name
    )
    body32 = base64.b32encode(digest[:10]).decode("ascii")  # 80 bits -> 16 chars
    stem = f"DE-{m.group(1)}-{PROPERTY_TYPE_LETTER[property_type]}-{body32}"
    check = compute_check_digits(stem)
    return DigitalEnergyId(
        deid=f"{stem}-{check}",
        cin=cin,
        parcel_id=parcel_id,
        nonce=nonce,
        issued_at=issued_at or datetime.now(timezone.utc).isoformat(),
        check_digits=check,
    )


@dataclass(frozen=True)
class ParsedDeid:
    region: str
    property_type: str
    digest: str
    check_digits: str


def parse_deid(deid: str) -> ParsedDeid:
    """Accepts exactly the generator's output grammar, check digits included."""
    m = DEID_PATTERN.match(deid or "")
    if not m:
        raise FormatError("pattern_mismatch", f"{deid!r} is not a DE-ID")
    stem = deid.rsplit("-", 1)[0]
    if not validate_check_digits(stem, m.group("check")):
        raise FormatError("check_digits", f"{deid!r} fails check digit validation")
    return ParsedDeid(
        region=m.group("region"),
        property_type=_LETTER_PROPERTY_TYPE[m.group("ptype")],
        digest=m.group("digest"),
        check_digits=m.group("check"),
    )


# --- signed QR payloads ----------------------------------------------------


@dataclass(frozen=True)
class QrPayload:
    uri: str
    mac: bytes  # full-length MAC, kept server side


class VerifyStatus(Enum):
    OK = "ok"
    BAD_SIGNATURE = "bad_signature"
    MALFORMED = "malformed"


def _presign_string(deid: str, iat: int) -> bytes:
    return f"{deid}|{iat}".encode("ascii")


def sign_payload(deid: str, issued_at: int, key: bytes) -> QrPayload:
    """URI of the form nourid://deid/<deid>?iat=<s>&sig=<base32 of 10-byte MAC>."""
    if len(key) != 32:
        raise FormatError("key_length", "issuance key must be 32 bytes")
    parse_deid(deid)
    mac = hmac.new(key, _presign_string(deid, issued_at), "sha256").digest()
    sig = base64.b32encode(mac[:MAC_TRUNCATION_BYTES]).decode("ascii")
    return QrPayload(uri=f"{URI_PREFIX}{deid}?iat={issued_at}&sig={sig}", mac=mac)


def verify_payload(uri: str, key: bytes) -> VerifyStatus:
    """OK iff the URI parses, the DE-ID is well-formed, and the MAC matches."""
    if len(key) != 32:
        raise FormatError("key_length", "issuance key must be 32 bytes")
    if not isinstance(uri, str) or not uri.startswith(URI_PREFIX):
        return VerifyStatus.MALFORMED
    try:
        split = urlsplit(uri)
        # for nourid://deid/<id> the scheme host is "deid" and the path holds the id
        deid = split.path.lstrip("/")
        query = parse_qs(split.query, strict_parsing=True)
        iat = int(query["iat"][0])
        sig = query["sig"][0]
        parse_deid(deid)
    except (KeyError, ValueError, IndexError, FormatError):
        return VerifyStatus.MALFORMED
    expected = hmac.new(key, _presign_string(deid, iat), "sha256").digest()
    expected_sig = base64.b32encode(expected[:MAC_TRUNCATION_BYTES]).decode("ascii")
    if not hmac.compare_digest(sig, expected_sig):
        return VerifyStatus.BAD_SIGNATURE
    return VerifyStatus.OK


class IssuanceRegistry:
    """Atomic insert-if-absent registry enforcing one DE-ID per (cin, parcel)."""

    def __init__(self, journal=None):
        self._by_deid: dict[str, DigitalEnergyId] = {}
        self._by_pair: dict[tuple[str, str], str] = {}
        self._lock = threading.Lock()
        self._journal = journal

    def register(self, record: DigitalEnergyId) -> DigitalEnergyId:
        with self._lock:
            pair = (record.cin, record.parcel_id)
            if pair in self._by_pair:
                raise DuplicateIssuance(
                    f"DE-ID already issued for {record.cin} / {record.parcel_id}",
                    deid=self._by_pair[pair],
                )
            if record.deid in self._by_deid:
                raise DuplicateIssuance(f"DE-ID string collision for {record.deid}")
            self._by_pair[pair] = record.deid
            self._by_deid[record.deid] = record
            if self._journal is not None:
                self._journal(record.to_dict())
            return record

    def get(self, deid: str) -> DigitalEnergyId | None:
        with self._lock:
            return self._by_deid.get(deid)

    def all_records(self) -> list[DigitalEnergyId]:
        with self._lock:
            return list(self._by_deid.values())

    def __len__(self) -> int:
        with self._lock:
            return len(self._by_deid)

    @classmethod
    def from_records(cls, records, journal=None) -> "IssuanceRegistry":
        registry = cls(journal=None)
        for raw in records:
            registry.register(DigitalEnergyId(**raw))
        registry._journal = journal
        return registry
