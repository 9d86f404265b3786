import base64
import string

import numpy as np
import pytest

from nourid.checkdigits import compute_check_digits, strip_separators, validate_check_digits
from nourid.deid import (
    DigitalEnergyId,
    IssuanceRegistry,
    VerifyStatus,
    generate_deid,
    parse_deid,
    sign_payload,
    verify_payload,
)
from nourid.errors import DuplicateIssuance, FormatError

KEY = bytes(range(32))
ALNUM = string.digits + string.ascii_uppercase


def oracle_mod97(body: str, check: str) -> bool:
    """Independent mod 97-10 oracle: build the full numeric string, then int()."""
    values = {c: i for i, c in enumerate(ALNUM)}
    numeric = "".join(f"{values[c]:02d}" for c in strip_separators(body)) + check
    return int(numeric) % 97 == 1


class TestCheckDigits:
    def test_defining_property_random_bodies(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 30))
            body = "".join(rng.choice(list(ALNUM)) for _ in range(n))
            check = compute_check_digits(body)
            assert validate_check_digits(body, check)
            assert oracle_mod97(body, check)

    def test_separators_stripped(self):
        assert compute_check_digits("DE-07-H-ABC") == compute_check_digits("DE07HABC")

    def test_empty_body_rejected(self):
        with pytest.raises(FormatError):
            compute_check_digits("")

    def test_invalid_characters_rejected(self):
        with pytest.raises(FormatError):
            compute_check_digits("abc!")

    def test_single_substitution_always_detected(self, rng):
        # exhaustive: every position x every replacement char, sampled bodies
        for _ in range(25):
            n = int(rng.integers(4, 24))
            body = "".join(rng.choice(list(ALNUM)) for _ in range(n))
            check = compute_check_digits(body)
            for pos in range(len(body)):
                for sub in ALNUM:
                    if sub == body[pos]:
                        continue
                    mutated = body[:pos] + sub + body[pos + 1 :]
                    assert not validate_check_digits(mutated, check), (body, pos, sub)

    def test_check_digit_substitution_detected(self, rng):
        body = "DE07HQ2W3E4R5T6Y7U8I9"
        check = compute_check_digits(body)
        for pos in range(2):
            for d in string.digits:
                if d == check[pos]:
                    continue
                mutated = check[:pos] + d + check[pos + 1 :]
                assert not validate_check_digits(body, mutated)

    def test_adjacent_transposition_detected(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 20))
            body = "".join(rng.choice(list(ALNUM)) for _ in range(n))
            check = compute_check_digits(body)
            for i in range(n - 1):
                if body[i] == body[i + 1]:
                    continue
                swapped = body[:i] + body[i + 1] + body[i] + body[i + 2 :]
                assert not validate_check_digits(swapped, check)


class TestDeidGeneration:
    def test_deterministic(self):
        a = generate_deid("AB123456", "TF-07-100123", 42, "household", issued_at="t")
        b = generate_deid("AB123456", "TF-07-100123", 42, "household", issued_at="t")
        assert a.deid == b.deid

    def test_grammar_and_roundtrip(self):
        record = generate_deid("K55555", "TF-03-200456", 7, "agricultural")
        parsed = parse_deid(record.deid)
        assert parsed.region == "03"
        assert parsed.property_type == "agricultural"
        assert parsed.check_digits == record.check_digits

    def test_check_digits_validate_under_oracle(self, rng):
        for i in range(50):
            nonce = int(rng.integers(0, 2**63))
            record = generate_deid("AB123456", "TF-11-100001", nonce, "commercial")
            stem, check = record.deid.rsplit("-", 1)
            assert oracle_mod97(stem, check)

    def test_nonce_collision_spot_check(self, rng):
        # distinct nonces must give distinct DE-IDs (80-bit digest segment)
        seen = set()
        nonces = np.unique(rng.integers(0, 2**63, size=100_000, dtype=np.int64))
        for nonce in nonces:
            record = generate_deid("AB123456", "TF-07-100123", int(nonce), "household",
                                   issued_at="t")
            seen.add(record.deid)
        assert len(seen) == len(nonces)

    def test_malformed_inputs(self):
        with pytest.raises(FormatError):
            generate_deid("not a cin", "TF-07-100123", 1, "household")
        with pytest.raises(FormatError):
            generate_deid("AB123456", "PARCEL-9", 1, "household")
        with pytest.raises(FormatError):
            generate_deid("AB123456", "TF-07-100123", 1, "industrial")
        with pytest.raises(FormatError):
            generate_deid("AB123456", "TF-07-100123", -1, "household")

    def test_parser_rejects_tampered_strings(self):
        record = generate_deid("AB123456", "TF-07-100123", 5, "household")
        deid = record.deid
        # break one digest character; check digits must catch it
        pos = deid.index("-", 6) + 1
        bad_char = "A" if deid[pos] != "A" else "B"
        tampered = deid[:pos] + bad_char + deid[pos + 1 :]
        with pytest.raises(FormatError):
            parse_deid(tampered)


class TestSignedPayload:
    def test_sign_verify_roundtrip(self):
        record = generate_deid("AB123456", "TF-07-100123", 9, "household")
        payload = sign_payload(record.deid, 1_750_000_000, KEY)
        assert verify_payload(payload.uri, KEY) is VerifyStatus.OK

    def test_wrong_key_rejected(self):
        record = generate_deid("AB123456", "TF-07-100123", 9, "household")
        payload = sign_payload(record.deid, 1_750_000_000, KEY)
        other = bytes(range(1, 33))
        assert verify_payload(payload.uri, other) is VerifyStatus.BAD_SIGNATURE

    def test_gibberish_is_malformed(self):
        assert verify_payload("https://example.com/x", KEY) is VerifyStatus.MALFORMED
        assert verify_payload("nourid://deid/DE-xx?iat=a&sig=b", KEY) is VerifyStatus.MALFORMED

    def test_single_bit_corruptions_never_accept(self, rng):
        record = generate_deid("AB123456", "TF-07-100123", 11, "household")
        payload = sign_payload(record.deid, 1_750_000_000, KEY)
        raw = payload.uri.encode("ascii")
        false_accepts = 0
        for _ in range(1000):
            i = int(rng.integers(len(raw)))
            bit = 1 << int(rng.integers(8))
            corrupted = raw[:i] + bytes([raw[i] ^ bit]) + raw[i + 1 :]
            try:
                text = corrupted.decode("ascii")
            except UnicodeDecodeError:
                continue
            if text == payload.uri:
                continue
            if verify_payload(text, KEY) is VerifyStatus.OK:
                false_accepts += 1
        assert false_accepts == 0

    def test_mac_is_truncated_in_uri_full_in_record(self):
        record = generate_deid("AB123456", "TF-07-100123", 12, "household")
        payload = sign_payload(record.deid, 1_750_000_000, KEY)
        sig = payload.uri.rsplit("sig=", 1)[1]
        assert len(base64.b32decode(sig)) == 10
        assert len(payload.mac) == 32


class TestIssuanceRegistry:
    def test_duplicate_pair_refused(self):
        registry = IssuanceRegistry()
        a = generate_deid("AB123456", "TF-07-100123", 1, "household")
        b = generate_deid("AB123456", "TF-07-100123", 2, "household")
        registry.register(a)
        with pytest.raises(DuplicateIssuance):
            registry.register(b)

    def test_distinct_pairs_fine(self):
        registry = IssuanceRegistry()
        registry.register(generate_deid("AB123456", "TF-07-100123", 1, "household"))
        registry.register(generate_deid("AB123456", "TF-07-100999", 1, "household"))
        registry.register(generate_deid("CD654321", "TF-07-100124", 1, "household"))
        assert len(registry) == 3

    def test_journal_and_rebuild(self):
        journal: list[dict] = []
        registry = IssuanceRegistry(journal=journal.append)
        record = generate_deid("AB123456", "TF-07-100123", 1, "household")
        registry.register(record)
        rebuilt = IssuanceRegistry.from_records(journal)
        assert rebuilt.get(record.deid) == record
