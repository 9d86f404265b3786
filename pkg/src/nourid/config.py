"""Platform configuration with file and environment overrides.

Config files are JSON. `NOURID_CONFIG` points at an alternate file;
`NOURID_ISSUANCE_KEY` (hex, 32 bytes) overrides the signing key.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path

from .errors import InvalidConfig

ENV_CONFIG = "NOURID_CONFIG"
ENV_ISSUANCE_KEY = "NOURID_ISSUANCE_KEY"

# fixed development key; any deployment overrides via file or env
_DEV_KEY_HEX = "6e6f757269642d6465762d6b65792d30303030303030302d646f6e6f74757365"


@dataclass
class SeedParams:
    farmers: int = 10
    entrepreneurs: int = 10
    households: int = 10
    seed: int = 20250101
    defect_rate: float = 0.0
    detectability: float = 0.98
    as_of: str = "2024-12-31"

    def as_of_date(self) -> date:
        return date.fromisoformat(self.as_of)


@dataclass
class PlatformConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8462
    data_dir: str = "data"
    session_ttl_seconds: int = 3600
    matcher_threshold: float | None = None  # None: calibrate at startup
    noise_sigma: float = 0.22
    template_dim: int = 128
    issuance_key_hex: str = _DEV_KEY_HEX
    deid_hash: str = "sha256"
    subsidy_tier_a_below: float = 3.3
    subsidy_tier_b_below: float = 16.7
    series_days: int = 730
    forecast_horizon_default: int = 14
    scrypt_n: int = 2**14
    scrypt_r: int = 8
    scrypt_p: int = 1
    snapshot_every_events: int = 100
    seed_params: SeedParams = field(default_factory=SeedParams)
    bootstrap_officers: list = field(
        default_factory=lambda: [
            {
                "full_name": "Officer One",
                "email": "officer1@srm.gov.ma",
                "phone": "+212600000001",
                "password": "srm-officer-pass-01",
            }
        ]
    )

    def issuance_key(self) -> bytes:
        env = os.environ.get(ENV_ISSUANCE_KEY)
        raw = env if env else self.issuance_key_hex
        try:
            key = bytes.fromhex(raw)
        except ValueError as exc:
            raise InvalidConfig(f"issuance key is not hex: {exc}")
        if len(key) != 32:
            raise InvalidConfig(f"issuance key must be 32 bytes, got {len(key)}")
        return key


def load_config(path: str | Path | None = None) -> PlatformConfig:
    """Defaults, overlaid with the JSON file from `path` or NOURID_CONFIG."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    config = PlatformConfig()
    if path is None:
        return config
    path = Path(path)
    if not path.exists():
        raise InvalidConfig(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file is not valid JSON: {exc}")

    known = {f.name for f in fields(PlatformConfig)}
    for key, value in raw.items():
        if key not in known:
            raise InvalidConfig(f"unknown config key {key!r}")
        if key == "seed_params":
            config.seed_params = SeedParams(**value)
        else:
            setattr(config, key, value)
    return config
