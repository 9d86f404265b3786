"""All mutable service state plus its durable representation.

On startup the registry snapshot is loaded from the data directory (or
seeded there from config), accounts/sessions/issuance replay from their
logs, and the workflow store recovers from the latest snapshot plus the
journal tail. Everything acknowledged over HTTP is journaled first.
"""

from __future__ import annotations

import secrets
import struct
import threading
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ..analytics import (
    BoostingParams,
    SubsidyThresholds,
    build_features,
    forecast,
    subsidy_tier,
    synthesize_series,
    train_forecaster,
)
from ..canonical import framed_hash
from ..config import PlatformConfig
from ..deid import IssuanceRegistry, generate_deid, sign_payload
from ..errors import NotFound
from ..registry import PopulationConfig, RegistrySnapshot, inject_defects, seed_population
from ..verification import calibrate_threshold, simulate_score_corpus
from ..workflow import WorkflowStore
from .auth import AccountStore, SessionStore
from .persist import PersistentLog, atomic_write_json, read_json

WORKFLOW_SNAPSHOT = "workflow_snapshot.json"


def derived_seed(*parts) -> int:
    """Stable 63-bit sub-seed from the platform seed and context strings."""
    digest = framed_hash([str(p).encode("utf-8") for p in parts])
    return struct.unpack(">Q", digest[:8])[0] >> 1


def ensure_registry(config: PlatformConfig, data_dir: Path) -> RegistrySnapshot:
    """Load the seeded registries, seeding and saving them when absent."""
    if (data_dir / "meta.json").exists():
        return RegistrySnapshot.load(data_dir)
    sp = config.seed_params
    snapshot = seed_population(
        PopulationConfig(
            farmers=sp.farmers,
            entrepreneurs=sp.entrepreneurs,
            households=sp.households,
            template_dim=config.template_dim,
            as_of=sp.as_of_date(),
        ),
        seed=sp.seed,
    )
    if sp.defect_rate > 0:
        snapshot = inject_defects(
            snapshot, sp.defect_rate, seed=sp.seed, detectability=sp.detectability
        )
    snapshot.save(data_dir)
    return snapshot


class ServiceState:
    def __init__(self, config: PlatformConfig, data_dir: str | Path | None = None):
        self.config = config
        self.data_dir = Path(data_dir if data_dir is not None else config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

        self.registry = ensure_registry(config, self.data_dir)

        self._accounts_log = PersistentLog(self.data_dir / "accounts.jsonl")
        self.accounts = AccountStore(
            journal=self._accounts_log.append,
            scrypt_params=(config.scrypt_n, config.scrypt_r, config.scrypt_p),
        )
        self.accounts.load(self._accounts_log.read_all())

        self._sessions_log = PersistentLog(self.data_dir / "sessions.jsonl")
        self.sessions = SessionStore(
            ttl_seconds=config.session_ttl_seconds, journal=self._sessions_log.append
        )
        self.sessions.load(self._sessions_log.read_all())

        self._issuance_log = PersistentLog(self.data_dir / "issuance.jsonl")
        self.issuance = IssuanceRegistry.from_records(
            self._issuance_log.read_all(), journal=self._issuance_log.append
        )

        self._events_log = PersistentLog(self.data_dir / "workflow_events.jsonl")
        self._event_seq = 0
        self._snapshot_every = max(1, config.snapshot_every_events)
        self.workflow = self._recover_workflow()

        if config.matcher_threshold is not None:
            self.matcher_threshold = float(config.matcher_threshold)
            self.calibration = None
        else:
            genuine, impostor = simulate_score_corpus(
                2000, seed=derived_seed(config.seed_params.seed, "startup-calibration"),
                noise_sigma=config.noise_sigma, dim=config.template_dim,
            )
            self.calibration = calibrate_threshold(genuine, impostor, target_accuracy=0.9)
            self.matcher_threshold = self.calibration.threshold

        self.subsidy = SubsidyThresholds(
            tier_a_below=config.subsidy_tier_a_below,
            tier_b_below=config.subsidy_tier_b_below,
        )
        self._series_cache: dict[str, object] = {}
        self._model_cache: dict[str, object] = {}
        self._analytics_lock = threading.Lock()

        self._bootstrap_officers()

    # --- workflow persistence -------------------------------------------

    def _journal_event(self, event: dict):
        self._event_seq += 1
        self._events_log.append({"seq": self._event_seq, "event": event})
        if self._event_seq % self._snapshot_every == 0:
            self._write_workflow_snapshot()

    def _write_workflow_snapshot(self):
        events = []
        for request in self.workflow.all_requests():
            for ev in self.workflow.audit_trail(request.request_id):
                events.append(ev.to_dict())
        atomic_write_json(
            self.data_dir / WORKFLOW_SNAPSHOT,
            {"seq": self._event_seq, "events": events},
        )

    def _recover_workflow(self) -> WorkflowStore:
        snapshot = read_json(self.data_dir / WORKFLOW_SNAPSHOT)
        journaled = self._events_log.read_all()
        if snapshot is None:
            events = [row["event"] for row in journaled]
            self._event_seq = journaled[-1]["seq"] if journaled else 0
        else:
            watermark = snapshot["seq"]
            events = snapshot["events"] + [
                row["event"] for row in journaled if row["seq"] > watermark
            ]
            self._event_seq = max(
                watermark, journaled[-1]["seq"] if journaled else watermark
            )
        return WorkflowStore.from_events(events, journal=self._journal_event)

    # --- officer provisioning --------------------------------------------

    def _bootstrap_officers(self):
        for officer in self.config.bootstrap_officers:
            if not self.accounts.has_email(officer["email"]):
                self.accounts.register(
                    full_name=officer.get("full_name", "Officer"),
                    email=officer["email"],
                    phone=officer.get("phone", ""),
                    password=officer["password"],
                    role="officer",
                )

    # --- issuance ----------------------------------------------------------

    def issue_for_request(self, request) -> dict[str, str]:
        """Generate, register, and return one DE-ID per selected parcel."""
        issued_at = datetime.now(timezone.utc).isoformat()
        out: dict[str, str] = {}
        for pid in request.selected_parcels:
            parcel = self.registry.parcels[pid]
            record = generate_deid(
                request.cin,
                pid,
                secrets.randbits(63),
                parcel.property_type,
                issued_at=issued_at,
                hash_name=self.config.deid_hash,
            )
            self.issuance.register(record)
            out[pid] = record.deid
        return out

    def signed_uri(self, deid: str) -> str:
        record = self.issuance.get(deid)
        if record is None:
            raise NotFound(f"unknown DE-ID {deid}")
        iat = int(datetime.fromisoformat(record.issued_at).timestamp())
        return sign_payload(record.deid, iat, self.config.issuance_key()).uri

    # --- analytics ---------------------------------------------------------

    def series_for(self, deid: str):
        record = self.issuance.get(deid)
        if record is None:
            raise NotFound(f"unknown DE-ID {deid}")
        with self._analytics_lock:
            if deid not in self._series_cache:
                parcel = self.registry.parcels[record.parcel_id]
                end = self.registry.as_of
                start = end - timedelta(days=self.config.series_days)
                self._series_cache[deid] = synthesize_series(
                    parcel,
                    start,
                    end,
                    seed=derived_seed(self.config.seed_params.seed, "series", deid),
                    series_id=deid,
                )
            return self._series_cache[deid]

    def forecast_for(self, deid: str, horizon_days: int):
        record = self.issuance.get(deid)
        if record is None:
            raise NotFound(f"unknown DE-ID {deid}")
        series = self.series_for(deid)
        parcel = self.registry.parcels[record.parcel_id]
        with self._analytics_lock:
            model = self._model_cache.get(deid)
        if model is None:
            rows = build_features(series, parcel.property_type)
            model = train_forecaster(
                rows, BoostingParams(), seed=derived_seed(self.config.seed_params.seed, deid)
            )
            with self._analytics_lock:
                self._model_cache[deid] = model
        return model, forecast(model, series, parcel.property_type, horizon_days)

    def tier_for(self, deid: str):
        return subsidy_tier(self.series_for(deid), self.subsidy)

    def owner_account_of(self, deid: str) -> str | None:
        for request in self.workflow.all_requests():
            if any(d == deid for _, d in request.deids):
                return request.account_id
        return None

    def close(self):
        self._accounts_log.close()
        self._sessions_log.close()
        self._issuance_log.close()
        self._events_log.close()
