"""DE-ID request lifecycle: state machine, audit trail, officer queue.

Event-sourced: every accepted transition appends a hash-chained audit
event carrying enough payload to rebuild the request by folding, which is
also how persistence recovery works. Per-request transitions serialize
through a compare-and-set on the version counter.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable

from .canonical import canonical_json, sha256_hex
from .errors import (
    DuplicateRequest,
    EmptySelection,
    EvidenceMissing,
    InvalidTransition,
    NotFound,
    NotOwner,
    ReasonRequired,
    ValidationIncomplete,
    VersionConflict,
)


class State(str, Enum):
    DRAFT = "Draft"
    IDENTITY_VERIFIED = "IdentityVerified"
    PROPERTIES_SELECTED = "PropertiesSelected"
    DOCUMENTS_VALIDATED = "DocumentsValidated"
    PENDING_APPROVAL = "PendingApproval"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    ISSUED = "Issued"


class EventKind(str, Enum):
    IDENTITY_VERIFIED = "identity_verified"
    PROPERTIES_SELECTED = "properties_selected"
    DOCUMENTS_VALIDATED = "documents_validated"
    SUBMITTED = "submitted"
    APPROVED = "approved"
    REJECTED = "rejected"
    ISSUED = "issued"


# audit-only marker, not a transition event
CREATED = "created"

TRANSITIONS: dict[tuple[State, EventKind], State] = {
    (State.DRAFT, EventKind.IDENTITY_VERIFIED): State.IDENTITY_VERIFIED,
    (State.IDENTITY_VERIFIED, EventKind.PROPERTIES_SELECTED): State.PROPERTIES_SELECTED,
    (State.PROPERTIES_SELECTED, EventKind.DOCUMENTS_VALIDATED): State.DOCUMENTS_VALIDATED,
    (State.DOCUMENTS_VALIDATED, EventKind.SUBMITTED): State.PENDING_APPROVAL,
    (State.PENDING_APPROVAL, EventKind.APPROVED): State.APPROVED,
    (State.PENDING_APPROVAL, EventKind.REJECTED): State.REJECTED,
    (State.APPROVED, EventKind.ISSUED): State.ISSUED,
}

TERMINAL_STATES = (State.REJECTED, State.ISSUED)


@dataclass(frozen=True)
class OfficerDecision:
    officer_id: str
    verdict: str  # approve | reject
    reason: str
    decided_at: str  # ISO instant

    def to_dict(self) -> dict:
        return {
            "officer_id": self.officer_id,
            "verdict": self.verdict,
            "reason": self.reason,
            "decided_at": self.decided_at,
        }


@dataclass(frozen=True)
class WorkflowEvent:
    kind: EventKind
    actor: str
    payload: dict


@dataclass(frozen=True)
class AuditEvent:
    request_id: str
    sequence_no: int
    kind: str
    actor: str
    payload: dict
    occurred_at: str
    prev_hash: str
    hash: str

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "sequence_no": self.sequence_no,
            "kind": self.kind,
            "actor": self.actor,
            "payload": self.payload,
            "occurred_at": self.occurred_at,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
        }


GENESIS_HASH = "0" * 64


def _chain_hash(prev_hash: str, body: dict) -> str:
    return sha256_hex((prev_hash + canonical_json(body)).encode("utf-8"))


def make_audit_event(request_id: str, sequence_no: int, kind: str, actor: str,
                     payload: dict, occurred_at: str, prev_hash: str) -> AuditEvent:
    body = {
        "request_id": request_id,
        "sequence_no": sequence_no,
        "kind": kind,
        "actor": actor,
        "payload": payload,
        "occurred_at": occurred_at,
    }
    return AuditEvent(**body, prev_hash=prev_hash, hash=_chain_hash(prev_hash, body))


def verify_chain(events: Iterable[AuditEvent]) -> bool:
    """Recompute the hash chain; any mutation or gap breaks it."""
    prev = GENESIS_HASH
    expected_seq = 1
    for ev in events:
        if ev.sequence_no != expected_seq or ev.prev_hash != prev:
            return False
        body = {
            "request_id": ev.request_id,
            "sequence_no": ev.sequence_no,
            "kind": ev.kind,
            "actor": ev.actor,
            "payload": ev.payload,
            "occurred_at": ev.occurred_at,
        }
        if _chain_hash(prev, body) != ev.hash:
            return False
        prev = ev.hash
        expected_seq += 1
    return True


@dataclass(frozen=True)
class DeIdRequest:
    request_id: str
    account_id: str
    cin: str | None
    state: State
    version: int
    selected_parcels: tuple[str, ...] = ()
    validation_reports: tuple[dict, ...] = ()
    match: dict | None = None
    decision: OfficerDecision | None = None
    deids: tuple[tuple[str, str], ...] = ()  # (parcel_id, deid), one per parcel
    timestamps: dict = field(default_factory=dict)
    submitted_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "account_id": self.account_id,
            "cin": self.cin,
            "state": self.state.value,
            "version": self.version,
            "selected_parcels": list(self.selected_parcels),
            "validation_reports": list(self.validation_reports),
            "match": self.match,
            "decision": self.decision.to_dict() if self.decision else None,
            "deids": {pid: deid for pid, deid in self.deids},
            "timestamps": dict(self.timestamps),
            "submitted_at": self.submitted_at,
        }


def _check_evidence(event: WorkflowEvent, request: DeIdRequest):
    p = event.payload
    if event.kind == EventKind.IDENTITY_VERIFIED:
        match = p.get("match")
        if not match or "score" not in match or "threshold" not in match:
            raise EvidenceMissing("identity event needs a match result")
        if not match.get("is_match"):
            raise EvidenceMissing("match result is not a pass")
        if not p.get("cin"):
            raise EvidenceMissing("identity event needs the verified CIN")
    elif event.kind == EventKind.PROPERTIES_SELECTED:
        if not p.get("parcel_ids"):
            raise EmptySelection("no parcels selected")
    elif event.kind == EventKind.DOCUMENTS_VALIDATED:
        reports = p.get("reports")
        if reports is None:
            raise EvidenceMissing("validation event needs reports")
        covered = {r.get("subject_id") for r in reports}
        if set(request.selected_parcels) - covered:
            raise EvidenceMissing("reports do not cover every selected parcel")
    elif event.kind == EventKind.SUBMITTED:
        reports = request.validation_reports
        if not reports:
            raise ValidationIncomplete("no validation reports attached")
        invalid = [r["subject_id"] for r in reports if r.get("verdict") != "valid"]
        if invalid:
            raise ValidationIncomplete(
                f"invalid reports for: {', '.join(sorted(invalid))}", parcels=invalid
            )
    elif event.kind in (EventKind.APPROVED, EventKind.REJECTED):
        decision = p.get("decision")
        if not decision or not decision.get("officer_id"):
            raise EvidenceMissing("decision event needs an officer decision")
        if event.kind == EventKind.REJECTED and not decision.get("reason", "").strip():
            raise ReasonRequired("rejection requires a non-empty reason")
    elif event.kind == EventKind.ISSUED:
        deids = p.get("deids")
        if not deids:
            raise EvidenceMissing("issue event needs the generated DE-IDs")
        if set(deids) != set(request.selected_parcels):
            raise EvidenceMissing("issue event must cover exactly the selected parcels")


def transition(request: DeIdRequest, event: WorkflowEvent,
               occurred_at: str | None = None) -> DeIdRequest:
    """Apply one event; only the legal table moves, evidence enforced."""
    target = TRANSITIONS.get((request.state, event.kind))
    if target is None:
        raise InvalidTransition(
            f"event {event.kind.value} not legal in state {request.state.value}",
            state=request.state.value,
            event=event.kind.value,
        )
    _check_evidence(event, request)
    occurred_at = occurred_at or _now_iso()
    p = event.payload
    updates: dict = {
        "state": target,
        "version": request.version + 1,
        "timestamps": {**request.timestamps, target.value: occurred_at},
    }
    if event.kind == EventKind.IDENTITY_VERIFIED:
        updates["cin"] = p["cin"]
        updates["match"] = p["match"]
    elif event.kind == EventKind.PROPERTIES_SELECTED:
        updates["selected_parcels"] = tuple(sorted(p["parcel_ids"]))
    elif event.kind == EventKind.DOCUMENTS_VALIDATED:
        updates["validation_reports"] = tuple(p["reports"])
    elif event.kind == EventKind.SUBMITTED:
        updates["submitted_at"] = occurred_at
    elif event.kind in (EventKind.APPROVED, EventKind.REJECTED):
        d = p["decision"]
        updates["decision"] = OfficerDecision(
            officer_id=d["officer_id"],
            verdict=d["verdict"],
            reason=d.get("reason", ""),
            decided_at=occurred_at,
        )
    elif event.kind == EventKind.ISSUED:
        updates["deids"] = tuple(sorted(p["deids"].items()))
    return replace(request, **updates)


def replay(events: Iterable[AuditEvent]) -> DeIdRequest:
    """Fold audit events back into the request they describe."""
    request: DeIdRequest | None = None
    for ev in events:
        if ev.kind == CREATED:
            request = DeIdRequest(
                request_id=ev.request_id,
                account_id=ev.payload["account_id"],
                cin=ev.payload.get("cin"),
                state=State.DRAFT,
                version=1,
                timestamps={State.DRAFT.value: ev.occurred_at},
            )
        else:
            if request is None:
                raise ValueError("event stream does not start with creation")
            request = transition(
                request,
                WorkflowEvent(kind=EventKind(ev.kind), actor=ev.actor, payload=ev.payload),
                occurred_at=ev.occurred_at,
            )
    if request is None:
        raise ValueError("empty event stream")
    return request


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class WorkflowStore:
    """In-memory request store with audit journal and officer queue.

    ``journal`` (when set) receives every audit event dict after it is
    applied; the service layer uses it for durable append-ahead logging.
    """

    def __init__(self, journal: Callable[[dict], None] | None = None,
                 clock: Callable[[], str] = _now_iso):
        self._requests: dict[str, DeIdRequest] = {}
        self._audit: dict[str, list[AuditEvent]] = {}
        self._active_pairs: dict[tuple[str, str], str] = {}  # (cin, parcel) -> request
        self._lock = threading.RLock()
        self._journal = journal
        self._clock = clock

    # creation ------------------------------------------------------------

    def create_request(self, account_id: str, actor: str | None = None,
                       request_id: str | None = None) -> DeIdRequest:
        with self._lock:
            request_id = request_id or uuid.uuid4().hex
            now = self._clock()
            request = DeIdRequest(
                request_id=request_id,
                account_id=account_id,
                cin=None,
                state=State.DRAFT,
                version=1,
                timestamps={State.DRAFT.value: now},
            )
            self._requests[request_id] = request
            self._append_audit(
                request_id, CREATED, actor or account_id, {"account_id": account_id}, now
            )
            return request

    # transitions ----------------------------------------------------------

    def apply(self, request_id: str, event: WorkflowEvent,
              expected_version: int | None = None) -> DeIdRequest:
        with self._lock:
            request = self.get(request_id)
            if expected_version is not None and request.version != expected_version:
                raise VersionConflict(
                    f"request at version {request.version}, expected {expected_version}",
                    current_version=request.version,
                )
            now = self._clock()
            updated = transition(request, event, occurred_at=now)
            if event.kind == EventKind.PROPERTIES_SELECTED:
                self._claim_pairs(updated)
            if event.kind == EventKind.REJECTED:
                self._release_pairs(updated)
            self._requests[request_id] = updated
            self._append_audit(request_id, event.kind.value, event.actor, event.payload, now)
            return updated

    def _claim_pairs(self, request: DeIdRequest):
        pairs = [(request.cin, pid) for pid in request.selected_parcels]
        for pair in pairs:
            holder = self._active_pairs.get(pair)
            if holder is not None and holder != request.request_id:
                raise DuplicateRequest(
                    f"active request {holder} already covers parcel {pair[1]} for this CIN",
                    parcel_id=pair[1],
                )
        for pair in pairs:
            self._active_pairs[pair] = request.request_id

    def _release_pairs(self, request: DeIdRequest):
        for pid in request.selected_parcels:
            self._active_pairs.pop((request.cin, pid), None)

    def _append_audit(self, request_id: str, kind: str, actor: str, payload: dict, now: str):
        trail = self._audit.setdefault(request_id, [])
        prev = trail[-1].hash if trail else GENESIS_HASH
        event = make_audit_event(
            request_id, len(trail) + 1, kind, actor, payload, now, prev
        )
        trail.append(event)
        if self._journal is not None:
            self._journal(event.to_dict())

    # convenience operations -------------------------------------------------

    def attach_properties(self, request_id: str, parcel_ids: list[str], registry,
                          actor: str | None = None) -> DeIdRequest:
        """Select parcels after checking ownership against the registry."""
        with self._lock:
            request = self.get(request_id)
            if not parcel_ids:
                raise EmptySelection("no parcels selected")
            if request.state != State.IDENTITY_VERIFIED:
                raise InvalidTransition(
                    f"cannot select properties in state {request.state.value}",
                    state=request.state.value,
                    event=EventKind.PROPERTIES_SELECTED.value,
                )
            owned = {p.parcel_id for p in registry.list_parcels_by_owner(request.cin)}
            for pid in parcel_ids:
                if pid not in owned:
                    raise NotOwner(f"parcel {pid} is not owned by {request.cin}", parcel_id=pid)
            event = WorkflowEvent(
                kind=EventKind.PROPERTIES_SELECTED,
                actor=actor or request.account_id,
                payload={"parcel_ids": sorted(parcel_ids)},
            )
            return self.apply(request_id, event)

    def submit_for_approval(self, request_id: str, actor: str | None = None) -> DeIdRequest:
        request = self.get(request_id)
        event = WorkflowEvent(
            kind=EventKind.SUBMITTED, actor=actor or request.account_id, payload={}
        )
        return self.apply(request_id, event)

    def decide(self, officer_id: str, request_id: str, verdict: str, reason: str,
               expected_version: int) -> DeIdRequest:
        if verdict not in ("approve", "reject"):
            raise EvidenceMissing(f"verdict must be approve or reject, got {verdict!r}")
        if verdict == "reject" and not reason.strip():
            raise ReasonRequired("rejection requires a non-empty reason")
        kind = EventKind.APPROVED if verdict == "approve" else EventKind.REJECTED
        event = WorkflowEvent(
            kind=kind,
            actor=officer_id,
            payload={
                "decision": {"officer_id": officer_id, "verdict": verdict, "reason": reason}
            },
        )
        return self.apply(request_id, event, expected_version=expected_version)

    def list_pending(self, page: int = 1, page_size: int = 50) -> list[DeIdRequest]:
        """PendingApproval requests, oldest submission first (FIFO)."""
        with self._lock:
            pending = [
                r for r in self._requests.values() if r.state == State.PENDING_APPROVAL
            ]
            pending.sort(key=lambda r: (r.submitted_at, r.request_id))
            start = (max(page, 1) - 1) * page_size
            return pending[start : start + page_size]

    def pending_count(self) -> int:
        with self._lock:
            return sum(1 for r in self._requests.values() if r.state == State.PENDING_APPROVAL)

    # reads ------------------------------------------------------------------

    def get(self, request_id: str) -> DeIdRequest:
        with self._lock:
            request = self._requests.get(request_id)
            if request is None:
                raise NotFound(f"unknown request {request_id}", request_id=request_id)
            return request

    def all_requests(self) -> list[DeIdRequest]:
        with self._lock:
            return list(self._requests.values())

    def audit_trail(self, request_id: str) -> list[AuditEvent]:
        with self._lock:
            if request_id not in self._audit:
                raise NotFound(f"unknown request {request_id}", request_id=request_id)
            return list(self._audit[request_id])

    def export_audit_ndjson(self) -> str:
        """Full audit log as newline-delimited JSON, hash chain included."""
        with self._lock:
            lines = []
            for request_id in sorted(self._audit):
                for ev in self._audit[request_id]:
                    lines.append(canonical_json(ev.to_dict()))
            return "".join(line + "\n" for line in lines)

    # recovery ----------------------------------------------------------------

    @classmethod
    def from_events(cls, events: Iterable[dict],
                    journal: Callable[[dict], None] | None = None,
                    clock: Callable[[], str] = _now_iso) -> "WorkflowStore":
        """Rebuild a store by folding journaled audit events."""
        store = cls(journal=None, clock=clock)
        for raw in events:
            ev = AuditEvent(**raw)
            store._audit.setdefault(ev.request_id, []).append(ev)
        for request_id, trail in store._audit.items():
            request = replay(trail)
            store._requests[request_id] = request
            if request.cin and request.selected_parcels and request.state != State.REJECTED:
                for pid in request.selected_parcels:
                    store._active_pairs[(request.cin, pid)] = request_id
        store._journal = journal
        return store
