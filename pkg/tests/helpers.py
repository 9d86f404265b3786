"""Shared scenario drivers for workflow-level tests."""

from datetime import date

from nourid.verification import validate_document
from nourid.workflow import EventKind, State, WorkflowEvent, WorkflowStore


def passing_match(cin: str) -> dict:
    return {"cin": cin, "match": {"score": 0.92, "threshold": 0.2, "is_match": True}}


def drive_request(store: WorkflowStore, registry, cin: str, upto: State,
                  account_id: str = "acct", parcel_ids=None, officer_id: str = "off-1"):
    """Walk a fresh request along the happy path up to the given state."""
    request = store.create_request(account_id)
    if upto == State.DRAFT:
        return request

    request = store.apply(
        request.request_id,
        WorkflowEvent(EventKind.IDENTITY_VERIFIED, account_id, passing_match(cin)),
    )
    if upto == State.IDENTITY_VERIFIED:
        return request

    if parcel_ids is None:
        parcel_ids = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
    request = store.attach_properties(request.request_id, parcel_ids, registry)
    if upto == State.PROPERTIES_SELECTED:
        return request

    reports = [
        validate_document(
            registry.fetch_document(pid, "ownership_certificate"), cin, registry.as_of
        ).to_dict()
        for pid in request.selected_parcels
    ]
    request = store.apply(
        request.request_id,
        WorkflowEvent(EventKind.DOCUMENTS_VALIDATED, account_id, {"reports": reports}),
    )
    if upto == State.DOCUMENTS_VALIDATED:
        return request

    request = store.submit_for_approval(request.request_id)
    if upto == State.PENDING_APPROVAL:
        return request

    if upto == State.REJECTED:
        return store.decide(officer_id, request.request_id, "reject", "policy", request.version)

    request = store.decide(officer_id, request.request_id, "approve", "", request.version)
    if upto == State.APPROVED:
        return request

    deids = {pid: f"DE-01-H-AAAA222222BBBBBB-{i:02d}" for i, pid in
             enumerate(request.selected_parcels, start=10)}
    return store.apply(
        request.request_id,
        WorkflowEvent(EventKind.ISSUED, "system", {"deids": deids}),
    )
