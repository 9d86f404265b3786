import threading

import numpy as np
import pytest

from helpers import drive_request, passing_match
from nourid.errors import (
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
from nourid.registry import PopulationConfig, seed_population
from nourid.workflow import (
    TRANSITIONS,
    AuditEvent,
    EventKind,
    State,
    WorkflowEvent,
    WorkflowStore,
    replay,
    verify_chain,
)


@pytest.fixture(scope="module")
def registry():
    return seed_population(
        PopulationConfig(farmers=10, entrepreneurs=10, households=10), seed=99
    )


@pytest.fixture()
def store():
    return WorkflowStore()


def cin_of(registry, index=0):
    return sorted(registry.citizens)[index]


class TestTransitionTable:
    def test_happy_first_step(self, store, registry):
        cin = cin_of(registry)
        request = drive_request(store, registry, cin, State.IDENTITY_VERIFIED)
        assert request.state == State.IDENTITY_VERIFIED
        assert request.version == 2
        assert request.cin == cin

    def test_no_self_loop_on_approved(self, store, registry):
        cin = cin_of(registry)
        request = drive_request(store, registry, cin, State.APPROVED)
        with pytest.raises(InvalidTransition):
            store.decide("off-2", request.request_id, "approve", "", request.version)

    def test_exhaustive_state_event_matrix(self, registry):
        # Drive a fresh request into each state, then attempt every event kind.
        # Exactly the 7 table pairs may succeed; everything else must raise
        # InvalidTransition without changing the stored request.
        legal_observed = set()
        evidence = {
            EventKind.IDENTITY_VERIFIED: passing_match("AB123456"),
            EventKind.PROPERTIES_SELECTED: {"parcel_ids": ["TF-01-100001"]},
            EventKind.DOCUMENTS_VALIDATED: {"reports": []},
            EventKind.SUBMITTED: {},
            EventKind.APPROVED: {
                "decision": {"officer_id": "off", "verdict": "approve", "reason": ""}
            },
            EventKind.REJECTED: {
                "decision": {"officer_id": "off", "verdict": "reject", "reason": "r"}
            },
            EventKind.ISSUED: {},
        }
        for state in State:
            for kind in EventKind:
                store = WorkflowStore()
                cin = cin_of(registry, 3)
                request = drive_request(store, registry, cin, state)
                payload = dict(evidence[kind])
                if kind == EventKind.PROPERTIES_SELECTED:
                    payload = {
                        "parcel_ids": [
                            p.parcel_id for p in registry.list_parcels_by_owner(cin)
                        ]
                    }
                if kind == EventKind.DOCUMENTS_VALIDATED and request.selected_parcels:
                    payload = {
                        "reports": [
                            {"subject_id": pid, "checks": [], "verdict": "valid"}
                            for pid in request.selected_parcels
                        ]
                    }
                if kind == EventKind.ISSUED:
                    payload = {
                        "deids": {
                            pid: f"DE-01-H-AAAA222222BBBBBB-{i:02d}"
                            for i, pid in enumerate(request.selected_parcels, start=10)
                        }
                    }
                event = WorkflowEvent(kind, "tester", payload)
                try:
                    updated = store.apply(request.request_id, event)
                except InvalidTransition:
                    assert store.get(request.request_id) == request
                else:
                    legal_observed.add((state, kind))
                    assert updated.version == request.version + 1
        assert legal_observed == set(TRANSITIONS)

    def test_version_increments_by_one_per_transition(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 1), State.ISSUED)
        assert request.version == 7

    def test_terminal_states_accept_nothing(self, registry):
        for terminal in (State.REJECTED, State.ISSUED):
            store = WorkflowStore()
            request = drive_request(store, registry, cin_of(registry, 2), terminal)
            for kind in EventKind:
                with pytest.raises(InvalidTransition):
                    store.apply(
                        request.request_id,
                        WorkflowEvent(kind, "x", {"deid": "d", "parcel_ids": ["p"]}),
                    )


class TestEvidence:
    def test_failed_match_rejected(self, store, registry):
        request = store.create_request("acct")
        bad = {"cin": "AB123456", "match": {"score": 0.1, "threshold": 0.5, "is_match": False}}
        with pytest.raises(EvidenceMissing):
            store.apply(
                request.request_id, WorkflowEvent(EventKind.IDENTITY_VERIFIED, "acct", bad)
            )

    def test_missing_deid_on_issue(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 4), State.APPROVED)
        with pytest.raises(EvidenceMissing):
            store.apply(request.request_id, WorkflowEvent(EventKind.ISSUED, "system", {}))


class TestAttachProperties:
    def test_subset_selection(self, store, registry):
        cin = cin_of(registry, 5)
        owned = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
        request = drive_request(
            store, registry, cin, State.IDENTITY_VERIFIED
        )
        request = store.attach_properties(request.request_id, owned[:1], registry)
        assert request.state == State.PROPERTIES_SELECTED
        assert request.selected_parcels == tuple(owned[:1])

    def test_selection_stored_sorted(self, store, registry):
        cin = max(
            registry.citizens,
            key=lambda c: len(registry.list_parcels_by_owner(c)),
        )
        owned = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
        if len(owned) < 2:
            pytest.skip("need a citizen with 2+ parcels")
        request = drive_request(store, registry, cin, State.IDENTITY_VERIFIED)
        request = store.attach_properties(request.request_id, list(reversed(owned)), registry)
        assert list(request.selected_parcels) == sorted(owned)

    def test_foreign_parcel_rejected_state_unchanged(self, store, registry):
        cin_a, cin_b = cin_of(registry, 0), cin_of(registry, 1)
        foreign = registry.list_parcels_by_owner(cin_b)[0].parcel_id
        request = drive_request(store, registry, cin_a, State.IDENTITY_VERIFIED)
        with pytest.raises(NotOwner):
            store.attach_properties(request.request_id, [foreign], registry)
        assert store.get(request.request_id).state == State.IDENTITY_VERIFIED

    def test_empty_selection(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 6), State.IDENTITY_VERIFIED)
        with pytest.raises(EmptySelection):
            store.attach_properties(request.request_id, [], registry)

    def test_full_owned_selection_always_succeeds(self, registry):
        for cin in sorted(registry.citizens):
            store = WorkflowStore()
            owned = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
            request = drive_request(store, registry, cin, State.IDENTITY_VERIFIED)
            updated = store.attach_properties(request.request_id, owned, registry)
            assert updated.state == State.PROPERTIES_SELECTED


class TestSubmission:
    def test_all_valid_reports_submit(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 7), State.PENDING_APPROVAL)
        assert request.state == State.PENDING_APPROVAL

    def test_invalid_report_blocks(self, store, registry):
        cin = cin_of(registry, 8)
        request = drive_request(store, registry, cin, State.PROPERTIES_SELECTED)
        reports = [
            {"subject_id": pid, "checks": [], "verdict": "invalid"}
            for pid in request.selected_parcels
        ]
        store.apply(
            request.request_id,
            WorkflowEvent(EventKind.DOCUMENTS_VALIDATED, "acct", {"reports": reports}),
        )
        with pytest.raises(ValidationIncomplete):
            store.submit_for_approval(request.request_id)

    def test_queue_grows_by_one_per_submission(self, registry):
        store = WorkflowStore()
        rng = np.random.default_rng(4)
        count_before = store.pending_count()
        cins = sorted(registry.citizens)
        for i, cin in enumerate(rng.permutation(cins)[:6]):
            drive_request(store, registry, str(cin), State.PENDING_APPROVAL)
            assert store.pending_count() == count_before + i + 1


class TestQueue:
    def test_empty_queue(self, store):
        assert store.list_pending() == []

    def test_fifo_order(self, store, registry):
        ids = []
        for i in (0, 1, 2):
            request = drive_request(store, registry, cin_of(registry, i), State.PENDING_APPROVAL)
            ids.append(request.request_id)
        listed = [r.request_id for r in store.list_pending()]
        assert listed == ids

    def test_pagination_partitions_queue(self, store, registry):
        for i in range(7):
            drive_request(store, registry, cin_of(registry, i), State.PENDING_APPROVAL)
        full = [r.request_id for r in store.list_pending(page_size=100)]
        paged = []
        for page in (1, 2, 3, 4):
            paged.extend(r.request_id for r in store.list_pending(page=page, page_size=2))
        assert paged == full


class TestDecision:
    def test_approve_records_decision(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 1), State.PENDING_APPROVAL)
        updated = store.decide("off-9", request.request_id, "approve", "", request.version)
        assert updated.state == State.APPROVED
        assert updated.decision.officer_id == "off-9"
        assert updated.decision.verdict == "approve"

    def test_stale_version_conflicts(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 2), State.PENDING_APPROVAL)
        store.decide("off-1", request.request_id, "approve", "", request.version)
        with pytest.raises(VersionConflict):
            store.decide("off-2", request.request_id, "reject", "late", request.version)

    def test_concurrent_decisions_one_winner(self, registry):
        store = WorkflowStore()
        request = drive_request(store, registry, cin_of(registry, 3), State.PENDING_APPROVAL)
        outcomes = []
        barrier = threading.Barrier(2)

        def decider(officer):
            barrier.wait()
            try:
                store.decide(officer, request.request_id, "approve", "", request.version)
                outcomes.append("ok")
            except VersionConflict:
                outcomes.append("conflict")

        threads = [threading.Thread(target=decider, args=(f"off-{i}",)) for i in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(outcomes) == ["conflict", "ok"]

    def test_reject_requires_reason(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 4), State.PENDING_APPROVAL)
        with pytest.raises(ReasonRequired):
            store.decide("off-1", request.request_id, "reject", "  ", request.version)

    def test_rejected_is_terminal(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 5), State.REJECTED)
        with pytest.raises(InvalidTransition):
            store.decide("off-1", request.request_id, "approve", "", request.version)


class TestDuplicatePrevention:
    def test_second_active_request_for_same_parcel_refused(self, store, registry):
        cin = cin_of(registry, 6)
        drive_request(store, registry, cin, State.PROPERTIES_SELECTED)
        request2 = store.create_request("acct-2")
        store.apply(
            request2.request_id,
            WorkflowEvent(EventKind.IDENTITY_VERIFIED, "acct-2", passing_match(cin)),
        )
        owned = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
        with pytest.raises(DuplicateRequest):
            store.attach_properties(request2.request_id, owned, registry)

    def test_rejection_releases_the_pair(self, store, registry):
        cin = cin_of(registry, 7)
        drive_request(store, registry, cin, State.REJECTED)
        request2 = store.create_request("acct-2")
        store.apply(
            request2.request_id,
            WorkflowEvent(EventKind.IDENTITY_VERIFIED, "acct-2", passing_match(cin)),
        )
        owned = [p.parcel_id for p in registry.list_parcels_by_owner(cin)]
        updated = store.attach_properties(request2.request_id, owned, registry)
        assert updated.state == State.PROPERTIES_SELECTED


class TestAuditTrail:
    def test_fresh_draft_single_creation_event(self, store):
        request = store.create_request("acct")
        trail = store.audit_trail(request.request_id)
        assert len(trail) == 1
        assert trail[0].kind == "created"
        assert trail[0].sequence_no == 1

    def test_happy_path_has_seven_events_in_stage_order(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 8), State.ISSUED)
        trail = store.audit_trail(request.request_id)
        assert [e.kind for e in trail] == [
            "created",
            "identity_verified",
            "properties_selected",
            "documents_validated",
            "submitted",
            "approved",
            "issued",
        ]
        assert [e.sequence_no for e in trail] == list(range(1, 8))

    def test_unknown_request(self, store):
        with pytest.raises(NotFound):
            store.audit_trail("nope")

    def test_chain_verifies_and_detects_tampering(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 9), State.ISSUED)
        trail = store.audit_trail(request.request_id)
        assert verify_chain(trail)
        tampered = list(trail)
        ev = tampered[3]
        tampered[3] = AuditEvent(
            request_id=ev.request_id,
            sequence_no=ev.sequence_no,
            kind=ev.kind,
            actor="mallory",
            payload=ev.payload,
            occurred_at=ev.occurred_at,
            prev_hash=ev.prev_hash,
            hash=ev.hash,
        )
        assert not verify_chain(tampered)

    def test_replay_reconstructs_state(self, store, registry):
        request = drive_request(store, registry, cin_of(registry, 0), State.ISSUED)
        rebuilt = replay(store.audit_trail(request.request_id))
        assert rebuilt == store.get(request.request_id)

    def test_randomized_run_replay_equality(self, registry):
        # walk many requests to random depths; every fold must equal the store
        rng = np.random.default_rng(17)
        store = WorkflowStore()
        states = list(State)
        for i in range(40):
            cin = cin_of(registry, int(rng.integers(len(registry.citizens))))
            target = states[int(rng.integers(len(states)))]
            try:
                drive_request(store, registry, cin, target, account_id=f"acct-{i}")
            except DuplicateRequest:
                continue
        for request in store.all_requests():
            trail = store.audit_trail(request.request_id)
            assert verify_chain(trail)
            assert replay(trail) == request

    def test_export_ndjson_shape(self, store, registry):
        import json

        drive_request(store, registry, cin_of(registry, 1), State.ISSUED)
        lines = store.export_audit_ndjson().strip().split("\n")
        for line in lines:
            record = json.loads(line)
            assert {"request_id", "sequence_no", "kind", "prev_hash", "hash"} <= set(record)


class TestRecovery:
    def test_from_events_rebuilds_store(self, registry):
        journal: list[dict] = []
        store = WorkflowStore(journal=journal.append)
        drive_request(store, registry, cin_of(registry, 2), State.ISSUED)
        drive_request(store, registry, cin_of(registry, 3), State.PENDING_APPROVAL)
        drive_request(store, registry, cin_of(registry, 4), State.REJECTED)

        rebuilt = WorkflowStore.from_events(journal)
        assert {r.request_id: r for r in rebuilt.all_requests()} == {
            r.request_id: r for r in store.all_requests()
        }
        assert rebuilt.pending_count() == store.pending_count()
