import pytest
from fastapi.testclient import TestClient

from conftest import decode_qr_matrix
from nourid.config import PlatformConfig, SeedParams
from nourid.deid import VerifyStatus, verify_payload
from nourid.service import ServiceState, create_app


def make_config(tmp_path, **overrides) -> PlatformConfig:
    config = PlatformConfig(
        data_dir=str(tmp_path / "data"),
        scrypt_n=2**12,
        seed_params=SeedParams(farmers=4, entrepreneurs=4, households=4, seed=77),
        **overrides,
    )
    return config


@pytest.fixture()
def client(tmp_path):
    config = make_config(tmp_path)
    app = create_app(config)
    with TestClient(app, raise_server_exceptions=False) as c:
        c.platform = app.state.platform
        yield c


def register_and_login(client, email="amina@example.ma", password="citizen-pass-1"):
    r = client.post(
        "/api/v1/accounts",
        json={"full_name": "Amina Test", "email": email, "phone": "+212", "password": password},
    )
    assert r.status_code == 201, r.text
    r = client.post("/api/v1/sessions", json={"email": email, "password": password})
    assert r.status_code == 201, r.text
    return {"Authorization": f"Bearer {r.json()['token']}"}


def officer_login(client):
    officer = client.platform.config.bootstrap_officers[0]
    r = client.post(
        "/api/v1/sessions",
        json={"email": officer["email"], "password": officer["password"]},
    )
    assert r.status_code == 201, r.text
    return {"Authorization": f"Bearer {r.json()['token']}"}


def run_citizen_to_submission(client, headers, cin):
    r = client.post("/api/v1/requests", headers=headers, json={})
    request_id = r.json()["request_id"]
    r = client.post(
        f"/api/v1/requests/{request_id}/identity", headers=headers,
        json={"cin": cin, "simulate": True},
    )
    assert r.status_code == 200, r.text
    r = client.get("/api/v1/properties", headers=headers, params={"cin": cin})
    parcels = [p["parcel_id"] for p in r.json()["parcels"]]
    r = client.post(
        f"/api/v1/requests/{request_id}/properties", headers=headers,
        json={"parcel_ids": parcels},
    )
    assert r.status_code == 200, r.text
    r = client.post(f"/api/v1/requests/{request_id}/validate", headers=headers)
    assert r.status_code == 200, r.text
    r = client.post(f"/api/v1/requests/{request_id}/submit", headers=headers)
    assert r.status_code == 200, r.text
    return request_id, r.json()


class TestAccounts:
    def test_register_and_login(self, client):
        headers = register_and_login(client)
        assert "Authorization" in headers

    def test_duplicate_email(self, client):
        register_and_login(client)
        r = client.post(
            "/api/v1/accounts",
            json={
                "full_name": "Other",
                "email": "amina@example.ma",
                "phone": "",
                "password": "long-enough-pass",
            },
        )
        assert r.status_code == 409
        assert r.json()["code"] == "duplicate_email"

    def test_weak_password(self, client):
        r = client.post(
            "/api/v1/accounts",
            json={"full_name": "X", "email": "x@y.ma", "phone": "", "password": "short"},
        )
        assert r.status_code == 400
        assert r.json()["code"] == "weak_password"

    def test_invalid_email(self, client):
        r = client.post(
            "/api/v1/accounts",
            json={"full_name": "X", "email": "nope", "phone": "", "password": "long-enough-1"},
        )
        assert r.status_code == 400
        assert r.json()["code"] == "invalid_email"

    def test_no_account_enumeration(self, client):
        register_and_login(client, email="real@example.ma")
        wrong_pw = client.post(
            "/api/v1/sessions", json={"email": "real@example.ma", "password": "wrong-password"}
        )
        unknown = client.post(
            "/api/v1/sessions", json={"email": "ghost@example.ma", "password": "wrong-password"}
        )
        assert wrong_pw.status_code == unknown.status_code == 401
        assert wrong_pw.json() == unknown.json()

    def test_bad_token_unauthorized(self, client):
        r = client.post("/api/v1/requests", headers={"Authorization": "Bearer bogus"}, json={})
        assert r.status_code == 401

    def test_expired_session_rejected(self, tmp_path):
        config = make_config(tmp_path, session_ttl_seconds=-1)
        app = create_app(config)
        with TestClient(app, raise_server_exceptions=False) as client:
            client.platform = app.state.platform
            headers = register_and_login(client)
            r = client.post("/api/v1/requests", headers=headers, json={})
            assert r.status_code == 401


class TestAuthorization:
    def test_citizen_token_on_officer_endpoints(self, client):
        headers = register_and_login(client)
        assert client.get("/api/v1/officer/queue", headers=headers).status_code == 403
        r = client.post(
            "/api/v1/officer/requests/xyz/decision", headers=headers,
            json={"verdict": "approve", "expected_version": 1},
        )
        assert r.status_code == 403

    def test_officer_token_on_citizen_endpoints(self, client):
        headers = officer_login(client)
        assert client.post("/api/v1/requests", headers=headers, json={}).status_code == 403
        cin = sorted(client.platform.registry.citizens)[0]
        r = client.get("/api/v1/properties", headers=headers, params={"cin": cin})
        assert r.status_code == 403

    def test_foreign_request_forbidden(self, client):
        headers_a = register_and_login(client, email="a@x.ma")
        headers_b = register_and_login(client, email="b@x.ma")
        request_id = client.post("/api/v1/requests", headers=headers_a, json={}).json()[
            "request_id"
        ]
        r = client.get(f"/api/v1/requests/{request_id}", headers=headers_b)
        assert r.status_code == 403


class TestCitizenFlow:
    def test_full_happy_path_reaches_issued_with_decodable_qr(self, client):
        headers = register_and_login(client)
        cin = sorted(client.platform.registry.citizens)[0]
        request_id, submitted = run_citizen_to_submission(client, headers, cin)
        assert submitted["state"] == "PendingApproval"

        off = officer_login(client)
        queue = client.get("/api/v1/officer/queue", headers=off).json()
        entry = next(q for q in queue["requests"] if q["request_id"] == request_id)
        r = client.post(
            f"/api/v1/officer/requests/{request_id}/decision", headers=off,
            json={"verdict": "approve", "expected_version": entry["version"]},
        )
        assert r.status_code == 200, r.text
        decided = r.json()
        assert decided["state"] == "Issued"
        assert decided["deids"]

        final = client.get(f"/api/v1/requests/{request_id}", headers=headers).json()
        assert final["state"] == "Issued"
        for parcel_id, deid in final["deids"].items():
            record = client.get(f"/api/v1/deids/{deid}", headers=headers)
            assert record.status_code == 200
            body = record.json()
            assert body["parcel_id"] == parcel_id
            assert body["subsidy"]["tier"] in "ABC"
            uri = body["uri"]
            assert (
                verify_payload(uri, client.platform.config.issuance_key())
                is VerifyStatus.OK
            )

            svg = client.get(f"/api/v1/deids/{deid}/qr.svg", headers=headers)
            assert svg.status_code == 200
            assert svg.headers["content-type"].startswith("image/svg+xml")
            # decode the QR matrix itself for the same payload
            from nourid.qr import encode_qr

            symbol = encode_qr(uri.encode(), "H")
            assert decode_qr_matrix(symbol.modules) == uri

    def test_wrong_cin_identity(self, client):
        headers = register_and_login(client)
        request_id = client.post("/api/v1/requests", headers=headers, json={}).json()[
            "request_id"
        ]
        r = client.post(
            f"/api/v1/requests/{request_id}/identity", headers=headers,
            json={"cin": "ZZ99999", "simulate": True},
        )
        assert r.status_code == 404
        r = client.post(
            f"/api/v1/requests/{request_id}/identity", headers=headers,
            json={"cin": "123", "simulate": True},
        )
        assert r.status_code == 400

    def test_selecting_foreign_parcel(self, client):
        headers = register_and_login(client)
        cins = sorted(client.platform.registry.citizens)
        cin, other = cins[0], cins[1]
        request_id = client.post("/api/v1/requests", headers=headers, json={}).json()[
            "request_id"
        ]
        r = client.post(
            f"/api/v1/requests/{request_id}/identity", headers=headers,
            json={"cin": cin, "simulate": True},
        )
        assert r.status_code == 200
        foreign = client.platform.registry.list_parcels_by_owner(other)[0].parcel_id
        r = client.post(
            f"/api/v1/requests/{request_id}/properties", headers=headers,
            json={"parcel_ids": [foreign]},
        )
        assert r.status_code == 403
        assert r.json()["code"] == "not_owner"

    def test_stale_version_decision_conflict(self, client):
        headers = register_and_login(client)
        cin = sorted(client.platform.registry.citizens)[2]
        request_id, submitted = run_citizen_to_submission(client, headers, cin)
        off = officer_login(client)
        ok = client.post(
            f"/api/v1/officer/requests/{request_id}/decision", headers=off,
            json={"verdict": "approve", "expected_version": submitted["version"]},
        )
        assert ok.status_code == 200
        stale = client.post(
            f"/api/v1/officer/requests/{request_id}/decision", headers=off,
            json={"verdict": "reject", "reason": "late", "expected_version": submitted["version"]},
        )
        assert stale.status_code == 409
        assert stale.json()["code"] in ("version_conflict", "invalid_transition")

    def test_reject_requires_reason(self, client):
        headers = register_and_login(client)
        cin = sorted(client.platform.registry.citizens)[3]
        request_id, submitted = run_citizen_to_submission(client, headers, cin)
        off = officer_login(client)
        r = client.post(
            f"/api/v1/officer/requests/{request_id}/decision", headers=off,
            json={"verdict": "reject", "reason": "", "expected_version": submitted["version"]},
        )
        assert r.status_code == 400
        assert r.json()["code"] == "reason_required"


class TestDashboard:
    @pytest.fixture()
    def issued(self, client):
        headers = register_and_login(client)
        cin = sorted(client.platform.registry.citizens)[1]
        request_id, submitted = run_citizen_to_submission(client, headers, cin)
        off = officer_login(client)
        decided = client.post(
            f"/api/v1/officer/requests/{request_id}/decision", headers=off,
            json={"verdict": "approve", "expected_version": submitted["version"]},
        ).json()
        deid = next(iter(decided["deids"].values()))
        return headers, deid

    def test_consumption_granularities(self, client, issued):
        headers, deid = issued
        totals = {}
        for granularity in ("day", "week", "month", "year"):
            r = client.get(
                f"/api/v1/deids/{deid}/consumption", headers=headers,
                params={"granularity": granularity},
            )
            assert r.status_code == 200, r.text
            body = r.json()
            assert body["granularity"] == granularity
            assert body["buckets"]
            totals[granularity] = body["total_kwh"]
        base = totals["day"]
        for granularity, total in totals.items():
            assert total == pytest.approx(base, rel=1e-9)

    def test_unknown_granularity(self, client, issued):
        headers, deid = issued
        r = client.get(
            f"/api/v1/deids/{deid}/consumption", headers=headers,
            params={"granularity": "quarter"},
        )
        assert r.status_code == 400

    def test_forecast_endpoint(self, client, issued):
        headers, deid = issued
        r = client.get(
            f"/api/v1/deids/{deid}/forecast", headers=headers, params={"horizon": 7}
        )
        assert r.status_code == 200, r.text
        body = r.json()
        assert body["horizon_days"] == 7
        assert len(body["points"]) == 7
        assert all(p["kwh"] >= 0 for p in body["points"])

    def test_foreign_deid_forbidden(self, client, issued):
        _, deid = issued
        stranger = register_and_login(client, email="stranger@x.ma")
        assert client.get(f"/api/v1/deids/{deid}", headers=stranger).status_code == 403

    def test_officer_can_view_deid(self, client, issued):
        _, deid = issued
        off = officer_login(client)
        assert client.get(f"/api/v1/deids/{deid}", headers=off).status_code == 200


class TestPersistence:
    def test_restart_preserves_state(self, tmp_path):
        config = make_config(tmp_path)
        app = create_app(config)
        with TestClient(app, raise_server_exceptions=False) as client:
            client.platform = app.state.platform
            headers = register_and_login(client)
            cin = sorted(client.platform.registry.citizens)[0]
            request_id, submitted = run_citizen_to_submission(client, headers, cin)
            before = {
                r.request_id: r for r in client.platform.workflow.all_requests()
            }
            token = headers["Authorization"].removeprefix("Bearer ")

        # no graceful shutdown: rebuild purely from the data directory
        state2 = ServiceState(config)
        app2 = create_app(config, state=state2)
        with TestClient(app2, raise_server_exceptions=False) as client2:
            after = {r.request_id: r for r in state2.workflow.all_requests()}
            assert after == before
            # session survives restart and the flow can continue
            off = client2.post(
                "/api/v1/sessions",
                json={
                    "email": config.bootstrap_officers[0]["email"],
                    "password": config.bootstrap_officers[0]["password"],
                },
            ).json()
            decided = client2.post(
                f"/api/v1/officer/requests/{request_id}/decision",
                headers={"Authorization": f"Bearer {off['token']}"},
                json={"verdict": "approve", "expected_version": submitted["version"]},
            )
            assert decided.status_code == 200
            assert decided.json()["state"] == "Issued"
            # original citizen token still valid
            r = client2.get(
                f"/api/v1/requests/{request_id}",
                headers={"Authorization": f"Bearer {token}"},
            )
            assert r.status_code == 200
            assert r.json()["state"] == "Issued"
