"""End-to-end persona scenarios against a live HTTP service.

Citizens run concurrently through register -> identity -> properties ->
validate -> submit, an officer bot drains the approval queue, and every
stage is wall-clock timed. Outcome counts always sum to the number of
journeys started.
"""

from __future__ import annotations

import socket
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx
import numpy as np
import uvicorn

from .config import PlatformConfig
from .registry import RegistrySnapshot
from .service import create_app

POLL_INTERVAL_S = 0.05
JOURNEY_TIMEOUT_S = 60.0

STAGES = (
    "register", "login", "create", "identity", "properties",
    "validate", "submit", "approval_wait", "fetch_deid",
)


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class ServiceRunner:
    """uvicorn in a daemon thread; used as a context manager."""

    def __init__(self, config: PlatformConfig, port: int | None = None):
        self.config = config
        self.port = port or free_port()
        app = create_app(config)
        self.state = app.state.platform
        self._server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=self.port, log_level="error")
        )
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self) -> "ServiceRunner":
        self._thread.start()
        deadline = time.time() + 15
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("service did not start in time")
            time.sleep(0.02)
        return self

    def __exit__(self, *exc):
        self._server.should_exit = True
        self._thread.join(timeout=10)


@dataclass
class JourneyResult:
    cin: str
    persona: str
    outcome: str  # issued | rejected | error
    detail: str = ""
    stage_ms: dict = field(default_factory=dict)
    end_to_end_ms: float = 0.0
    deids: list = field(default_factory=list)


def personas_by_cin(snapshot: RegistrySnapshot) -> dict[str, str]:
    type_to_persona = {
        "agricultural": "farmers", "commercial": "entrepreneurs", "household": "households"
    }
    out = {}
    for cin in snapshot.citizens:
        parcels = snapshot.list_parcels_by_owner(cin)
        if parcels:
            out[cin] = type_to_persona[parcels[0].property_type]
    return out


def run_citizen_journey(base_url: str, cin: str, persona: str, run_tag: str,
                        timeout_s: float = JOURNEY_TIMEOUT_S) -> JourneyResult:
    result = JourneyResult(cin=cin, persona=persona, outcome="error")
    stage_ms = result.stage_ms
    start_all = time.perf_counter()

    def mark(stage, t0):
        stage_ms[stage] = (time.perf_counter() - t0) * 1000.0

    try:
        with httpx.Client(base_url=base_url, timeout=30.0) as http:
            email = f"{cin.lower()}-{run_tag}@sim.nourid.ma"
            password = "scenario-pass-0001"

            t0 = time.perf_counter()
            r = http.post(
                "/api/v1/accounts",
                json={"full_name": f"Sim {cin}", "email": email, "phone": "+212",
                      "password": password},
            )
            r.raise_for_status()
            mark("register", t0)

            t0 = time.perf_counter()
            r = http.post("/api/v1/sessions", json={"email": email, "password": password})
            r.raise_for_status()
            headers = {"Authorization": f"Bearer {r.json()['token']}"}
            mark("login", t0)

            t0 = time.perf_counter()
            r = http.post("/api/v1/requests", headers=headers, json={})
            r.raise_for_status()
            request_id = r.json()["request_id"]
            mark("create", t0)

            t0 = time.perf_counter()
            matched = False
            for attempt in range(3):
                r = http.post(
                    f"/api/v1/requests/{request_id}/identity", headers=headers,
                    json={"cin": cin, "simulate": True, "attempt": attempt},
                )
                if r.status_code == 200:
                    matched = True
                    break
                if r.json().get("code") != "match_failed":
                    r.raise_for_status()
            if not matched:
                result.detail = "biometric match failed after 3 attempts"
                return result
            mark("identity", t0)

            t0 = time.perf_counter()
            r = http.get("/api/v1/properties", headers=headers, params={"cin": cin})
            r.raise_for_status()
            parcel_ids = [p["parcel_id"] for p in r.json()["parcels"]]
            r = http.post(
                f"/api/v1/requests/{request_id}/properties", headers=headers,
                json={"parcel_ids": parcel_ids},
            )
            r.raise_for_status()
            mark("properties", t0)

            t0 = time.perf_counter()
            r = http.post(f"/api/v1/requests/{request_id}/validate", headers=headers)
            r.raise_for_status()
            mark("validate", t0)

            t0 = time.perf_counter()
            r = http.post(f"/api/v1/requests/{request_id}/submit", headers=headers)
            if r.status_code != 200:
                if r.json().get("code") == "validation_incomplete":
                    result.outcome = "rejected"
                    result.detail = "document validation failed"
                    result.end_to_end_ms = (time.perf_counter() - start_all) * 1000.0
                    return result
                r.raise_for_status()
            mark("submit", t0)

            t0 = time.perf_counter()
            deadline = start_all + timeout_s
            state = "PendingApproval"
            body = {}
            while time.perf_counter() < deadline:
                r = http.get(f"/api/v1/requests/{request_id}", headers=headers)
                r.raise_for_status()
                body = r.json()
                state = body["state"]
                if state in ("Issued", "Rejected"):
                    break
                time.sleep(POLL_INTERVAL_S)
            mark("approval_wait", t0)
            if state == "Rejected":
                result.outcome = "rejected"
                result.detail = "officer rejected"
                result.end_to_end_ms = (time.perf_counter() - start_all) * 1000.0
                return result
            if state != "Issued":
                result.detail = f"timed out in state {state}"
                return result

            t0 = time.perf_counter()
            deids = list(body["deids"].values())
            r = http.get(f"/api/v1/deids/{deids[0]}", headers=headers)
            r.raise_for_status()
            r = http.get(f"/api/v1/deids/{deids[0]}/qr.svg", headers=headers)
            r.raise_for_status()
            mark("fetch_deid", t0)

            result.outcome = "issued"
            result.deids = deids
            result.end_to_end_ms = (time.perf_counter() - start_all) * 1000.0
            return result
    except Exception as exc:  # journey-level failure, recorded not raised
        result.detail = f"{type(exc).__name__}: {exc}"
        result.end_to_end_ms = (time.perf_counter() - start_all) * 1000.0
        return result


class OfficerBot:
    """Approves every policy-clean pending request after a fixed delay."""

    def __init__(self, base_url: str, config: PlatformConfig, delay_ms: float = 0.0):
        self.base_url = base_url
        self.officer = config.bootstrap_officers[0]
        self.delay_ms = delay_ms
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self.decisions = 0

    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=30)

    def _run(self):
        with httpx.Client(base_url=self.base_url, timeout=30.0) as http:
            r = http.post(
                "/api/v1/sessions",
                json={"email": self.officer["email"], "password": self.officer["password"]},
            )
            r.raise_for_status()
            headers = {"Authorization": f"Bearer {r.json()['token']}"}
            while not self._stop.is_set():
                queue = http.get(
                    "/api/v1/officer/queue", headers=headers,
                    params={"page_size": 100},
                ).json()
                if not queue["requests"]:
                    time.sleep(POLL_INTERVAL_S)
                    continue
                for entry in queue["requests"]:
                    if self.delay_ms:
                        time.sleep(self.delay_ms / 1000.0)
                    verdict = "approve" if entry["reports_valid"] else "reject"
                    r = http.post(
                        f"/api/v1/officer/requests/{entry['request_id']}/decision",
                        headers=headers,
                        json={
                            "verdict": verdict,
                            "reason": "" if verdict == "approve" else "invalid documents",
                            "expected_version": entry["version"],
                        },
                    )
                    if r.status_code == 200:
                        self.decisions += 1


def latency_stats(samples_ms: list[float]) -> dict:
    if not samples_ms:
        return {"p50": 0.0, "p95": 0.0, "max": 0.0, "n": 0}
    arr = np.asarray(samples_ms)
    return {
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
        "max": float(arr.max()),
        "n": int(arr.size),
    }


def run_scenario(config: PlatformConfig, snapshot: RegistrySnapshot, n_per_persona: int,
                 parallelism: int = 8, officer_delay_ms: float = 0.0,
                 port: int | None = None) -> tuple[list[JourneyResult], dict]:
    """Drive n citizens per persona; returns journey results and meta."""
    persona_of = personas_by_cin(snapshot)
    chosen: list[tuple[str, str]] = []
    for persona in ("farmers", "entrepreneurs", "households"):
        cins = sorted(c for c, p in persona_of.items() if p == persona)[:n_per_persona]
        chosen.extend((cin, persona) for cin in cins)

    run_tag = uuid.uuid4().hex[:8]
    with ServiceRunner(config, port=port) as service:
        bot = OfficerBot(service.base_url, config, delay_ms=officer_delay_ms)
        bot.start()
        try:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                results = list(
                    pool.map(
                        lambda item: run_citizen_journey(
                            service.base_url, item[0], item[1], run_tag
                        ),
                        chosen,
                    )
                )
        finally:
            bot.stop()
    meta = {"journeys": len(chosen), "officer_decisions": bot.decisions, "run_tag": run_tag}
    return results, meta


def summarize(results: list[JourneyResult]) -> dict:
    outcomes = {"issued": 0, "rejected": 0, "error": 0}
    personas: dict[str, int] = {}
    for r in results:
        outcomes[r.outcome] += 1
        personas[r.persona] = personas.get(r.persona, 0) + 1
    stage_latency = {
        stage: latency_stats([r.stage_ms[stage] for r in results if stage in r.stage_ms])
        for stage in STAGES
    }
    end_to_end = latency_stats([r.end_to_end_ms for r in results if r.end_to_end_ms > 0])
    return {
        "outcomes": outcomes,
        "personas": personas,
        "stage_latency_ms": stage_latency,
        "end_to_end_ms": end_to_end,
        "errors": [
            {"cin": r.cin, "detail": r.detail} for r in results if r.outcome == "error"
        ],
    }
