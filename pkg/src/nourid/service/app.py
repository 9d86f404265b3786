"""The dual-portal HTTP API (prefix /api/v1).

Citizen endpoints drive the request lifecycle; officer endpoints serve
the approval queue. Every state-changing endpoint delegates to the
workflow engine and responds with the updated request state and version.
Domain errors map to a stable {code, message, details} body.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..analytics import aggregate
from ..config import PlatformConfig
from ..errors import (
    Forbidden,
    IdentityMismatch,
    InvalidCredentials,
    MatchFailed,
    NotFound,
    NourIdError,
)
from ..qr import encode_qr, render_qr
from ..registry import FaceTemplate
from ..verification import capture_probe, match_templates, validate_cin_format, validate_document
from ..workflow import EventKind, State, WorkflowEvent
from .state import ServiceState, derived_seed

API_PREFIX = "/api/v1"

STATUS_BY_CODE = {
    "format_error": 400,
    "invalid_email": 400,
    "weak_password": 400,
    "reason_required": 400,
    "empty_selection": 400,
    "invalid_config": 400,
    "invalid_credentials": 401,
    "forbidden": 403,
    "not_owner": 403,
    "not_found": 404,
    "duplicate_email": 409,
    "version_conflict": 409,
    "invalid_transition": 409,
    "duplicate_request": 409,
    "duplicate_issuance": 409,
    "validation_incomplete": 409,
    "payload_too_large": 413,
    "evidence_missing": 422,
    "match_failed": 422,
    "identity_mismatch": 422,
    "dimension_mismatch": 422,
    "series_too_short": 422,
    "insufficient_data": 422,
    "empty_series": 422,
}


class RegisterBody(BaseModel):
    full_name: str
    email: str
    phone: str = ""
    password: str


class LoginBody(BaseModel):
    email: str
    password: str


class IdentityBody(BaseModel):
    cin: str
    full_name: str | None = None
    date_of_birth: str | None = None
    probe: list[float] | None = None
    simulate: bool = True
    attempt: int = 0


class PropertiesBody(BaseModel):
    parcel_ids: list[str]


class DecisionBody(BaseModel):
    verdict: str
    reason: str = ""
    expected_version: int


def create_app(config: PlatformConfig | None = None,
               state: ServiceState | None = None) -> FastAPI:
    config = config or PlatformConfig()
    if state is None:
        state = ServiceState(config)

    app = FastAPI(title="nourid", docs_url=None, redoc_url=None)
    app.state.platform = state

    # the static portal is served from another origin (or file://)
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(NourIdError)
    async def domain_error_handler(_request: Request, exc: NourIdError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status, content=exc.to_dict())

    # --- auth plumbing ---------------------------------------------------

    def current_account(authorization: str = Header(default="")):
        if not authorization.startswith("Bearer "):
            raise InvalidCredentials("missing bearer token")
        account_id = state.sessions.resolve(authorization.removeprefix("Bearer "))
        return state.accounts.get(account_id)

    def citizen_session(account=Depends(current_account)):
        if account.role != "citizen":
            raise Forbidden("citizen session required")
        return account

    def officer_session(account=Depends(current_account)):
        if account.role != "officer":
            raise Forbidden("officer session required")
        return account

    def owned_request(request_id: str, account):
        request = state.workflow.get(request_id)
        if request.account_id != account.account_id:
            raise Forbidden("request belongs to another account")
        return request

    # --- accounts and sessions -------------------------------------------

    @app.post(API_PREFIX + "/accounts", status_code=201)
    def register_account(body: RegisterBody):
        account = state.accounts.register(
            body.full_name, body.email, body.phone, body.password, role="citizen"
        )
        return {"account_id": account.account_id}

    @app.post(API_PREFIX + "/sessions", status_code=201)
    def open_session(body: LoginBody):
        account = state.accounts.authenticate(body.email, body.password)
        session = state.sessions.create(account.account_id)
        return {
            "token": session.token,
            "expires_at": session.expires_at,
            "role": account.role,
        }

    # --- citizen workflow --------------------------------------------------

    @app.post(API_PREFIX + "/requests", status_code=201)
    def create_request(account=Depends(citizen_session)):
        request = state.workflow.create_request(account.account_id)
        return request.to_dict()

    @app.get(API_PREFIX + "/requests/{request_id}")
    def get_request(request_id: str, account=Depends(current_account)):
        request = state.workflow.get(request_id)
        if account.role != "officer" and request.account_id != account.account_id:
            raise Forbidden("request belongs to another account")
        return request.to_dict()

    @app.post(API_PREFIX + "/requests/{request_id}/identity")
    def verify_identity(request_id: str, body: IdentityBody,
                        account=Depends(citizen_session)):
        request = owned_request(request_id, account)
        cin = validate_cin_format(body.cin)
        citizen = state.registry.lookup_identity(cin)
        today = state.registry.as_of
        if citizen.cin_expiry < today:
            raise MatchFailed(
                "CIN is expired", cin_expiry=citizen.cin_expiry.isoformat()
            )
        if body.full_name and body.full_name.strip().lower() != citizen.full_name.lower():
            raise IdentityMismatch("submitted name does not match the registry record")
        if body.date_of_birth and body.date_of_birth != citizen.date_of_birth.isoformat():
            raise IdentityMismatch("submitted date of birth does not match the registry record")
        if body.probe is not None:
            probe = FaceTemplate.from_vector(body.probe)
        elif body.simulate:
            probe = capture_probe(
                citizen.reference_template,
                config.noise_sigma,
                seed=derived_seed(config.seed_params.seed, "probe", cin, body.attempt),
            )
        else:
            raise MatchFailed("no probe supplied and simulation disabled")
        result = match_templates(probe, citizen.reference_template, state.matcher_threshold)
        if not result.is_match:
            raise MatchFailed(
                f"biometric match failed (score {result.score:.3f})",
                score=result.score,
                threshold=result.threshold,
            )
        updated = state.workflow.apply(
            request_id,
            WorkflowEvent(
                EventKind.IDENTITY_VERIFIED,
                account.account_id,
                {"cin": cin, "match": result.to_dict()},
            ),
        )
        return {"request": updated.to_dict(), "match": result.to_dict()}

    @app.get(API_PREFIX + "/properties")
    def list_properties(cin: str, account=Depends(citizen_session)):
        parcels = state.registry.list_parcels_by_owner(cin)
        return {
            "parcels": [
                {
                    "parcel_id": p.parcel_id,
                    "property_type": p.property_type,
                    "area_m2": p.area_m2,
                    "location": {"region": p.region, "locality": p.locality},
                }
                for p in parcels
            ]
        }

    @app.post(API_PREFIX + "/requests/{request_id}/properties")
    def select_properties(request_id: str, body: PropertiesBody,
                          account=Depends(citizen_session)):
        owned_request(request_id, account)
        updated = state.workflow.attach_properties(
            request_id, body.parcel_ids, state.registry, actor=account.account_id
        )
        return updated.to_dict()

    @app.post(API_PREFIX + "/requests/{request_id}/validate")
    def validate_documents(request_id: str, account=Depends(citizen_session)):
        request = owned_request(request_id, account)
        today = state.registry.as_of
        # one report per parcel; a parcel is valid iff both documents are
        reports = []
        for pid in request.selected_parcels:
            docs = []
            for kind in ("cadastral_plan", "ownership_certificate"):
                doc = state.registry.fetch_document(pid, kind)
                docs.append({**validate_document(doc, request.cin, today).to_dict(),
                             "kind": kind})
            verdict = "valid" if all(d["verdict"] == "valid" for d in docs) else "invalid"
            reports.append({"subject_id": pid, "verdict": verdict, "documents": docs})
        updated = state.workflow.apply(
            request_id,
            WorkflowEvent(
                EventKind.DOCUMENTS_VALIDATED, account.account_id, {"reports": reports}
            ),
        )
        return {"request": updated.to_dict(), "reports": reports}

    @app.post(API_PREFIX + "/requests/{request_id}/submit")
    def submit_request(request_id: str, account=Depends(citizen_session)):
        owned_request(request_id, account)
        updated = state.workflow.submit_for_approval(request_id, actor=account.account_id)
        return updated.to_dict()

    # --- officer portal -------------------------------------------------------

    @app.get(API_PREFIX + "/officer/queue")
    def officer_queue(page: int = Query(default=1, ge=1),
                      page_size: int = Query(default=50, ge=1, le=500),
                      account=Depends(officer_session)):
        pending = state.workflow.list_pending(page=page, page_size=page_size)
        return {
            "page": page,
            "page_size": page_size,
            "total_pending": state.workflow.pending_count(),
            "requests": [
                {
                    "request_id": r.request_id,
                    "cin": r.cin,
                    "state": r.state.value,
                    "version": r.version,
                    "selected_parcels": list(r.selected_parcels),
                    "submitted_at": r.submitted_at,
                    "reports_valid": all(
                        rep.get("verdict") == "valid" for rep in r.validation_reports
                    ),
                }
                for r in pending
            ],
        }

    @app.post(API_PREFIX + "/officer/requests/{request_id}/decision")
    def decide_request(request_id: str, body: DecisionBody,
                       account=Depends(officer_session)):
        updated = state.workflow.decide(
            account.account_id, request_id, body.verdict, body.reason, body.expected_version
        )
        if updated.state == State.APPROVED:
            deids = state.issue_for_request(updated)
            updated = state.workflow.apply(
                request_id, WorkflowEvent(EventKind.ISSUED, "system", {"deids": deids})
            )
        return updated.to_dict()

    # --- DE-ID and dashboard ---------------------------------------------------

    def deid_visible(deid: str, account):
        record = state.issuance.get(deid)
        if record is None:
            raise NotFound(f"unknown DE-ID {deid}")
        if account.role == "officer":
            return record
        owner = state.owner_account_of(deid)
        if owner != account.account_id:
            raise Forbidden("DE-ID belongs to another account")
        return record

    @app.get(API_PREFIX + "/deids/{deid}")
    def get_deid(deid: str, account=Depends(current_account)):
        record = deid_visible(deid, account)
        tier = state.tier_for(deid)
        return {
            **record.to_dict(),
            "uri": state.signed_uri(deid),
            "subsidy": tier.to_dict(),
        }

    @app.get(API_PREFIX + "/deids/{deid}/qr.svg")
    def get_deid_qr(deid: str, account=Depends(current_account)):
        deid_visible(deid, account)
        symbol = encode_qr(state.signed_uri(deid).encode("ascii"), "H")
        return Response(
            content=render_qr(symbol, "svg", scale=8), media_type="image/svg+xml"
        )

    @app.get(API_PREFIX + "/deids/{deid}/consumption")
    def get_consumption(deid: str, granularity: str = Query(default="day"),
                        account=Depends(current_account)):
        deid_visible(deid, account)
        view = aggregate(state.series_for(deid), granularity)
        return view.to_dict()

    @app.get(API_PREFIX + "/deids/{deid}/forecast")
    def get_forecast(deid: str,
                     horizon: int = Query(default=0, ge=0, le=60),
                     account=Depends(current_account)):
        deid_visible(deid, account)
        horizon = horizon or config.forecast_horizon_default
        model, points = state.forecast_for(deid, horizon)
        return {
            "horizon_days": horizon,
            "validation_mape": model.validation_mape,
            "points": [{"date": d.isoformat(), "kwh": v} for d, v in points],
        }

    @app.get(API_PREFIX + "/health")
    def health():
        return {"status": "ok", "time": datetime.now(timezone.utc).isoformat()}

    return app
