// Typed client for the /api/v1 surface. Every error response carries a
// stable {code, message, details} body which becomes an ApiError.

import type {
  ConsumptionView,
  DeIdRecord,
  DeIdRequestBody,
  ForecastResponse,
  Granularity,
  MatchResult,
  ParcelInfo,
  QueuePage,
  SessionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class NourIdClient {
  token: string | null = null;
  role: "citizen" | "officer" | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: Partial<{ code: string; message: string; details: Record<string, unknown> }> = {};
      try {
        payload = await response.json();
      } catch {
        // non-JSON error body: keep the status only
      }
      throw new ApiError(
        response.status,
        payload.code ?? "http_error",
        payload.message ?? `HTTP ${response.status}`,
        payload.details ?? {},
      );
    }
    return (await response.json()) as T;
  }

  async register(fullName: string, email: string, phone: string, password: string) {
    return this.request<{ account_id: string }>("POST", "/accounts", {
      full_name: fullName,
      email,
      phone,
      password,
    });
  }

  async login(email: string, password: string): Promise<SessionResponse> {
    const session = await this.request<SessionResponse>("POST", "/sessions", {
      email,
      password,
    });
    this.token = session.token;
    this.role = session.role;
    return session;
  }

  createRequest() {
    return this.request<DeIdRequestBody>("POST", "/requests", {});
  }

  getRequest(requestId: string) {
    return this.request<DeIdRequestBody>("GET", `/requests/${requestId}`);
  }

  verifyIdentity(requestId: string, cin: string, attempt = 0) {
    return this.request<{ request: DeIdRequestBody; match: MatchResult }>(
      "POST",
      `/requests/${requestId}/identity`,
      { cin, simulate: true, attempt },
    );
  }

  listProperties(cin: string) {
    return this.request<{ parcels: ParcelInfo[] }>(
      "GET",
      `/properties?cin=${encodeURIComponent(cin)}`,
    );
  }

  selectProperties(requestId: string, parcelIds: string[]) {
    return this.request<DeIdRequestBody>("POST", `/requests/${requestId}/properties`, {
      parcel_ids: parcelIds,
    });
  }

  validateDocuments(requestId: string) {
    return this.request<{ request: DeIdRequestBody; reports: unknown[] }>(
      "POST",
      `/requests/${requestId}/validate`,
    );
  }

  submitRequest(requestId: string) {
    return this.request<DeIdRequestBody>("POST", `/requests/${requestId}/submit`);
  }

  officerQueue(page = 1, pageSize = 50) {
    return this.request<QueuePage>(
      "GET",
      `/officer/queue?page=${page}&page_size=${pageSize}`,
    );
  }

  decide(requestId: string, verdict: "approve" | "reject", reason: string, expectedVersion: number) {
    return this.request<DeIdRequestBody>("POST", `/officer/requests/${requestId}/decision`, {
      verdict,
      reason,
      expected_version: expectedVersion,
    });
  }

  getDeid(deid: string) {
    return this.request<DeIdRecord>("GET", `/deids/${deid}`);
  }

  consumption(deid: string, granularity: Granularity) {
    return this.request<ConsumptionView>(
      "GET",
      `/deids/${deid}/consumption?granularity=${granularity}`,
    );
  }

  forecast(deid: string, horizonDays: number) {
    return this.request<ForecastResponse>(
      "GET",
      `/deids/${deid}/forecast?horizon=${horizonDays}`,
    );
  }

  qrSvgUrl(deid: string): string {
    return `${this.baseUrl}/api/v1/deids/${deid}/qr.svg`;
  }

  async fetchQrSvg(deid: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.qrSvgUrl(deid), { headers });
    if (!response.ok) throw new ApiError(response.status, "http_error", "QR fetch failed");
    return response.text();
  }
}
