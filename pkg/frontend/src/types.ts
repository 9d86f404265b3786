// Mirrors of the /api/v1 response bodies. The UI renders these verbatim;
// it never advances a request state on its own.

export type RequestState =
  | "Draft"
  | "IdentityVerified"
  | "PropertiesSelected"
  | "DocumentsValidated"
  | "PendingApproval"
  | "Approved"
  | "Rejected"
  | "Issued";

export interface SessionResponse {
  token: string;
  expires_at: string;
  role: "citizen" | "officer";
}

export interface MatchResult {
  score: number;
  threshold: number;
  is_match: boolean;
}

export interface ParcelReport {
  subject_id: string;
  verdict: "valid" | "invalid";
  documents?: DocumentReport[];
}

export interface DocumentReport {
  subject_id: string;
  kind: string;
  verdict: "valid" | "invalid";
  checks: { name: string; passed: boolean; detail: string }[];
}

export interface OfficerDecision {
  officer_id: string;
  verdict: "approve" | "reject";
  reason: string;
  decided_at: string;
}

export interface DeIdRequestBody {
  request_id: string;
  account_id: string;
  cin: string | null;
  state: RequestState;
  version: number;
  selected_parcels: string[];
  validation_reports: ParcelReport[];
  match: MatchResult | null;
  decision: OfficerDecision | null;
  deids: Record<string, string>;
  timestamps: Record<string, string>;
  submitted_at: string | null;
}

export interface ParcelInfo {
  parcel_id: string;
  property_type: "household" | "agricultural" | "commercial";
  area_m2: number;
  location: { region: string; locality: string };
}

export interface QueueEntry {
  request_id: string;
  cin: string;
  state: RequestState;
  version: number;
  selected_parcels: string[];
  submitted_at: string;
  reports_valid: boolean;
}

export interface QueuePage {
  page: number;
  page_size: number;
  total_pending: number;
  requests: QueueEntry[];
}

export interface DeIdRecord {
  deid: string;
  cin: string;
  parcel_id: string;
  nonce: number;
  issued_at: string;
  check_digits: string;
  uri: string;
  subsidy: { tier: "A" | "B" | "C"; mean_daily_kwh: number; rationale: string };
}

export interface Bucket {
  period: string;
  total_kwh: number;
  mean_hourly_kwh: number;
  peak_hour: string;
}

export type Granularity = "day" | "week" | "month" | "year";

export interface ConsumptionView {
  granularity: Granularity;
  buckets: Bucket[];
  total_kwh: number;
}

export interface ForecastResponse {
  horizon_days: number;
  validation_mape: number;
  points: { date: string; kwh: number }[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
