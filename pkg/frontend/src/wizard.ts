// Citizen flow controller. Steps are derived from the last
// server-confirmed request body; nothing transitions client-side.

import { ApiError, NourIdClient } from "./api.js";
import type { DeIdRequestBody, ParcelInfo } from "./types.js";

export type WizardStep =
  | "identity"
  | "properties"
  | "validate"
  | "submit"
  | "pending"
  | "issued"
  | "rejected";

const STEP_BY_STATE: Record<string, WizardStep> = {
  Draft: "identity",
  IdentityVerified: "properties",
  PropertiesSelected: "validate",
  DocumentsValidated: "submit",
  PendingApproval: "pending",
  Approved: "pending",
  Rejected: "rejected",
  Issued: "issued",
};

export class CitizenWizard {
  request: DeIdRequestBody | null = null;
  properties: ParcelInfo[] = [];
  lastError: ApiError | null = null;
  identityAttempts = 0;

  constructor(private readonly client: NourIdClient) {}

  get step(): WizardStep {
    if (!this.request) return "identity";
    const step = STEP_BY_STATE[this.request.state];
    if (!step) throw new Error(`unknown server state ${this.request.state}`);
    return step;
  }

  /** Zero selected parcels must keep the continue button disabled. */
  canContinue(selection: string[]): boolean {
    return selection.length > 0;
  }

  private async guard<T>(action: () => Promise<T>): Promise<T> {
    this.lastError = null;
    try {
      return await action();
    } catch (error) {
      if (error instanceof ApiError) this.lastError = error;
      throw error;
    }
  }

  async start(): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      this.request = await this.client.createRequest();
      return this.request;
    });
  }

  async verifyIdentity(cin: string): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      const attempt = this.identityAttempts++;
      const { request } = await this.client.verifyIdentity(
        this.requireRequest().request_id,
        cin,
        attempt,
      );
      this.request = request;
      return request;
    });
  }

  async loadProperties(): Promise<ParcelInfo[]> {
    return this.guard(async () => {
      const cin = this.requireRequest().cin;
      if (!cin) throw new Error("identity not verified yet");
      this.properties = (await this.client.listProperties(cin)).parcels;
      return this.properties;
    });
  }

  async selectProperties(parcelIds: string[]): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      this.request = await this.client.selectProperties(
        this.requireRequest().request_id,
        parcelIds,
      );
      return this.request;
    });
  }

  async validateDocuments(): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      const { request } = await this.client.validateDocuments(
        this.requireRequest().request_id,
      );
      this.request = request;
      return request;
    });
  }

  async submit(): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      this.request = await this.client.submitRequest(this.requireRequest().request_id);
      return this.request;
    });
  }

  async refresh(): Promise<DeIdRequestBody> {
    return this.guard(async () => {
      this.request = await this.client.getRequest(this.requireRequest().request_id);
      return this.request;
    });
  }

  /** Poll until the officer decided (Issued or Rejected) or time runs out. */
  async pollUntilDecided(intervalMs = 500, timeoutMs = 60_000): Promise<DeIdRequestBody> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const request = await this.refresh();
      if (request.state === "Issued" || request.state === "Rejected") return request;
      if (Date.now() >= deadline) return request;
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  issuedDeids(): string[] {
    return Object.values(this.request?.deids ?? {});
  }

  private requireRequest(): DeIdRequestBody {
    if (!this.request) throw new Error("wizard not started");
    return this.request;
  }
}
