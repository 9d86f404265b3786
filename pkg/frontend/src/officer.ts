// Officer portal controller: oldest-first queue, approve/reject with the
// expected version, and a conflict banner when another session won.

import { ApiError, NourIdClient } from "./api.js";
import type { QueueEntry } from "./types.js";

export class OfficerPortal {
  queue: QueueEntry[] = [];
  totalPending = 0;
  conflict: string | null = null;
  lastError: ApiError | null = null;

  constructor(private readonly client: NourIdClient, private readonly pageSize = 50) {}

  async refresh(page = 1): Promise<QueueEntry[]> {
    const response = await this.client.officerQueue(page, this.pageSize);
    this.queue = response.requests;
    this.totalPending = response.total_pending;
    return this.queue;
  }

  /**
   * Decide using the version from the listed entry. A version_conflict
   * (or a transition raced to completion) sets the conflict banner and
   * refreshes the queue instead of throwing.
   */
  async decide(entry: QueueEntry, verdict: "approve" | "reject", reason = ""): Promise<boolean> {
    this.conflict = null;
    this.lastError = null;
    if (verdict === "reject" && !reason.trim()) {
      this.lastError = new ApiError(400, "reason_required", "rejection requires a reason");
      return false;
    }
    try {
      await this.client.decide(entry.request_id, verdict, reason, entry.version);
      await this.refresh();
      return true;
    } catch (error) {
      if (
        error instanceof ApiError &&
        (error.code === "version_conflict" || error.code === "invalid_transition")
      ) {
        this.conflict = `request ${entry.request_id} was decided by another session`;
        await this.refresh();
        return false;
      }
      if (error instanceof ApiError) this.lastError = error;
      throw error;
    }
  }
}
