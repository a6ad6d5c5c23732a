/**
 * Approval inbox state.
 *
 * Pending decision batches and value-entry requests arrive over the event
 * stream (or an initial pending fetch) and leave when resolved. Each batch
 * is submitted at most once no matter how views or reconnects overlap: a
 * local in-flight guard plus treating the API's duplicate rejection (409)
 * as already-resolved.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  Choice,
  DecisionRequestWire,
  StreamEvent,
  ValueRequestWire,
} from "./types.js";

export type BatchStatus = "pending" | "submitting" | "resolved";

export interface InboxBatch {
  request: DecisionRequestWire;
  status: BatchStatus;
  choices: Choice[];
  resolvedChoices?: Choice[];
}

export interface InboxValue {
  request: ValueRequestWire;
  status: BatchStatus;
}

export class InboxStore {
  readonly batches = new Map<string, InboxBatch>();
  readonly values = new Map<string, InboxValue>();
  private readonly changeListeners = new Set<() => void>();

  constructor(private readonly api: ApiClient) {}

  onChange(listener: () => void): () => void {
    this.changeListeners.add(listener);
    return () => this.changeListeners.delete(listener);
  }

  private changed(): void {
    for (const listener of this.changeListeners) listener();
  }

  // ------------------------------------------------------------------
  // Ingest

  async refresh(): Promise<void> {
    const pending = await this.api.pending();
    for (const request of pending.decisions) this.ingestDecision(request);
    for (const request of pending.values) this.ingestValue(request);
    this.changed();
  }

  apply(event: StreamEvent): void {
    switch (event.type) {
      case "decision_pending":
        this.ingestDecision(event.request);
        break;
      case "decision_resolved": {
        const batch = this.batches.get(event.batch_id);
        if (batch) {
          batch.status = "resolved";
          batch.resolvedChoices = event.choices;
        }
        break;
      }
      case "value_pending":
        this.ingestValue({ request_id: event.request_id, key: event.key });
        break;
      case "value_resolved": {
        const value = this.values.get(event.request_id);
        if (value) value.status = "resolved";
        break;
      }
      default:
        return;
    }
    this.changed();
  }

  private ingestDecision(request: DecisionRequestWire): void {
    if (this.batches.has(request.batch_id)) return;
    this.batches.set(request.batch_id, {
      request,
      status: "pending",
      // default drafts: deny, the safe choice
      choices: request.pairs.map(() => "deny"),
    });
  }

  private ingestValue(request: ValueRequestWire): void {
    if (this.values.has(request.request_id)) return;
    this.values.set(request.request_id, { request, status: "pending" });
  }

  // ------------------------------------------------------------------
  // Views

  openBatches(): InboxBatch[] {
    return [...this.batches.values()].filter((b) => b.status !== "resolved");
  }

  openValues(): InboxValue[] {
    return [...this.values.values()].filter((v) => v.status !== "resolved");
  }

  // ------------------------------------------------------------------
  // Submission (exactly once per batch)

  setChoice(batchId: string, pairIndex: number, choice: Choice): void {
    const batch = this.batches.get(batchId);
    if (!batch || batch.status !== "pending") return;
    if (pairIndex < 0 || pairIndex >= batch.choices.length) return;
    batch.choices[pairIndex] = choice;
    this.changed();
  }

  async submitBatch(batchId: string, choices?: Choice[]): Promise<boolean> {
    const batch = this.batches.get(batchId);
    if (!batch || batch.status !== "pending") return false;
    const finalChoices = choices ?? batch.choices;
    if (finalChoices.length !== batch.request.pairs.length) {
      throw new Error("one choice per pair is required");
    }
    batch.status = "submitting";
    this.changed();
    try {
      await this.api.submitDecision(batchId, finalChoices);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        batch.status = "resolved"; // someone else answered first
        this.changed();
        return false;
      }
      batch.status = "pending"; // retryable failure: keep it in the inbox
      this.changed();
      throw error;
    }
    batch.status = "resolved";
    batch.resolvedChoices = [...finalChoices];
    this.changed();
    return true;
  }

  async submitValue(requestId: string, value: string | null): Promise<boolean> {
    const pending = this.values.get(requestId);
    if (!pending || pending.status !== "pending") return false;
    pending.status = "submitting";
    this.changed();
    try {
      await this.api.submitValue(requestId, value);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        pending.status = "resolved";
        this.changed();
        return false;
      }
      pending.status = "pending";
      this.changed();
      throw error;
    }
    pending.status = "resolved";
    this.changed();
    return true;
  }
}
