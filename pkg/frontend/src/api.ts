/**
 * HTTP client for the control API.
 *
 * Every byte the console receives passes through this one layer, so the
 * no-value contract ("the console never receives unmasked private values")
 * is tested by tapping `onResponseText`.
 */

import type {
  Choice,
  DisclosureRecordWire,
  ItemWire,
  PdbKeyWire,
  PendingWire,
  PermissionRecordWire,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`api error ${status}: ${detail}`);
  }
}

export interface ApiClientOptions {
  baseUrl: string;
  token: string;
  /** Test tap: sees the raw text of every response body. */
  onResponseText?: (path: string, text: string) => void;
  fetchImpl?: typeof fetch;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly onResponseText?: (path: string, text: string) => void;
  private readonly fetchImpl: typeof fetch;

  constructor(options: ApiClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.token = options.token;
    this.onResponseText = options.onResponseText;
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  headers(): Record<string, string> {
    return {
      Authorization: `Bearer ${this.token}`,
      "Content-Type": "application/json",
    };
  }

  url(path: string): string {
    return this.baseUrl + path;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(this.url(path), {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    this.onResponseText?.(path, text);
    if (!response.ok) {
      let detail = text;
      try {
        detail = (JSON.parse(text) as { detail?: string }).detail ?? text;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  // ------------------------------------------------------------------

  pending(): Promise<PendingWire> {
    return this.request("GET", "/api/pending");
  }

  submitDecision(batchId: string, choices: Choice[]): Promise<{ ok: boolean }> {
    return this.request("POST", "/api/decisions", {
      batch_id: batchId,
      choices,
    });
  }

  submitValue(requestId: string, value: string | null): Promise<{ ok: boolean }> {
    return this.request("POST", "/api/values", {
      request_id: requestId,
      value,
    });
  }

  listPermissions(filter?: {
    entity?: string;
    item?: string;
  }): Promise<{ records: PermissionRecordWire[] }> {
    const params = new URLSearchParams();
    if (filter?.entity) params.set("entity", filter.entity);
    if (filter?.item) params.set("item", filter.item);
    const query = params.toString();
    return this.request("GET", `/api/permissions${query ? `?${query}` : ""}`);
  }

  setPermission(
    item: ItemWire,
    entity: string,
    decision: "allow" | "deny",
  ): Promise<{ ok: boolean }> {
    return this.request("PUT", "/api/permissions", { item, entity, decision });
  }

  revokePermission(item: ItemWire, entity: string): Promise<{ ok: boolean }> {
    return this.request("POST", "/api/permissions/revoke", { item, entity });
  }

  listKeys(): Promise<{ keys: PdbKeyWire[] }> {
    return this.request("GET", "/api/pdb");
  }

  setKey(key: string, value: string): Promise<{ ok: boolean; value: string }> {
    return this.request("PUT", `/api/pdb/${encodeURIComponent(key)}`, { value });
  }

  deleteKey(key: string): Promise<{ ok: boolean }> {
    return this.request("DELETE", `/api/pdb/${encodeURIComponent(key)}`);
  }

  exportDisclosures(filter?: {
    entity?: string;
    start_seq?: number;
    end_seq?: number;
  }): Promise<{ records: DisclosureRecordWire[] }> {
    const params = new URLSearchParams();
    if (filter?.entity) params.set("entity", filter.entity);
    if (filter?.start_seq !== undefined) params.set("start_seq", String(filter.start_seq));
    if (filter?.end_seq !== undefined) params.set("end_seq", String(filter.end_seq));
    const query = params.toString();
    return this.request("GET", `/api/disclosures${query ? `?${query}` : ""}`);
  }

  health(): Promise<{ ok: boolean }> {
    return this.request("GET", "/api/health");
  }
}
