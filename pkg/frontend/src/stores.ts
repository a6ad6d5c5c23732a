/**
 * Read-model stores behind the permissions, disclosure-log, key-manager,
 * and transcript panes. Each refreshes from the API and reconciles against
 * the event stream so a decision taken in the inbox shows up in the
 * permissions pane without a manual refresh.
 */

import { ApiClient } from "./api.js";
import type {
  DisclosureRecordWire,
  PdbKeyWire,
  PermissionRecordWire,
  StreamEvent,
  TranscriptEventWire,
} from "./types.js";

class Notifier {
  private readonly listeners = new Set<() => void>();

  onChange(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  protected changed(): void {
    for (const listener of this.listeners) listener();
  }
}

export class PermissionsStore extends Notifier {
  records: PermissionRecordWire[] = [];
  filter: { entity?: string; item?: string } = {};

  constructor(private readonly api: ApiClient) {
    super();
  }

  async refresh(): Promise<void> {
    const body = await this.api.listPermissions(this.filter);
    this.records = body.records;
    this.changed();
  }

  /** A resolved decision may have persisted rows: refetch. */
  apply(event: StreamEvent): void {
    if (event.type === "decision_resolved") {
      void this.refresh().catch(() => undefined);
    }
  }

  async revoke(itemText: string, entity: string): Promise<void> {
    const record = this.records.find(
      (r) => r.item === itemText && r.entity === entity,
    );
    if (!record) throw new Error(`no permission row for ${itemText} -> ${entity}`);
    await this.api.revokePermission(itemToWire(itemText), entity);
    await this.refresh();
  }
}

/** Parse a rendered item descriptor back to its wire form. */
export function itemToWire(itemText: string) {
  if (itemText.startsWith("pdb:")) {
    return { kind: "pdb" as const, key: itemText.slice(4) };
  }
  const [head, ...selectorParts] = itemText.split(" ");
  const [server = "", tool = ""] = (head ?? "").split(".");
  const selector = selectorParts.join(" ");
  const entity = selector.includes("=")
    ? selector.slice(selector.indexOf("=") + 1)
    : server;
  return { kind: "ext" as const, entity, server, tool, selector };
}

export class DisclosureLogStore extends Notifier {
  records: DisclosureRecordWire[] = [];
  filter: { entity?: string; item?: string; sinceTs?: number } = {};

  constructor(private readonly api: ApiClient) {
    super();
  }

  async refresh(): Promise<void> {
    const body = await this.api.exportDisclosures(
      this.filter.entity ? { entity: this.filter.entity } : undefined,
    );
    let records = body.records;
    if (this.filter.item) {
      records = records.filter((r) => r.item === this.filter.item);
    }
    if (this.filter.sinceTs !== undefined) {
      records = records.filter((r) => r.ts >= this.filter.sinceTs!);
    }
    this.records = records;
    this.changed();
  }

  apply(event: StreamEvent): void {
    if (event.type === "transcript" && event.event.kind === "call") {
      void this.refresh().catch(() => undefined);
    }
  }
}

export class KeyManagerStore extends Notifier {
  keys: PdbKeyWire[] = [];

  constructor(private readonly api: ApiClient) {
    super();
  }

  async refresh(): Promise<void> {
    const body = await this.api.listKeys();
    this.keys = body.keys;
    this.changed();
  }

  /** Values are write-only: sent up, never displayed back. */
  async setValue(key: string, value: string): Promise<void> {
    await this.api.setKey(key, value);
    await this.refresh();
  }

  async remove(key: string): Promise<void> {
    await this.api.deleteKey(key);
    await this.refresh();
  }
}

export class TranscriptStore extends Notifier {
  events: TranscriptEventWire[] = [];
  sessionStatus: string | null = null;
  outcome: Record<string, unknown> | null = null;
  private readonly limit: number;

  constructor(limit = 500) {
    super();
    this.limit = limit;
  }

  apply(event: StreamEvent): void {
    if (event.type === "transcript") {
      this.events.push(event.event);
      if (this.events.length > this.limit) {
        this.events.splice(0, this.events.length - this.limit);
      }
      this.changed();
    } else if (event.type === "session") {
      this.sessionStatus = event.status;
      if (event.outcome) this.outcome = event.outcome;
      this.changed();
    }
  }

  blocked(): boolean {
    return (
      this.outcome !== null && this.outcome["status"] === "disclosure_denied"
    );
  }
}
