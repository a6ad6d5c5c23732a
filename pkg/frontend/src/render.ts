/**
 * Pure rendering helpers: state in, HTML strings out. The browser shell
 * assigns the results to pane elements; tests assert on the strings.
 */

import type { InboxBatch, InboxValue } from "./inbox.js";
import type {
  DisclosureRecordWire,
  PdbKeyWire,
  PermissionRecordWire,
  TranscriptEventWire,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const CHOICES = [
  ["allow_once", "allow once"],
  ["allow_always", "allow always"],
  ["deny", "deny"],
] as const;

export function renderBatchCard(batch: InboxBatch): string {
  const rows = batch.request.pairs
    .map((pair, index) => {
      const buttons = CHOICES.map(
        ([value, label]) =>
          `<label><input type="radio" name="${escapeHtml(batch.request.batch_id)}-${index}"` +
          ` value="${value}"${batch.choices[index] === value ? " checked" : ""}>` +
          `${label}</label>`,
      ).join(" ");
      return (
        `<tr data-pair="${index}">` +
        `<td class="item">${escapeHtml(pair.item_text)}</td>` +
        `<td class="entity">${escapeHtml(pair.entity)}</td>` +
        `<td class="via">${escapeHtml(batch.request.server)}.${escapeHtml(batch.request.tool)}</td>` +
        `<td class="choices">${buttons}</td></tr>`
      );
    })
    .join("");
  const disabled = batch.status !== "pending" ? " disabled" : "";
  return (
    `<article class="batch" data-batch="${escapeHtml(batch.request.batch_id)}">` +
    `<header>Share with external party? (${batch.request.pairs.length} item${
      batch.request.pairs.length === 1 ? "" : "s"
    })</header>` +
    `<table><thead><tr><th>item</th><th>entity</th><th>via</th><th>decision</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<button class="submit"${disabled}>submit decisions</button>` +
    `</article>`
  );
}

export function renderValueCard(value: InboxValue): string {
  const disabled = value.status !== "pending" ? " disabled" : "";
  return (
    `<article class="value-request" data-request="${escapeHtml(value.request.request_id)}">` +
    `<header>The agent asks to store a new private value for key ` +
    `<code>${escapeHtml(value.request.key)}</code></header>` +
    `<input type="password" class="value-input" placeholder="value (never displayed)">` +
    `<button class="store"${disabled}>store</button>` +
    `<button class="refuse"${disabled}>refuse</button>` +
    `</article>`
  );
}

export function renderPermissions(records: PermissionRecordWire[]): string {
  if (records.length === 0) return "<p>No stored permissions.</p>";
  const rows = records
    .map(
      (record) =>
        `<tr><td>${escapeHtml(record.item)}</td><td>${escapeHtml(record.entity)}</td>` +
        `<td class="${record.decision}">${record.decision}</td>` +
        `<td><button class="revoke" data-item="${escapeHtml(record.item)}"` +
        ` data-entity="${escapeHtml(record.entity)}">revoke</button></td></tr>`,
    )
    .join("");
  return (
    "<table><thead><tr><th>item</th><th>entity</th><th>decision</th><th></th></tr></thead>" +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderDisclosures(records: DisclosureRecordWire[]): string {
  if (records.length === 0) return "<p>No disclosures recorded.</p>";
  const rows = records
    .map(
      (record) =>
        `<tr><td>${record.seq}</td><td>${escapeHtml(record.item)}</td>` +
        `<td>${escapeHtml(record.entity)}</td>` +
        `<td>${escapeHtml(record.server)}.${escapeHtml(record.tool)}</td>` +
        `<td>${escapeHtml(record.arg_names.join(", "))}</td>` +
        `<td>${new Date(record.ts * 1000).toISOString()}</td></tr>`,
    )
    .join("");
  return (
    "<table><thead><tr><th>#</th><th>item</th><th>entity</th><th>via</th>" +
    `<th>args</th><th>time</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderKeys(keys: PdbKeyWire[]): string {
  const rows = keys
    .map(
      (key) =>
        `<tr><td>${escapeHtml(key.key)}</td><td class="masked">${escapeHtml(key.value)}</td>` +
        `<td>${escapeHtml(key.origin)}</td>` +
        `<td><button class="delete" data-key="${escapeHtml(key.key)}">delete</button></td></tr>`,
    )
    .join("");
  return (
    "<table><thead><tr><th>key</th><th>value</th><th>origin</th><th></th></tr></thead>" +
    `<tbody>${rows}</tbody></table>` +
    '<form class="add-key"><input name="key" placeholder="key">' +
    '<input name="value" type="password" placeholder="value (write-only)">' +
    "<button>store</button></form>"
  );
}

export function renderTranscript(events: TranscriptEventWire[]): string {
  const lines = events
    .slice(-100)
    .map((event) => {
      const payload = summarizeEvent(event);
      return `<li class="${event.kind}"><span class="seq">${event.seq}</span> ${escapeHtml(payload)}</li>`;
    })
    .join("");
  return `<ol class="transcript">${lines}</ol>`;
}

function summarizeEvent(event: TranscriptEventWire): string {
  const payload = event.payload as Record<string, unknown>;
  switch (event.kind) {
    case "call":
      return `call ${String(payload["server"])}.${String(payload["tool"])} -> ${String(payload["entity"])}`;
    case "decision": {
      const phase = String(payload["phase"]);
      const pairs = Array.isArray(payload["pairs"]) ? payload["pairs"].length : 0;
      return `decision ${phase}${pairs ? ` (${pairs} pairs)` : ""}`;
    }
    case "log":
      // log text is masked upstream; only the length crosses the API
      return `log entry (${String(payload["length"] ?? "?")} chars, masked)`;
    case "shot":
      return `shot ${String(payload["shot"])}`;
    default:
      return event.kind;
  }
}
