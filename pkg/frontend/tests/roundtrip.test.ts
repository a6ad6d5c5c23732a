/**
 * Console round-trip against the real backend: a blocked session's batch
 * arrives in the inbox with the next stream event, deny resolves the
 * session Blocked, and allow_always persists a permission row that the
 * permissions pane picks up without a manual refresh.
 */

import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it } from "vitest";

import { ConsoleApp } from "../src/app.js";
import type { StreamEvent } from "../src/types.js";
import {
  ASK_THEN_LEAK_ARTIFACT,
  TOKEN,
  freePort,
  makeWorkspace,
  spawnRun,
  waitFor,
  waitForHealth,
} from "./helpers.js";

const cleanups: Array<() => void> = [];

afterEach(() => {
  while (cleanups.length) cleanups.pop()!();
});

/**
 * Start a run whose artifact first asks for a private value (blocking the
 * session until the console answers) and then attempts a disclosure. The
 * console is attached and streaming before the value is supplied, so the
 * decision batch that follows is observed live.
 */
async function startBlockedSession() {
  const dir = mkdtempSync(join(tmpdir(), "console-rt-"));
  cleanups.push(() => rmSync(dir, { recursive: true, force: true }));
  const port = await freePort();
  makeWorkspace({ dir, artifacts: [ASK_THEN_LEAK_ARTIFACT], port });
  const backend = spawnRun(dir, port);
  cleanups.push(() => backend.child.kill());
  await waitForHealth(backend.baseUrl);

  const seen: StreamEvent[] = [];
  const app = new ConsoleApp({ baseUrl: backend.baseUrl, token: TOKEN });
  app.stream.onEvent((event) => seen.push(event));
  cleanups.push(() => app.stop());
  await app.start();
  await waitFor(() => app.stream.state === "open", 10000, "stream open");

  // answer the value-entry card; the session proceeds to the leaky call
  const valueRequest = await waitFor(
    () => app.inbox.openValues()[0],
    20000,
    "value-entry request",
  );
  expect(valueRequest.request.key).toBe("ssn");
  await app.inbox.submitValue(valueRequest.request.request_id, "078-05-1120");
  return { app, backend, seen };
}

describe("console round-trip", () => {
  it("deny: batch arrives within one event and the session resolves Blocked", async () => {
    const { app, backend, seen } = await startBlockedSession();

    // the pending batch surfaces through the stream
    const pendingEvent = await waitFor(
      () => seen.find((event) => event.type === "decision_pending"),
      20000,
      "decision_pending event",
    );
    // within one event: the inbox shows the batch as soon as that single
    // event is processed — no polling round-trip happened in between
    const open = app.inbox.openBatches();
    expect(open).toHaveLength(1);
    const batch = open[0]!;
    expect(pendingEvent.type).toBe("decision_pending");
    expect(batch.request.pairs.map((pair) => pair.item_text)).toEqual(["pdb:ssn"]);
    expect(batch.request.pairs[0]!.entity).toBe("joe@example.com");

    await app.inbox.submitBatch(batch.request.batch_id, ["deny"]);

    const exitCode = await backend.exited;
    expect(exitCode).toBe(2); // disclosure denied

    // the transcript pane reflects the Blocked outcome from the stream
    await waitFor(() => app.transcript.outcome !== null, 10000, "session outcome");
    expect(app.transcript.blocked()).toBe(true);
    const stdout = backend.stdout.join("");
    expect(stdout).toContain("disclosure_denied");
    expect(stdout).not.toContain("078-05-1120");
  });

  it("allow_always: permission row shows up in the permissions pane without refresh", async () => {
    const { app, backend } = await startBlockedSession();

    const batch = await waitFor(
      () => app.inbox.openBatches()[0],
      20000,
      "pending batch",
    );
    await app.inbox.submitBatch(batch.request.batch_id, ["allow_always"]);

    // PermissionsStore refetches on the decision_resolved stream event;
    // no manual refresh() call happens here.
    const row = await waitFor(
      () =>
        app.permissions.records.find(
          (record) =>
            record.item === "pdb:ssn" &&
            record.entity === "joe@example.com" &&
            record.decision === "allow",
        ),
      10000,
      "persisted permission row",
    );
    expect(row).toBeDefined();

    // the log browser picked the disclosure up from the call event
    await waitFor(
      () =>
        app.disclosures.records.some(
          (record) =>
            record.item === "pdb:ssn" && record.entity === "joe@example.com",
        ),
      10000,
      "disclosure row",
    );

    const exitCode = await backend.exited;
    expect(exitCode).toBe(0);
  });

  it("duplicate submissions across consoles resolve exactly once", async () => {
    const { app, backend } = await startBlockedSession();
    const second = new ConsoleApp({ baseUrl: backend.baseUrl, token: TOKEN });
    cleanups.push(() => second.stop());
    await second.start();

    const batch = await waitFor(
      () => app.inbox.openBatches()[0],
      20000,
      "pending batch",
    );
    await waitFor(() => second.inbox.openBatches()[0], 10000, "mirrored batch");

    const first = await app.inbox.submitBatch(batch.request.batch_id, ["deny"]);
    const dup = await second.inbox.submitBatch(batch.request.batch_id, [
      "allow_always",
    ]);
    expect(first).toBe(true);
    expect(dup).toBe(false); // rejected by the api, reconciled locally

    expect(await backend.exited).toBe(2);
    await waitFor(
      () => second.inbox.openBatches().length === 0,
      10000,
      "second console reconciled",
    );
  });
});
