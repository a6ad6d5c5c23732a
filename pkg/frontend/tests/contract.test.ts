/**
 * No-value contract: every byte the console's network layer receives while
 * driving a full session — JSON responses and the event stream alike — is
 * free of the private values stored in the backend.
 */

import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it } from "vitest";

import { ConsoleApp } from "../src/app.js";
import {
  TOKEN,
  freePort,
  makeWorkspace,
  spawnRun,
  spawnServe,
  waitFor,
  waitForHealth,
} from "./helpers.js";

const PRIVATE_VALUES = {
  ssn: "078-05-1120",
  phone: "555-0173-8841",
  name: "Sam Park",
};

// uses all three values, logs one, and emails the lot
const BUSY_ARTIFACT = [
  's = priv_data_db.get("ssn")',
  'p = priv_data_db.get("phone")',
  'n = priv_data_db.get("name")',
  "log(s)",
  'card = f"{n} | {p} | {s}"',
  'fs = mcp_helper.connect("filesystem")',
  'fs.process_query("write_file", args={"path": "card.txt", "content": card})',
  'email = mcp_helper.connect("email")',
  'email.process_query("send_email", args={"to": "joe@example.com", "body": card})',
  "",
].join("\n");

const cleanups: Array<() => void> = [];

afterEach(() => {
  while (cleanups.length) cleanups.pop()!();
});

function recordingFetch(received: string[]): typeof fetch {
  return async (input, init) => {
    const response = await fetch(input, init);
    const contentType = response.headers.get("content-type") ?? "";
    if (contentType.includes("text/event-stream") && response.body) {
      const [forward, tap] = response.body.tee();
      void (async () => {
        const reader = tap.getReader();
        const decoder = new TextDecoder();
        for (;;) {
          try {
            const { done, value } = await reader.read();
            if (done) break;
            received.push(decoder.decode(value, { stream: true }));
          } catch {
            break;
          }
        }
      })();
      return new Response(forward, {
        status: response.status,
        headers: response.headers,
      });
    }
    const text = await response.text();
    received.push(text);
    return new Response(text, {
      status: response.status,
      headers: response.headers,
    });
  };
}

function assertNoPrivateBytes(received: string[]): void {
  const blob = received.join("\n");
  for (const [key, value] of Object.entries(PRIVATE_VALUES)) {
    expect(blob, `private value for ${key} crossed the API`).not.toContain(value);
  }
}

describe("no-value contract", () => {
  it("a full approved session never sends private values to the console", async () => {
    const dir = mkdtempSync(join(tmpdir(), "console-contract-"));
    cleanups.push(() => rmSync(dir, { recursive: true, force: true }));
    const port = await freePort();
    makeWorkspace({
      dir,
      artifacts: [BUSY_ARTIFACT],
      port,
      pdbValues: PRIVATE_VALUES,
    });
    const backend = spawnRun(dir, port);
    cleanups.push(() => backend.child.kill());
    await waitForHealth(backend.baseUrl);

    const received: string[] = [];
    const app = new ConsoleApp({
      baseUrl: backend.baseUrl,
      token: TOKEN,
      fetchImpl: recordingFetch(received),
    });
    cleanups.push(() => app.stop());
    await app.start();

    // approve every batch as it arrives until the session finishes
    const deadline = Date.now() + 30000;
    while (app.transcript.sessionStatus !== "finished" && Date.now() < deadline) {
      for (const batch of app.inbox.openBatches()) {
        await app.inbox.submitBatch(
          batch.request.batch_id,
          batch.request.pairs.map(() => "allow_always" as const),
        );
      }
      await new Promise((resolve) => setTimeout(resolve, 100));
    }
    expect(app.transcript.sessionStatus).toBe("finished");
    expect(await backend.exited).toBe(0);

    // transcript arrived (masked), decisions arrived, keys listed masked
    expect(app.transcript.events.length).toBeGreaterThan(0);
    const keyList = app.keys.keys;
    expect(keyList.map((k) => k.key).sort()).toEqual(["name", "phone", "ssn"]);
    for (const key of keyList) {
      expect(key.value).toBe("•••");
    }
    assertNoPrivateBytes(received);
  });

  it("store browsing and key management only ever see the mask", async () => {
    const dir = mkdtempSync(join(tmpdir(), "console-serve-"));
    cleanups.push(() => rmSync(dir, { recursive: true, force: true }));
    const port = await freePort();
    makeWorkspace({ dir, artifacts: ["x = 1\n"], port, pdbValues: PRIVATE_VALUES });
    const backend = spawnServe(dir, port);
    cleanups.push(() => backend.child.kill());
    await waitForHealth(backend.baseUrl);

    const received: string[] = [];
    const app = new ConsoleApp({
      baseUrl: backend.baseUrl,
      token: TOKEN,
      fetchImpl: recordingFetch(received),
    });
    cleanups.push(() => app.stop());
    await app.start();

    // write-only value set: the response echoes the mask, not the value
    await app.keys.setValue("dob", "1/1/2000");
    expect(app.keys.keys.find((k) => k.key === "dob")?.value).toBe("•••");
    await app.keys.remove("dob");

    await app.permissions.refresh();
    await app.disclosures.refresh();
    assertNoPrivateBytes(received);
    expect(received.join("\n")).not.toContain("1/1/2000");

    backend.child.kill("SIGINT");
  });
});
