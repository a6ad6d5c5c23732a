/** Test plumbing: spawn the Python control API / runs against a workspace. */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdirSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { join } from "node:path";

export const TOKEN = "console-test-token";
const PYTHON = process.env.GAAP_PYTHON ?? "python3";

export function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      server.close(() => resolve(port));
    });
  });
}

export interface WorkspaceOptions {
  dir: string;
  artifacts: string[];
  port: number;
  pdbValues?: Record<string, string>;
  oracleTimeout?: number;
}

const SERVERS = ["filesystem", "email", "remote_kv", "food_order", "public_wiki", "sink"];

export function makeWorkspace(options: WorkspaceOptions): string {
  const { dir } = options;
  mkdirSync(join(dir, "artifacts"), { recursive: true });
  const artifactPaths = options.artifacts.map((source, index) => {
    const relative = `artifacts/shot-${index + 1}.as`;
    writeFileSync(join(dir, relative), source);
    return relative;
  });
  writeFileSync(
    join(dir, "servers.json"),
    JSON.stringify({
      servers: SERVERS.map((name) => ({
        name,
        transport: { kind: "inproc", server: name, sandbox: "sandbox" },
      })),
    }),
  );
  mkdirSync(join(dir, "annotations"), { recursive: true });
  writeFileSync(
    join(dir, "annotations", "email.json"),
    JSON.stringify({
      server: "email",
      entity_rule: {
        kind: "arg_selector",
        selectors: { send_email: "args.to" },
        transform: "lowercase_trim",
        identity_is_public: true,
      },
    }),
  );
  writeFileSync(
    join(dir, "annotations", "filesystem.json"),
    JSON.stringify({
      server: "filesystem",
      entity_rule: {
        kind: "arg_selector",
        selectors: {
          read_file: "args.path",
          write_file: "args.path",
          list_dir: "args.path",
        },
        identity_is_public: true,
      },
    }),
  );
  writeFileSync(
    join(dir, "config.json"),
    JSON.stringify({
      store_dir: "stores",
      servers: "servers.json",
      annotations_dir: "annotations",
      sandbox_dir: "sandbox",
      tasks_dir: "tasks",
      provider: { kind: "scripted", artifacts: artifactPaths },
      oracle: { kind: "console", timeout: options.oracleTimeout ?? 60 },
      shot_limit: 4,
      api: { host: "127.0.0.1", port: options.port, linger: 3.0 },
    }),
  );
  writeFileSync(join(dir, "prompt.txt"), "complete the task\n");
  for (const [key, value] of Object.entries(options.pdbValues ?? {})) {
    const result = spawnSync(
      PYTHON,
      ["-m", "gaap.orchestrator.cli", "pdb", "set", "--config", "config.json",
       "--key", key, "--value", value],
      { cwd: dir, encoding: "utf-8" },
    );
    if (result.status !== 0) {
      throw new Error(`pdb set failed: ${result.stderr}`);
    }
  }
  return join(dir, "config.json");
}

export interface BackendHandle {
  child: ChildProcess;
  baseUrl: string;
  stdout: string[];
  stderr: string[];
  exited: Promise<number | null>;
}

function track(child: ChildProcess): BackendHandle["exited"] {
  return new Promise((resolve) => {
    child.on("exit", (code) => resolve(code));
  });
}

function collect(child: ChildProcess): { stdout: string[]; stderr: string[] } {
  const stdout: string[] = [];
  const stderr: string[] = [];
  child.stdout?.on("data", (chunk: Buffer) => stdout.push(chunk.toString()));
  child.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk.toString()));
  return { stdout, stderr };
}

export function spawnRun(dir: string, port: number): BackendHandle {
  const child = spawn(
    PYTHON,
    ["-m", "gaap.orchestrator.cli", "run", "--prompt", "prompt.txt",
     "--config", "config.json"],
    { cwd: dir, env: { ...process.env, GAAP_CONSOLE_TOKEN: TOKEN } },
  );
  const io = collect(child);
  return {
    child,
    baseUrl: `http://127.0.0.1:${port}`,
    ...io,
    exited: track(child),
  };
}

export function spawnServe(dir: string, port: number): BackendHandle {
  const child = spawn(
    PYTHON,
    ["-m", "gaap.orchestrator.cli", "serve", "--config", "config.json",
     "--port", String(port)],
    { cwd: dir, env: { ...process.env, GAAP_CONSOLE_TOKEN: TOKEN } },
  );
  const io = collect(child);
  return {
    child,
    baseUrl: `http://127.0.0.1:${port}`,
    ...io,
    exited: track(child),
  };
}

export async function waitForHealth(baseUrl: string, timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/api/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`backend not healthy at ${baseUrl}`);
    await sleep(100);
  }
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function waitFor<T>(
  probe: () => T | undefined | false,
  timeoutMs = 15000,
  what = "condition",
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await sleep(50);
  }
}

export const LEAKY_ARTIFACT = [
  's = priv_data_db.get("ssn")',
  'email = mcp_helper.connect("email")',
  'email.process_query("send_email", args={"to": "joe@example.com", "body": s})',
  "",
].join("\n");

// Blocks on user value entry first, so a console attaching during the wait
// observes the later decision batch live on the event stream.
export const ASK_THEN_LEAK_ARTIFACT = [
  's = priv_data_db.new_value("ssn")',
  'email = mcp_helper.connect("email")',
  'email.process_query("send_email", args={"to": "joe@example.com", "body": s})',
  "",
].join("\n");
