/**
 * Server-sent event reader over fetch streaming.
 *
 * Works in browsers and node 20 alike (no EventSource dependency, which
 * also cannot send the Authorization header). Reconnects with backoff;
 * listeners see a parsed StreamEvent per message.
 */

import type { StreamEvent } from "./types.js";

export type StreamListener = (event: StreamEvent) => void;
export type StreamState = "connecting" | "open" | "closed" | "stale";

export interface EventStreamOptions {
  baseUrl: string;
  token: string;
  fetchImpl?: typeof fetch;
  reconnectDelayMs?: number;
}

export class EventStreamClient {
  private readonly options: EventStreamOptions;
  private readonly listeners = new Set<StreamListener>();
  private readonly stateListeners = new Set<(state: StreamState) => void>();
  private controller: AbortController | null = null;
  private stopped = false;
  state: StreamState = "closed";

  constructor(options: EventStreamOptions) {
    this.options = options;
  }

  onEvent(listener: StreamListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  onState(listener: (state: StreamState) => void): () => void {
    this.stateListeners.add(listener);
    return () => this.stateListeners.delete(listener);
  }

  private setState(state: StreamState): void {
    this.state = state;
    for (const listener of this.stateListeners) listener(state);
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
    this.setState("closed");
  }

  private async loop(): Promise<void> {
    const fetchImpl = this.options.fetchImpl ?? fetch;
    const delay = this.options.reconnectDelayMs ?? 1000;
    while (!this.stopped) {
      this.controller = new AbortController();
      this.setState("connecting");
      try {
        const response = await fetchImpl(
          `${this.options.baseUrl.replace(/\/$/, "")}/api/events`,
          {
            headers: { Authorization: `Bearer ${this.options.token}` },
            signal: this.controller.signal,
          },
        );
        if (!response.ok || response.body === null) {
          throw new Error(`stream rejected: ${response.status}`);
        }
        this.setState("open");
        await this.consume(response.body);
      } catch {
        // fall through to reconnect
      }
      if (this.stopped) return;
      // connection lost: queued views must show as stale until we are back
      this.setState("stale");
      await new Promise((resolve) => setTimeout(resolve, delay));
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let dataLines: string[] = [];
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).replace(/\r$/, "");
        buffer = buffer.slice(newline + 1);
        if (line.startsWith(":")) continue; // keepalive comment
        if (line.startsWith("data:")) {
          dataLines.push(line.slice(5).trimStart());
          continue;
        }
        if (line === "") {
          if (dataLines.length > 0) {
            this.dispatch(dataLines.join("\n"));
            dataLines = [];
          }
          continue;
        }
        // "event:" lines carry the type redundantly; the payload's own
        // type field is authoritative.
      }
    }
  }

  private dispatch(payload: string): void {
    let parsed: StreamEvent;
    try {
      parsed = JSON.parse(payload) as StreamEvent;
    } catch {
      return;
    }
    if (typeof parsed !== "object" || parsed === null || !("type" in parsed)) {
      return;
    }
    for (const listener of this.listeners) listener(parsed);
  }
}
