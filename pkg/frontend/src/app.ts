/**
 * Console application: wires the API client, event stream, and stores.
 * Headless by design — the browser shell in main.ts binds it to the DOM,
 * and the integration tests drive it directly.
 */

import { ApiClient, ApiClientOptions } from "./api.js";
import { InboxStore } from "./inbox.js";
import { EventStreamClient, StreamState } from "./sse.js";
import {
  DisclosureLogStore,
  KeyManagerStore,
  PermissionsStore,
  TranscriptStore,
} from "./stores.js";

export interface ConsoleOptions extends ApiClientOptions {
  reconnectDelayMs?: number;
}

export class ConsoleApp {
  readonly api: ApiClient;
  readonly stream: EventStreamClient;
  readonly inbox: InboxStore;
  readonly permissions: PermissionsStore;
  readonly disclosures: DisclosureLogStore;
  readonly keys: KeyManagerStore;
  readonly transcript: TranscriptStore;

  constructor(options: ConsoleOptions) {
    this.api = new ApiClient(options);
    this.stream = new EventStreamClient({
      baseUrl: options.baseUrl,
      token: options.token,
      fetchImpl: options.fetchImpl,
      reconnectDelayMs: options.reconnectDelayMs,
    });
    this.inbox = new InboxStore(this.api);
    this.permissions = new PermissionsStore(this.api);
    this.disclosures = new DisclosureLogStore(this.api);
    this.keys = new KeyManagerStore(this.api);
    this.transcript = new TranscriptStore();

    this.stream.onEvent((event) => {
      this.inbox.apply(event);
      this.permissions.apply(event);
      this.disclosures.apply(event);
      this.transcript.apply(event);
    });
  }

  /** Connect the stream and load initial state. */
  async start(): Promise<void> {
    this.stream.start();
    await Promise.all([
      this.inbox.refresh(),
      this.permissions.refresh(),
      this.disclosures.refresh(),
      this.keys.refresh(),
    ]);
  }

  stop(): void {
    this.stream.stop();
  }

  streamState(): StreamState {
    return this.stream.state;
  }
}
