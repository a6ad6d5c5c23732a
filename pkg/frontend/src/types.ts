/** Wire types for the control API. Mirrors the server's JSON exactly. */

export interface ItemWire {
  kind: "pdb" | "ext";
  key?: string;
  entity?: string;
  server?: string;
  tool?: string;
  selector?: string;
}

export interface PairWire {
  item: ItemWire;
  item_text: string;
  entity: string;
}

export interface DecisionRequestWire {
  batch_id: string;
  session_id: string;
  server: string;
  tool: string;
  pairs: PairWire[];
  questions: string[];
}

export interface ValueRequestWire {
  request_id: string;
  key: string;
}

export interface PendingWire {
  decisions: DecisionRequestWire[];
  values: ValueRequestWire[];
}

export type Choice = "allow_once" | "allow_always" | "deny";

export interface PermissionRecordWire {
  item: string;
  entity: string;
  decision: "allow" | "deny";
  decided_at: number;
}

export interface PdbKeyWire {
  key: string;
  value: string; // always the mask; the API never sends real values
  origin: string;
  created_at: number;
}

export interface DisclosureRecordWire {
  seq: number;
  item: string;
  entity: string;
  server: string;
  tool: string;
  arg_names: string[];
  arg_value_digests: string[];
  ts: number;
  session_id: string;
}

export interface TranscriptEventWire {
  seq: number;
  kind: "call" | "decision" | "log" | "shot";
  payload: Record<string, unknown>;
  ts: number;
}

export type StreamEvent =
  | { type: "hello" }
  | { type: "transcript"; event: TranscriptEventWire }
  | { type: "decision_pending"; request: DecisionRequestWire }
  | { type: "decision_resolved"; batch_id: string; choices: Choice[] }
  | { type: "value_pending"; request_id: string; key: string }
  | { type: "value_resolved"; request_id: string; key: string; rejected: boolean }
  | {
      type: "session";
      status: "started" | "finished";
      task_id: string;
      outcome?: Record<string, unknown>;
    };
