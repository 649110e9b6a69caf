// The /session wire protocol, version 1. Every frame is a single-line JSON
// object carrying {type, session, seq}; unknown fields are ignored so newer
// servers stay compatible.

export const PROTOCOL_VERSION = 1;

export interface Scene {
  task: string;
  gripper: [number, number];
  gripper_closed: boolean;
  object: [number, number];
  target: [number, number];
  articulation: number;
  step_count: number;
}

export interface HelloFrame {
  type: "hello";
  session: string;
  seq: number;
  protocol: number;
  role: "controller" | "observer";
  resumed: boolean;
}

export interface StateFrame {
  type: "state";
  session: string;
  seq: number;
  step: number;
  actor: "policy" | "expert" | null;
  scene: Scene;
  success: boolean;
  done: boolean;
}

export interface ActionRequestFrame {
  type: "action_request";
  session: string;
  seq: number;
  step: number;
  deadline_s: number;
  commands: string[];
}

export interface AckFrame {
  type: "ack";
  session: string;
  seq: number;
  command: string;
  step: number;
}

export interface RejectFrame {
  type: "reject";
  session: string;
  seq: number;
  reason: string;
}

export interface ResultFrame {
  type: "result";
  session: string;
  seq: number;
  success: boolean;
  steps: number;
  expert_steps: number;
  ticks: number;
  aborted: boolean;
}

export interface HeartbeatFrame {
  type: "heartbeat";
  session: string;
  seq: number;
}

export type ServerFrame =
  | HelloFrame
  | StateFrame
  | ActionRequestFrame
  | AckFrame
  | RejectFrame
  | ResultFrame
  | HeartbeatFrame;

const SERVER_TYPES = new Set([
  "hello", "state", "action_request", "ack", "reject", "result", "heartbeat",
]);

/** Parse one incoming frame; null for anything malformed or unknown. */
export function parseFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  if (typeof frame.type !== "string" || !SERVER_TYPES.has(frame.type)) return null;
  if (typeof frame.session !== "string" || typeof frame.seq !== "number") return null;
  return frame as unknown as ServerFrame;
}

export interface StartOptions {
  task: string;
  seed: number;
  n: number;
}

let clientSeq = 0;

export function resetClientSeq(): void {
  clientSeq = 0;
}

function base(type: string, session: string): Record<string, unknown> {
  clientSeq += 1;
  return { type, session, seq: clientSeq };
}

export function startFrame(session: string, opts: StartOptions): string {
  return JSON.stringify({ ...base("start", session), task: opts.task, seed: opts.seed, n: opts.n });
}

export function actionFrame(session: string, command: string, turn: number): string {
  return JSON.stringify({ ...base("action", session), command, turn });
}

export function abortFrame(session: string): string {
  return JSON.stringify(base("abort", session));
}

export function heartbeatFrame(session: string): string {
  return JSON.stringify(base("heartbeat", session));
}
