// WebSocket client for /session: frame parsing, strict seq ordering, and
// reconnect-with-resume. The socket factory is injectable so tests can feed
// scripted frames.

import { parseFrame, type ServerFrame } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onFrame: (frame: ServerFrame) => void;
  onStatus: (status: "connecting" | "open" | "closed" | "reconnecting") => void;
  onProtocolError: (detail: string) => void;
}

export class SessionConnection {
  private socket: SocketLike | null = null;
  private lastSeq = 0;
  sessionId: string | null = null;

  constructor(
    private url: string,
    private events: ConnectionEvents,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    const target = this.sessionId
      ? `${this.url}?session=${encodeURIComponent(this.sessionId)}`
      : this.url;
    this.events.onStatus(this.sessionId ? "reconnecting" : "connecting");
    const socket = this.factory(target);
    this.socket = socket;
    this.lastSeq = 0; // server seq continues across resumes but hello re-syncs
    socket.onopen = () => this.events.onStatus("open");
    socket.onclose = () => this.events.onStatus("closed");
    socket.onmessage = (ev) => this.handleMessage(ev.data);
  }

  private handleMessage(raw: string): void {
    const frame = parseFrame(raw);
    if (frame === null) {
      this.events.onProtocolError(`unparseable frame: ${raw.slice(0, 80)}`);
      return;
    }
    if (frame.seq <= this.lastSeq) {
      this.events.onProtocolError(
        `out-of-order frame seq ${frame.seq} after ${this.lastSeq}`);
      return;
    }
    this.lastSeq = frame.seq;
    if (frame.type === "hello") {
      this.sessionId = frame.session;
    }
    this.events.onFrame(frame);
  }

  send(data: string): void {
    if (this.socket === null) throw new Error("not connected");
    this.socket.send(data);
  }

  close(): void {
    this.socket?.close();
  }
}
