import { describe, expect, it } from "vitest";

import { SessionConnection, type SocketLike } from "../src/connection.js";
import type { ServerFrame } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onopen: (() => void) | null = null;
  urls: string[];

  constructor(urls: string[]) {
    this.urls = urls;
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  feed(frame: Record<string, unknown>): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }
}

function harness() {
  const frames: ServerFrame[] = [];
  const errors: string[] = [];
  const statuses: string[] = [];
  const sockets: FakeSocket[] = [];
  const urls: string[] = [];
  const conn = new SessionConnection(
    "ws://test/session",
    {
      onFrame: (f) => frames.push(f),
      onStatus: (s) => statuses.push(s),
      onProtocolError: (d) => errors.push(d),
    },
    (url) => {
      urls.push(url);
      const s = new FakeSocket(urls);
      sockets.push(s);
      return s;
    },
  );
  return { conn, frames, errors, statuses, sockets, urls };
}

describe("session connection", () => {
  it("learns its session id from hello", () => {
    const h = harness();
    h.conn.connect();
    h.sockets[0].feed({ type: "hello", session: "s7", seq: 1, protocol: 1,
                        role: "controller", resumed: false });
    expect(h.conn.sessionId).toBe("s7");
    expect(h.frames[0].type).toBe("hello");
  });

  it("rejects out-of-order frames", () => {
    const h = harness();
    h.conn.connect();
    h.sockets[0].feed({ type: "heartbeat", session: "s1", seq: 5 });
    h.sockets[0].feed({ type: "heartbeat", session: "s1", seq: 4 });
    expect(h.frames.length).toBe(1);
    expect(h.errors.length).toBe(1);
    expect(h.errors[0]).toContain("out-of-order");
  });

  it("surfaces unparseable frames without dying", () => {
    const h = harness();
    h.conn.connect();
    h.sockets[0].feed({ type: "warp", session: "s1", seq: 1 });
    expect(h.errors.length).toBe(1);
    h.sockets[0].feed({ type: "heartbeat", session: "s1", seq: 2 });
    expect(h.frames.length).toBe(1);
  });

  it("reconnects with the session id for resume", () => {
    const h = harness();
    h.conn.connect();
    h.sockets[0].feed({ type: "hello", session: "s9", seq: 1, protocol: 1,
                        role: "controller", resumed: false });
    h.conn.connect(); // reconnect
    expect(h.urls[1]).toContain("?session=s9");
    expect(h.statuses).toContain("reconnecting");
  });
});
