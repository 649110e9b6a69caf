import { describe, expect, it, beforeEach } from "vitest";

import {
  abortFrame,
  actionFrame,
  heartbeatFrame,
  parseFrame,
  resetClientSeq,
  startFrame,
} from "../src/protocol.js";
import fixture from "./fixtures/session.json";

beforeEach(() => resetClientSeq());

describe("parseFrame", () => {
  it("accepts every frame of the recorded session", () => {
    for (const frame of fixture) {
      const parsed = parseFrame(JSON.stringify(frame));
      expect(parsed).not.toBeNull();
      expect(parsed!.type).toBe(frame.type);
    }
  });

  it("rejects malformed payloads", () => {
    expect(parseFrame("not json")).toBeNull();
    expect(parseFrame("42")).toBeNull();
    expect(parseFrame(JSON.stringify({ type: "launch", session: "s", seq: 1 }))).toBeNull();
    expect(parseFrame(JSON.stringify({ type: "state", seq: 1 }))).toBeNull();
    expect(parseFrame(JSON.stringify({ type: "state", session: "s" }))).toBeNull();
  });

  it("ignores unknown fields for forward compatibility", () => {
    const parsed = parseFrame(JSON.stringify({
      type: "heartbeat", session: "s1", seq: 9, color: "teal",
    }));
    expect(parsed).not.toBeNull();
    expect(parsed!.seq).toBe(9);
  });
});

describe("client frames", () => {
  it("are single-line JSON carrying type, session, seq", () => {
    for (const raw of [
      startFrame("s1", { task: "reach", seed: 4, n: 2 }),
      actionFrame("s1", "up", 3),
      abortFrame("s1"),
      heartbeatFrame("s1"),
    ]) {
      expect(raw).not.toContain("\n");
      const data = JSON.parse(raw);
      expect(typeof data.type).toBe("string");
      expect(data.session).toBe("s1");
      expect(typeof data.seq).toBe("number");
    }
  });

  it("action frames carry the command and the turn they answer", () => {
    const data = JSON.parse(actionFrame("s1", "down-left", 17));
    expect(data).toMatchObject({ type: "action", command: "down-left", turn: 17 });
  });

  it("client seq strictly increases", () => {
    const a = JSON.parse(actionFrame("s1", "up", 1));
    const b = JSON.parse(actionFrame("s1", "up", 2));
    expect(b.seq).toBeGreaterThan(a.seq);
  });
});
