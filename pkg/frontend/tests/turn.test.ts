import { describe, expect, it } from "vitest";

import type { ActionRequestFrame, ServerFrame } from "../src/protocol.js";
import { TurnTracker } from "../src/turn.js";
import fixture from "./fixtures/session.json";

function request(step: number, deadline = 30): ActionRequestFrame {
  return {
    type: "action_request", session: "s1", seq: step * 10,
    step, deadline_s: deadline, commands: ["up", "noop"],
  };
}

describe("turn tracking", () => {
  it("commands are sendable only while a prompt is active", () => {
    const turns = new TurnTracker();
    expect(turns.canSubmit).toBe(false);
    expect(turns.claim()).toBeNull();
    turns.onFrame(request(4), 0);
    expect(turns.canSubmit).toBe(true);
  });

  it("each prompt accepts exactly one submission", () => {
    const turns = new TurnTracker();
    turns.onFrame(request(4), 0);
    const first = turns.claim();
    expect(first?.step).toBe(4);
    expect(turns.claim()).toBeNull(); // no double-send for one prompt
  });

  it("a re-prompt for the same step reopens the window", () => {
    const turns = new TurnTracker();
    turns.onFrame(request(4), 0);
    turns.claim();
    turns.onFrame(request(4), 1000); // server timed out and asked again
    expect(turns.canSubmit).toBe(true);
  });

  it("state and result frames clear stale prompts", () => {
    const turns = new TurnTracker();
    turns.onFrame(request(4), 0);
    turns.onFrame({
      type: "result", session: "s1", seq: 99, success: true,
      steps: 4, expert_steps: 1, ticks: 4, aborted: false,
    }, 0);
    expect(turns.active).toBeNull();
    expect(turns.canSubmit).toBe(false);
  });

  it("countdown derives from the server deadline", () => {
    const turns = new TurnTracker();
    turns.onFrame(request(4, 30), 0);
    expect(turns.remainingS(0)).toBeCloseTo(30, 5);
    expect(turns.remainingS(15_000)).toBeCloseTo(15, 5);
    expect(turns.remainingS(60_000)).toBe(0);
  });

  it("replays the recorded session with one claim per request", () => {
    const turns = new TurnTracker();
    let claims = 0;
    for (const frame of fixture as unknown as ServerFrame[]) {
      turns.onFrame(frame, 0);
      if (frame.type === "action_request" && turns.canSubmit) {
        expect(turns.claim()).not.toBeNull();
        claims += 1;
        expect(turns.claim()).toBeNull();
      }
    }
    const requests = (fixture as Array<{ type: string }>).filter(
      (f) => f.type === "action_request").length;
    expect(claims).toBe(requests);
  });
});
