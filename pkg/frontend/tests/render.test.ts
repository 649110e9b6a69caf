import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { renderScene } from "../src/scene.js";
import type { StateFrame } from "../src/protocol.js";
import fixture from "./fixtures/session.json";

const VIEW = { size: 480 };

function stateFrames(): StateFrame[] {
  return (fixture as Array<Record<string, unknown>>).filter(
    (f) => f.type === "state",
  ) as unknown as StateFrame[];
}

describe("scene rendering", () => {
  it("is a pure function of the frame: replay renders identically to live", () => {
    for (const frame of stateFrames()) {
      const live = renderScene(frame, VIEW);
      const replay = renderScene(JSON.parse(JSON.stringify(frame)), VIEW);
      expect(replay).toEqual(live);
    }
  });

  it("matches the committed golden operation stream", () => {
    const golden = JSON.parse(
      readFileSync(new URL("./golden/session-ops.json", import.meta.url), "utf-8"),
    );
    const ops = stateFrames().map((f) => renderScene(f, VIEW));
    expect(ops).toEqual(golden);
  });

  it("marks success in the final frame of the recorded session", () => {
    const frames = stateFrames();
    const last = frames[frames.length - 1];
    expect(last.success).toBe(true);
    const ops = renderScene(last, VIEW);
    expect(ops.some((op) => op.op === "text" && op.text === "SUCCESS")).toBe(true);
  });

  it("draws the gripper over the scene with grip state color", () => {
    const frame = stateFrames()[0];
    const open = renderScene(frame, VIEW);
    const disks = open.filter((op) => op.op === "disk");
    expect(disks.length).toBeGreaterThanOrEqual(1);
    const closedFrame = {
      ...frame,
      scene: { ...frame.scene, gripper_closed: true },
    } as StateFrame;
    const closed = renderScene(closedFrame, VIEW);
    expect(closed).not.toEqual(open);
  });
});
