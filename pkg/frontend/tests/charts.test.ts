import { describe, expect, it } from "vitest";

import { expertStepsChart, successChart, type RoundMetric } from "../src/charts.js";

const METRICS: RoundMetric[] = [
  { round: 0, collab_success_rate: 0.4, expert_steps: 120, episodes: 4 },
  { round: 1, collab_success_rate: 0.6, expert_steps: 90, episodes: 4 },
  { round: 2, collab_success_rate: 0.8, expert_steps: 60, episodes: 4 },
];

describe("round charts", () => {
  it("success chart draws one point per round plus connecting segments", () => {
    const ops = successChart(METRICS, 320, 160);
    const disks = ops.filter((op) => op.op === "disk");
    expect(disks.length).toBe(3);
    const segments = ops.filter((op) => op.op === "line");
    // two axes + two connecting segments
    expect(segments.length).toBe(4);
  });

  it("expert steps chart normalizes per episode", () => {
    const ops = expertStepsChart(METRICS, 320, 160);
    const disks = ops.filter((op) => op.op === "disk") as Array<{ y: number }>;
    // steps per episode fall 30 -> 22.5 -> 15, so the curve rises on canvas.
    expect(disks[0].y).toBeLessThan(disks[1].y);
    expect(disks[1].y).toBeLessThan(disks[2].y);
  });

  it("is deterministic", () => {
    expect(successChart(METRICS, 320, 160)).toEqual(successChart(METRICS, 320, 160));
  });

  it("handles an empty series without ops beyond the frame", () => {
    const ops = successChart([], 320, 160);
    expect(ops.filter((op) => op.op === "disk").length).toBe(0);
  });
});
