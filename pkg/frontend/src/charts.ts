// Round-over-round charts as draw operations: success rate and expert steps
// per episode against the collaboration round index.

import type { DrawOp } from "./scene.js";

export interface RoundMetric {
  round: number;
  collab_success_rate: number;
  expert_steps: number;
  episodes: number;
  eval_success_rate?: number | null;
}

export interface ChartConfig {
  width: number;
  height: number;
  title: string;
  color: string;
}

const MARGIN = { left: 36, right: 10, top: 22, bottom: 20 };

export function lineChartOps(xs: number[], ys: number[], cfg: ChartConfig): DrawOp[] {
  const ops: DrawOp[] = [{ op: "clear", fill: "#10141a" }];
  ops.push({ op: "text", x: MARGIN.left, y: 14, text: cfg.title, fill: "#e8e8e8", size: 12 });
  const w = cfg.width - MARGIN.left - MARGIN.right;
  const h = cfg.height - MARGIN.top - MARGIN.bottom;
  ops.push({
    op: "line", x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left,
    y2: MARGIN.top + h, stroke: "#555", width: 1,
  });
  ops.push({
    op: "line", x1: MARGIN.left, y1: MARGIN.top + h, x2: MARGIN.left + w,
    y2: MARGIN.top + h, stroke: "#555", width: 1,
  });
  if (xs.length === 0) return ops;

  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = Math.max(...ys, 1e-9);
  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? w / 2 : ((x - xMin) / (xMax - xMin)) * w);
  const sy = (y: number) => MARGIN.top + h - (y / yMax) * h;

  for (let i = 1; i < xs.length; i++) {
    ops.push({
      op: "line",
      x1: round3(sx(xs[i - 1])), y1: round3(sy(ys[i - 1])),
      x2: round3(sx(xs[i])), y2: round3(sy(ys[i])),
      stroke: cfg.color, width: 2,
    });
  }
  for (let i = 0; i < xs.length; i++) {
    ops.push({ op: "disk", x: round3(sx(xs[i])), y: round3(sy(ys[i])), r: 3, fill: cfg.color });
  }
  ops.push({
    op: "text", x: 4, y: MARGIN.top + 4, text: yMax.toFixed(2), fill: "#888", size: 10,
  });
  return ops;
}

function round3(v: number): number {
  return Math.round(v * 1000) / 1000;
}

export function successChart(metrics: RoundMetric[], width: number, height: number): DrawOp[] {
  return lineChartOps(
    metrics.map((m) => m.round),
    metrics.map((m) => m.collab_success_rate),
    { width, height, title: "success rate vs round", color: "#3fa34d" },
  );
}

export function expertStepsChart(metrics: RoundMetric[], width: number, height: number): DrawOp[] {
  return lineChartOps(
    metrics.map((m) => m.round),
    metrics.map((m) => m.expert_steps / Math.max(m.episodes, 1)),
    { width, height, title: "expert steps per episode vs round", color: "#d9a441" },
  );
}
