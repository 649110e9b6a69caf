// Scene rendering as data: a state frame maps to a list of draw operations,
// and a separate painter executes them on a canvas. Keeping the mapping pure
// makes replayed sessions render identically to live ones and lets tests
// compare operation lists instead of pixels.

import type { StateFrame } from "./protocol.js";

export type DrawOp =
  | { op: "clear"; fill: string }
  | { op: "disk"; x: number; y: number; r: number; fill: string }
  | { op: "ring"; x: number; y: number; r: number; stroke: string; width: number }
  | { op: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number }
  | { op: "text"; x: number; y: number; text: string; fill: string; size: number };

export interface ViewConfig {
  size: number; // canvas is square, workspace [0,1]^2 maps onto it
}

const COLORS = {
  background: "#10141a",
  target: "#3fa34d",
  object: "#d9a441",
  gripperOpen: "#4f8fd9",
  gripperClosed: "#d95f4f",
  text: "#e8e8e8",
  policy: "#4f8fd9",
  expert: "#d95f4f",
};

function px(v: number, size: number): number {
  // Workspace y points up; canvas y points down.
  return Math.round(v * size * 1000) / 1000;
}

export function renderScene(frame: StateFrame, view: ViewConfig): DrawOp[] {
  const s = view.size;
  const { scene } = frame;
  const flipY = (y: number) => 1 - y;
  const ops: DrawOp[] = [{ op: "clear", fill: COLORS.background }];

  ops.push({
    op: "ring",
    x: px(scene.target[0], s), y: px(flipY(scene.target[1]), s),
    r: px(0.05, s), stroke: COLORS.target, width: 2,
  });
  if (scene.task !== "reach") {
    ops.push({
      op: "disk",
      x: px(scene.object[0], s), y: px(flipY(scene.object[1]), s),
      r: px(0.04, s), fill: COLORS.object,
    });
  }
  ops.push({
    op: "disk",
    x: px(scene.gripper[0], s), y: px(flipY(scene.gripper[1]), s),
    r: px(0.03, s), fill: scene.gripper_closed ? COLORS.gripperClosed : COLORS.gripperOpen,
  });

  const actor = frame.actor === null ? "reset" : frame.actor;
  const actorColor = frame.actor === "expert" ? COLORS.expert : COLORS.policy;
  ops.push({
    op: "text", x: 8, y: 18,
    text: `${scene.task}  step ${frame.step}  last: ${actor}`,
    fill: actorColor, size: 13,
  });
  if (scene.articulation > 0) {
    ops.push({
      op: "text", x: 8, y: 34,
      text: `articulation ${scene.articulation.toFixed(2)}`,
      fill: COLORS.text, size: 12,
    });
  }
  if (frame.success) {
    ops.push({
      op: "text", x: s / 2 - 40, y: s / 2,
      text: "SUCCESS", fill: COLORS.target, size: 24,
    });
  }
  return ops;
}

export function paint(ctx: CanvasRenderingContext2D, ops: DrawOp[], size: number): void {
  for (const op of ops) {
    switch (op.op) {
      case "clear":
        ctx.fillStyle = op.fill;
        ctx.fillRect(0, 0, size, size);
        break;
      case "disk":
        ctx.fillStyle = op.fill;
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.r, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case "ring":
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.r, 0, 2 * Math.PI);
        ctx.stroke();
        break;
      case "line":
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.stroke();
        break;
      case "text":
        ctx.fillStyle = op.fill;
        ctx.font = `${op.size}px system-ui, sans-serif`;
        ctx.fillText(op.text, op.x, op.y);
        break;
    }
  }
}
