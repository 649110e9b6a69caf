// SSVEP-style flicker demo: four tiles blinking at the stimulus frequencies.
// Purely visual; clicking a tile routes through the same command table as
// the buttons, nothing is decoded in the browser.

import type { Command } from "./commands.js";

export interface FlickerTile {
  freqHz: number;
  command: Command;
  label: string;
}

export const FLICKER_TILES: FlickerTile[] = [
  { freqHz: 8, command: "left", label: "8 Hz ←" },
  { freqHz: 10, command: "right", label: "10 Hz →" },
  { freqHz: 12, command: "up", label: "12 Hz ↑" },
  { freqHz: 15, command: "grip", label: "15 Hz grip" },
];

/** Square-wave phase: whether a tile is lit at time t (ms). */
export function tileLit(freqHz: number, tMs: number): boolean {
  return Math.floor((tMs / 1000) * freqHz * 2) % 2 === 0;
}
