import { describe, expect, it } from "vitest";

import { COMMANDS, KEY_BINDINGS, commandForKey, isCommand } from "../src/commands.js";
import { actionFrame, parseFrame } from "../src/protocol.js";
import { FLICKER_TILES } from "../src/flicker.js";

// The server-side command table; the UI must never send anything else.
const SERVER_COMMANDS = new Set([
  "up", "down", "left", "right",
  "up-left", "up-right", "down-left", "down-right",
  "grip", "noop",
]);

describe("command table", () => {
  it("every UI command maps to a valid protocol frame", () => {
    for (const command of COMMANDS) {
      expect(SERVER_COMMANDS.has(command)).toBe(true);
      const raw = actionFrame("s1", command, 1);
      const data = JSON.parse(raw);
      expect(data.type).toBe("action");
      expect(SERVER_COMMANDS.has(data.command)).toBe(true);
    }
  });

  it("covers the server table completely", () => {
    expect(new Set(COMMANDS)).toEqual(SERVER_COMMANDS);
  });

  it("key bindings map onto known commands only", () => {
    for (const command of Object.values(KEY_BINDINGS)) {
      expect(isCommand(command)).toBe(true);
    }
    expect(commandForKey("ArrowUp")).toBe("up");
    expect(commandForKey(" ")).toBe("grip");
    expect(commandForKey(".")).toBe("noop");
    expect(commandForKey("q")).toBeNull();
  });

  it("flicker tiles route through the same table", () => {
    for (const tile of FLICKER_TILES) {
      expect(isCommand(tile.command)).toBe(true);
    }
    expect(FLICKER_TILES.map((t) => t.freqHz)).toEqual([8, 10, 12, 15]);
  });
});
