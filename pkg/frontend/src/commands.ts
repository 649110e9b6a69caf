// The expert command table mirrored from the server: eight directions, the
// grip toggle, and no-op. Keyboard bindings cover the primary inputs; every
// command also gets a clickable button.

export const COMMANDS = [
  "up", "down", "left", "right",
  "up-left", "up-right", "down-left", "down-right",
  "grip", "noop",
] as const;

export type Command = (typeof COMMANDS)[number];

export const KEY_BINDINGS: Record<string, Command> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
  Home: "up-left",
  PageUp: "up-right",
  End: "down-left",
  PageDown: "down-right",
  " ": "grip",
  ".": "noop",
};

export function commandForKey(key: string): Command | null {
  return KEY_BINDINGS[key] ?? null;
}

export function isCommand(value: string): value is Command {
  return (COMMANDS as readonly string[]).includes(value);
}

export const COMMAND_LABELS: Record<Command, string> = {
  up: "↑",
  down: "↓",
  left: "←",
  right: "→",
  "up-left": "↖",
  "up-right": "↗",
  "down-left": "↙",
  "down-right": "↘",
  grip: "grip",
  noop: "·",
};
