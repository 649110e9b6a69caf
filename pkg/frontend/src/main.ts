// Console wiring: connection, scene canvas, HUD, turn prompt, command
// inputs, flicker demo, and round charts. The UI holds no simulation state;
// everything on screen derives from received frames.

import { expertStepsChart, successChart, type RoundMetric } from "./charts.js";
import { COMMANDS, COMMAND_LABELS, commandForKey, type Command } from "./commands.js";
import { SessionConnection } from "./connection.js";
import { FLICKER_TILES, tileLit } from "./flicker.js";
import { actionFrame, startFrame, type ServerFrame, type StateFrame } from "./protocol.js";
import { paint, renderScene } from "./scene.js";
import { TurnTracker } from "./turn.js";

const SCENE_SIZE = 480;

const sceneCanvas = document.getElementById("scene") as HTMLCanvasElement;
const successCanvas = document.getElementById("chart-success") as HTMLCanvasElement;
const stepsCanvas = document.getElementById("chart-steps") as HTMLCanvasElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const turnEl = document.getElementById("turn") as HTMLDivElement;
const toastEl = document.getElementById("toast") as HTMLDivElement;
const buttonsEl = document.getElementById("buttons") as HTMLDivElement;
const flickerEl = document.getElementById("flicker") as HTMLDivElement;
const startButton = document.getElementById("start") as HTMLButtonElement;
const taskSelect = document.getElementById("task") as HTMLSelectElement;
const seedInput = document.getElementById("seed") as HTMLInputElement;
const nInput = document.getElementById("n") as HTMLInputElement;

const turns = new TurnTracker();
const rounds: RoundMetric[] = [];
let lastState: StateFrame | null = null;
let roundCounter = 0;

const connection = new SessionConnection(
  `ws://${location.hostname}:8765/session`,
  {
    onFrame: handleFrame,
    onStatus: (s) => { statusEl.textContent = s; },
    onProtocolError: (detail) => toast(`protocol: ${detail}`),
  },
);

function toast(message: string): void {
  toastEl.textContent = message;
  toastEl.classList.add("visible");
  window.setTimeout(() => toastEl.classList.remove("visible"), 2500);
}

function redraw(): void {
  if (lastState !== null) {
    const ctx = sceneCanvas.getContext("2d")!;
    paint(ctx, renderScene(lastState, { size: SCENE_SIZE }), SCENE_SIZE);
  }
  const prompt = turns.active;
  if (prompt !== null) {
    turnEl.textContent = `your turn (step ${prompt.step}) — ${turns.remainingS().toFixed(0)}s`;
    turnEl.classList.add("active");
  } else {
    turnEl.textContent = "policy running";
    turnEl.classList.remove("active");
  }
  setButtonsEnabled(turns.canSubmit);
}

function handleFrame(frame: ServerFrame): void {
  turns.onFrame(frame);
  switch (frame.type) {
    case "hello":
      statusEl.textContent = `session ${frame.session} (${frame.role})`;
      break;
    case "state":
      lastState = frame;
      if (frame.done) {
        toast(frame.success ? "task complete" : "episode over");
      }
      break;
    case "reject":
      toast(`rejected: ${frame.reason}`);
      break;
    case "result":
      rounds.push({
        round: roundCounter++,
        collab_success_rate: frame.success ? 1 : 0,
        expert_steps: frame.expert_steps,
        episodes: 1,
      });
      drawCharts();
      toast(frame.aborted ? "aborted" : `result: ${frame.success ? "success" : "failure"} in ${frame.steps} steps`);
      break;
    default:
      break;
  }
  redraw();
}

function submit(command: Command): void {
  const prompt = turns.claim();
  if (prompt === null) {
    toast("no active turn");
    return;
  }
  connection.send(actionFrame(connection.sessionId!, command, prompt.step));
  redraw();
}

function setButtonsEnabled(enabled: boolean): void {
  for (const el of buttonsEl.querySelectorAll("button")) {
    (el as HTMLButtonElement).disabled = !enabled;
  }
}

for (const command of COMMANDS) {
  const button = document.createElement("button");
  button.textContent = COMMAND_LABELS[command];
  button.title = command;
  button.addEventListener("click", () => submit(command));
  buttonsEl.appendChild(button);
}

window.addEventListener("keydown", (ev) => {
  const command = commandForKey(ev.key);
  if (command !== null && turns.canSubmit) {
    ev.preventDefault();
    submit(command);
  }
});

for (const tile of FLICKER_TILES) {
  const div = document.createElement("div");
  div.className = "tile";
  div.textContent = tile.label;
  div.addEventListener("click", () => submit(tile.command));
  flickerEl.appendChild(div);
  const animate = (t: number) => {
    div.classList.toggle("lit", tileLit(tile.freqHz, t));
    requestAnimationFrame(animate);
  };
  requestAnimationFrame(animate);
}

function drawCharts(): void {
  paint(successCanvas.getContext("2d")!, successChart(rounds, 320, 160), 320);
  paint(stepsCanvas.getContext("2d")!, expertStepsChart(rounds, 320, 160), 320);
}

startButton.addEventListener("click", () => {
  if (connection.sessionId === null) {
    toast("not connected yet");
    return;
  }
  connection.send(startFrame(connection.sessionId, {
    task: taskSelect.value,
    seed: Number(seedInput.value) || 0,
    n: Number(nInput.value) || 4,
  }));
});

window.setInterval(redraw, 250);
connection.connect();
