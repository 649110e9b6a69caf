// Turn bookkeeping: commands are sendable only while an action request is
// active, and each prompt accepts exactly one submission.

import type { ActionRequestFrame, ServerFrame } from "./protocol.js";

export interface TurnPrompt {
  step: number;
  deadlineMs: number; // epoch millis derived from the server deadline
  commands: string[];
}

export class TurnTracker {
  private prompt: TurnPrompt | null = null;
  private answered = false;

  get active(): TurnPrompt | null {
    return this.prompt;
  }

  get canSubmit(): boolean {
    return this.prompt !== null && !this.answered;
  }

  onFrame(frame: ServerFrame, now: number = Date.now()): void {
    if (frame.type === "action_request") {
      const req = frame as ActionRequestFrame;
      // A re-prompt for the same step reopens the window (the server timed
      // out waiting); a new step replaces the prompt outright.
      this.prompt = {
        step: req.step,
        deadlineMs: now + req.deadline_s * 1000,
        commands: req.commands,
      };
      this.answered = false;
    } else if (frame.type === "ack" || frame.type === "state" || frame.type === "result") {
      if (frame.type === "ack") {
        this.prompt = null;
      } else if (frame.type === "state" || frame.type === "result") {
        // The simulation moved on; whatever prompt existed is stale.
        this.prompt = null;
        this.answered = false;
      }
    }
  }

  /** Claim the active prompt for one submission; null when none is open. */
  claim(): TurnPrompt | null {
    if (!this.canSubmit) return null;
    this.answered = true;
    return this.prompt;
  }

  remainingS(now: number = Date.now()): number {
    if (!this.prompt) return 0;
    return Math.max(0, (this.prompt.deadlineMs - now) / 1000);
  }
}
