/**
 * Schedule editor state: the per-level distillation step counts a user
 * is composing, with the multiplexing budget enforced on every edit.
 */

import type { EvaluateResponse } from "./types.js";

export function log2int(value: number): number {
  const result = Math.log2(value);
  if (!Number.isInteger(result)) {
    throw new Error(`${value} is not a power of two`);
  }
  return result;
}

export function scheduleSlots(segments: number): number {
  return log2int(segments) + 1;
}

export function budgetOf(multiplexing: number): number {
  return log2int(multiplexing);
}

export interface EditOutcome {
  ok: boolean;
  violation?: string;
}

export class ScheduleEditorState {
  steps: number[];
  readonly budget: number;
  lastResponse: EvaluateResponse | null = null;
  dirty = false;

  constructor(segments: number, multiplexing: number, steps?: number[]) {
    this.budget = budgetOf(multiplexing);
    const slots = scheduleSlots(segments);
    this.steps = steps ? [...steps] : new Array(slots).fill(0);
    if (this.steps.length !== slots) {
      throw new Error(`schedule needs ${slots} entries, got ${this.steps.length}`);
    }
    if (this.spent() > this.budget) {
      throw new Error(`schedule spends ${this.spent()} > budget ${this.budget}`);
    }
  }

  spent(): number {
    return this.steps.reduce((acc, v) => acc + v, 0);
  }

  remaining(): number {
    return this.budget - this.spent();
  }

  /** Attempt to set one level's step count; refuses budget violations. */
  setStep(level: number, value: number): EditOutcome {
    if (level < 0 || level >= this.steps.length) {
      return { ok: false, violation: `level ${level} out of range` };
    }
    if (!Number.isInteger(value) || value < 0) {
      return { ok: false, violation: "steps must be non-negative integers" };
    }
    const nextSpend = this.spent() - this.steps[level] + value;
    if (nextSpend > this.budget) {
      return {
        ok: false,
        violation:
          `sum(schedule) = ${nextSpend} would exceed the distillation budget ` +
          `log2(M) = ${this.budget}`,
      };
    }
    if (this.steps[level] !== value) {
      this.steps[level] = value;
      this.dirty = true;
    }
    return { ok: true };
  }

  increment(level: number): EditOutcome {
    return this.setStep(level, this.steps[level] + 1);
  }

  decrement(level: number): EditOutcome {
    return this.setStep(level, Math.max(0, this.steps[level] - 1));
  }

  markEvaluated(response: EvaluateResponse): void {
    this.lastResponse = response;
    this.dirty = false;
  }
}
