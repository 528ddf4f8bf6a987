import { describe, expect, it, vi } from "vitest";

import { LatestWins, debounce } from "../src/requests.js";

describe("debounce", () => {
  it("collapses a burst of calls into one", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 100);
    fn(1);
    fn(2);
    fn(3);
    vi.advanceTimersByTime(99);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(2);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });

  it("fires again after the wait elapses", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 50);
    fn(1);
    vi.advanceTimersByTime(60);
    fn(2);
    vi.advanceTimersByTime(60);
    expect(calls).toEqual([1, 2]);
    vi.useRealTimers();
  });
});

describe("LatestWins", () => {
  it("delivers only the newest result", async () => {
    const runner = new LatestWins<string>();
    let releaseFirst!: () => void;
    const first = runner.run(
      () => new Promise<string>((resolvePromise) => {
        releaseFirst = () => resolvePromise("first");
      }),
    );
    const second = runner.run(() => Promise.resolve("second"));
    expect(await second).toBe("second");
    releaseFirst();
    expect(await first).toBeUndefined(); // superseded
  });

  it("tracks in-flight state", async () => {
    const runner = new LatestWins<number>();
    let release!: () => void;
    const pending = runner.run(
      () => new Promise<number>((resolvePromise) => {
        release = () => resolvePromise(7);
      }),
    );
    expect(runner.inFlight).toBe(true);
    release();
    await pending;
    expect(runner.inFlight).toBe(false);
  });
});
