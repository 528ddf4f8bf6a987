/**
 * Debounced, latest-wins request scheduling for the what-if panel: one
 * evaluate call per settled edit, stale responses dropped.
 */

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
  timers: { set: typeof setTimeout; clear: typeof clearTimeout } = {
    set: setTimeout,
    clear: clearTimeout,
  },
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) {
      timers.clear(handle);
    }
    handle = timers.set(() => {
      handle = undefined;
      fn(...args);
    }, waitMs);
  };
}

/** Runs async tasks so only the newest one's result is delivered. */
export class LatestWins<T> {
  private generation = 0;
  private pending = 0;

  async run(task: () => Promise<T>): Promise<T | undefined> {
    const mine = ++this.generation;
    this.pending += 1;
    try {
      const result = await task();
      return mine === this.generation ? result : undefined;
    } finally {
      this.pending -= 1;
    }
  }

  get inFlight(): boolean {
    return this.pending > 0;
  }
}
