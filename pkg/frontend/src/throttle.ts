// Rate limiter for the controller input stream: at most maxPerSecond
// messages go out; the newest payload wins while throttled. Force-flush
// (button edges) bypasses the interval so a release is sent exactly once
// and immediately.

export class MessageThrottle<T> {
  private readonly minIntervalMs: number;
  private lastSent = -Infinity;
  private pending: T | null = null;

  sent: T[] = [];
  private readonly sink: (msg: T) => void;
  private readonly clock: () => number;

  constructor(
    sink: (msg: T) => void,
    maxPerSecond = 60,
    clock: () => number = () => performance.now()
  ) {
    this.minIntervalMs = 1000 / maxPerSecond;
    this.sink = sink;
    this.clock = clock;
  }

  /** Offer a message; it is sent now if the budget allows, else queued. */
  offer(msg: T): void {
    const now = this.clock();
    if (now - this.lastSent >= this.minIntervalMs) {
      this.emit(msg, now);
    } else {
      this.pending = msg;
    }
  }

  /** Send immediately regardless of the interval (e.g. press/release edges). */
  force(msg: T): void {
    this.pending = null;
    this.emit(msg, this.clock());
  }

  /** Called periodically (e.g. per animation frame) to drain the queue. */
  tick(): void {
    if (this.pending === null) return;
    const now = this.clock();
    if (now - this.lastSent >= this.minIntervalMs) {
      const msg = this.pending;
      this.pending = null;
      this.emit(msg, now);
    }
  }

  private emit(msg: T, now: number): void {
    this.lastSent = now;
    this.sent.push(msg);
    this.sink(msg);
  }
}
