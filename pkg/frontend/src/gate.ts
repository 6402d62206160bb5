/**
 * Single-flight request gate with sequence numbers.
 *
 * At most one task runs at a time; while one is in flight the latest
 * submission waits (replacing any previously waiting one). A result is
 * applied only if no newer submission exists, so the displayed image always
 * matches the latest settled state.
 */
export class RequestGate {
  private latest = 0;
  private running = false;
  private waiting: (() => void) | null = null;
  /** tasks actually started (for tests and the status line) */
  started = 0;

  submit<T>(
    run: () => Promise<T>,
    apply: (result: T) => void,
    onError: (err: unknown) => void = () => undefined,
  ): number {
    const seq = ++this.latest;
    const exec = () => {
      this.running = true;
      this.started += 1;
      run()
        .then((result) => {
          if (seq === this.latest) apply(result);
        })
        .catch((err) => {
          if (seq === this.latest) onError(err);
        })
        .finally(() => {
          this.running = false;
          const next = this.waiting;
          this.waiting = null;
          if (next) next();
        });
    };
    if (this.running) {
      this.waiting = exec; // latest wins; older waiting task is dropped
    } else {
      exec();
    }
    return seq;
  }

  get inFlight(): boolean {
    return this.running;
  }
}
