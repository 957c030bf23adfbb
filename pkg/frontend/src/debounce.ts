/** Debounced async runner: trailing-edge, latest-wins, one in flight.
 *
 * Each schedule() restarts the quiet-period timer.  When the timer
 * fires, the task runs; schedules arriving while it runs queue exactly
 * one follow-up execution, so stale responses never overwrite newer
 * state.
 */

export interface DebouncedRunner {
  schedule(): void;
  flush(): Promise<void>;
  cancel(): void;
  readonly inFlight: boolean;
}

export function debouncedRunner(
  ms: number,
  task: () => Promise<void>,
): DebouncedRunner {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let running = false;
  let rerun = false;

  async function execute(): Promise<void> {
    if (running) {
      rerun = true;
      return;
    }
    running = true;
    try {
      do {
        rerun = false;
        await task();
      } while (rerun);
    } finally {
      running = false;
    }
  }

  return {
    schedule(): void {
      if (timer !== null) clearTimeout(timer);
      timer = setTimeout(() => {
        timer = null;
        void execute();
      }, ms);
    },
    async flush(): Promise<void> {
      if (timer !== null) {
        clearTimeout(timer);
        timer = null;
      }
      await execute();
    },
    cancel(): void {
      if (timer !== null) clearTimeout(timer);
      timer = null;
    },
    get inFlight(): boolean {
      return running;
    },
  };
}
