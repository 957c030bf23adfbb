import { describe, expect, it } from "vitest";

import { debouncedRunner } from "../src/debounce.js";

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

describe("debouncedRunner", () => {
  it("collapses a burst into one trailing run", async () => {
    let runs = 0;
    const runner = debouncedRunner(30, async () => { runs += 1; });
    runner.schedule();
    runner.schedule();
    runner.schedule();
    expect(runs).toBe(0);
    await sleep(60);
    expect(runs).toBe(1);
  });

  it("keeps at most one request in flight, latest wins", async () => {
    let started = 0;
    let maxConcurrent = 0;
    let active = 0;
    const runner = debouncedRunner(10, async () => {
      started += 1;
      active += 1;
      maxConcurrent = Math.max(maxConcurrent, active);
      await sleep(40);
      active -= 1;
    });
    runner.schedule();
    await sleep(20);          // first run is now in flight
    runner.schedule();        // queued behind it
    runner.schedule();
    await sleep(140);
    expect(maxConcurrent).toBe(1);
    expect(started).toBe(2);  // burst during flight collapses to one rerun
  });

  it("flush runs immediately", async () => {
    let runs = 0;
    const runner = debouncedRunner(5000, async () => { runs += 1; });
    runner.schedule();
    await runner.flush();
    expect(runs).toBe(1);
  });

  it("cancel drops the pending timer", async () => {
    let runs = 0;
    const runner = debouncedRunner(20, async () => { runs += 1; });
    runner.schedule();
    runner.cancel();
    await sleep(50);
    expect(runs).toBe(0);
  });
});
