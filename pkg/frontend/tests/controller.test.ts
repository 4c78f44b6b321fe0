import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { PredictResponse } from "../src/api.js";
import { PredictionLoop } from "../src/controller.js";
import type { ViewState } from "../src/state.js";

function makeResponse(tag: number): PredictResponse {
  return {
    grid: { ny: 2, nx: 3 },
    latency_ms: tag,
    fields: {
      velocity: { data: "", min: 0, max: 1, units: "m/s" },
      temperature: { data: "", min: 10, max: 35, units: "degC" },
    },
  };
}

interface Pending {
  body: { left_velocity: number; right_velocity: number; fields: string[] };
  resolve: (r: PredictResponse) => void;
  reject: (e: Error) => void;
}

/** fetch stand-in whose responses resolve only when the test says so */
function deferredFetch() {
  const calls: Pending[] = [];
  const impl = ((url: unknown, init?: RequestInit) =>
    new Promise<Response>((res, rej) => {
      calls.push({
        body: JSON.parse(String(init?.body)),
        resolve: (r) => res({ ok: true, status: 200, json: async () => r } as Response),
        reject: rej,
      });
    })) as typeof fetch;
  return { impl, calls };
}

describe("PredictionLoop", () => {
  let states: ViewState[];

  beforeEach(() => {
    vi.useFakeTimers();
    states = [];
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  const record = (s: ViewState) => states.push(s);
  const settle = async () => {
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(0);
  };

  it("collapses a slider drag into one request after the debounce window", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("left", 0.51);
    loop.setVelocity("left", 0.52);
    loop.setVelocity("left", 0.53);
    await vi.advanceTimersByTimeAsync(49);
    expect(calls.length).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(calls.length).toBe(1);
    expect(calls[0]!.body.left_velocity).toBeCloseTo(0.53, 12);
    await vi.advanceTimersByTimeAsync(500);
    expect(calls.length).toBe(1);
  });

  it("never lets a stale response replace a newer one", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("left", 0.3);
    await vi.advanceTimersByTimeAsync(50);
    loop.setVelocity("left", 0.9);
    await vi.advanceTimersByTimeAsync(50);
    expect(calls.length).toBe(2);

    calls[1]!.resolve(makeResponse(2));
    await settle();
    expect(loop.view.response?.latency_ms).toBe(2);

    calls[0]!.resolve(makeResponse(1)); // late arrival for outdated sliders
    await settle();
    expect(loop.view.response?.latency_ms).toBe(2);
    expect(loop.view.banner).toBeNull();
  });

  it("keeps the previous field on screen and raises a banner on failure", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("right", 0.7);
    await vi.advanceTimersByTimeAsync(50);
    calls[0]!.resolve(makeResponse(1));
    await settle();
    expect(loop.view.response?.latency_ms).toBe(1);

    loop.setVelocity("right", 0.8);
    await vi.advanceTimersByTimeAsync(50);
    calls[1]!.reject(new Error("connection refused"));
    await settle();
    expect(loop.view.banner).toMatch(/connection refused/);
    expect(loop.view.response?.latency_ms).toBe(1);
    expect(loop.view.inFlight).toBe(false);
  });

  it("clamps out-of-range input before it reaches the wire", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("left", 1.5);
    loop.setVelocity("right", -2);
    await vi.advanceTimersByTimeAsync(50);
    expect(calls.length).toBe(1);
    expect(calls[0]!.body.left_velocity).toBe(1.0);
    expect(calls[0]!.body.right_velocity).toBe(0.05);
  });

  it("requests both fields so toggling repaints without the network", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("left", 0.6);
    await vi.advanceTimersByTimeAsync(50);
    expect(calls[0]!.body.fields).toEqual(["velocity", "temperature"]);
    calls[0]!.resolve(makeResponse(1));
    await settle();

    loop.setField("temperature");
    await vi.advanceTimersByTimeAsync(500);
    expect(loop.view.activeField).toBe("temperature");
    expect(calls.length).toBe(1);
  });

  it("ignores a velocity change that clamps to the current value", async () => {
    const { impl, calls } = deferredFetch();
    const loop = new PredictionLoop("", record, impl, 50);
    loop.setVelocity("left", 1.2);
    await vi.advanceTimersByTimeAsync(50);
    expect(calls.length).toBe(1);
    loop.setVelocity("left", 99); // still clamps to 1.0
    await vi.advanceTimersByTimeAsync(500);
    expect(calls.length).toBe(1);
  });
});
